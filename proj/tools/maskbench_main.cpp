#include <string>
#include <vector>

#include "maskbench/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return maskbench::run_cli(args);
}
