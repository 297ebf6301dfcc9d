#include <doctest.h>

#include <cctype>
#include <cstdio>
#include <string>
#include <vector>

#include "maskbench/image.hpp"
#include "maskbench/rng.hpp"

using namespace maskbench;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return {s.begin(), s.end()};
}

// Independent reference decoder used as the oracle for raster comparisons.
// Deliberately naive: tokenizes the whole header with stdio-style scanning.
struct NaivePgm {
    int width = 0, height = 0;
    std::vector<std::uint8_t> raster;
};

NaivePgm naive_decode(const std::vector<std::uint8_t>& b) {
    NaivePgm out;
    REQUIRE(b.size() >= 2);
    REQUIRE(b[0] == 'P');
    REQUIRE(b[1] == '5');
    std::size_t pos = 2;
    long vals[3];
    for (long& val : vals) {
        while (pos < b.size() &&
               (std::isspace(b[pos]) || b[pos] == '#')) {
            if (b[pos] == '#')
                while (pos < b.size() && b[pos] != '\n') ++pos;
            else
                ++pos;
        }
        val = 0;
        while (pos < b.size() && std::isdigit(b[pos])) {
            val = val * 10 + (b[pos] - '0');
            ++pos;
        }
    }
    ++pos;  // single whitespace after maxval
    out.width = static_cast<int>(vals[0]);
    out.height = static_cast<int>(vals[1]);
    REQUIRE(vals[2] == 255);
    out.raster.assign(b.begin() + static_cast<std::ptrdiff_t>(pos), b.end());
    out.raster.resize(static_cast<std::size_t>(out.width) * out.height);
    return out;
}

GrayImage random_image(SplitMix64& rng, int max_side = 24) {
    int w = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_side)));
    int h = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_side)));
    GrayImage img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_below(256));
    return img;
}

}  // namespace

TEST_CASE("decodes a minimal P5 graymap") {
    auto b = bytes_of("P5 2 2 255 ");
    b.pop_back();
    b.push_back('\n');
    b.push_back(0);
    b.push_back(1);
    b.push_back(2);
    b.push_back(3);
    GrayImage img = read_pgm(b);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 1, 2, 3});
}

TEST_CASE("header comments are skipped") {
    std::string header = "P5\n# a comment line\n2 2\n# another\n255\n";
    auto b = bytes_of(header);
    for (std::uint8_t v : {0, 1, 2, 3}) b.push_back(v);
    GrayImage img = read_pgm(b);
    CHECK(img.width == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 1, 2, 3});
}

TEST_CASE("rejects non-P5 magic") {
    auto b = bytes_of("P2\n2 2\n255\n0 1 2 3");
    CHECK_THROWS_WITH_AS(read_pgm(b), doctest::Contains("unsupported magic"),
                         PgmParseError);
}

TEST_CASE("rejects maxval other than 255") {
    auto b = bytes_of("P5\n2 2\n65535\n");
    b.resize(b.size() + 8, 0);
    CHECK_THROWS_WITH_AS(read_pgm(b), doctest::Contains("maxval"), PgmParseError);
}

TEST_CASE("rejects truncated raster and names the offset") {
    auto b = bytes_of("P5\n2 2\n255\n");
    b.push_back(9);  // 1 of 4 raster bytes
    try {
        read_pgm(b);
        FAIL("expected PgmParseError");
    } catch (const PgmParseError& e) {
        CHECK(e.offset() == 11);
        CHECK(std::string(e.what()).find("truncated raster") != std::string::npos);
    }
}

TEST_CASE("rejects non-numeric header tokens") {
    auto b = bytes_of("P5\nwide 2\n255\n....");
    CHECK_THROWS_WITH_AS(read_pgm(b), doctest::Contains("non-numeric"),
                         PgmParseError);
}

TEST_CASE("canonical writer emits the documented header") {
    GrayImage img(2, 2);
    img.pixels = {0, 1, 2, 3};
    auto b = write_pgm(img);
    std::string head(b.begin(), b.begin() + 10);
    CHECK(head == "P5\n2 2\n255");
    CHECK(b.size() == 11 + 4);
}

TEST_CASE("round-trip identity on random images") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        GrayImage img = random_image(rng);
        GrayImage back = read_pgm(write_pgm(img));
        CHECK(back == img);
    }
}

TEST_CASE("re-encoding a non-canonical file preserves the raster") {
    // Odd whitespace and comments, decoded independently by the naive oracle.
    std::string header = "P5 # magic\n  3\t1 # dims\n 255 ";
    auto b = bytes_of(header);
    b.back() = '\n';
    for (std::uint8_t v : {10, 200, 30}) b.push_back(v);

    auto canonical = write_pgm(read_pgm(b));
    NaivePgm theirs = naive_decode(b);
    NaivePgm ours = naive_decode(canonical);
    CHECK(ours.width == theirs.width);
    CHECK(ours.height == theirs.height);
    CHECK(ours.raster == theirs.raster);
    std::string head(canonical.begin(), canonical.begin() + 3);
    CHECK(head == "P5\n");
}

TEST_CASE("decoder never yields out-of-range intensities") {
    // uint8 storage makes this structural; spot-check bounds anyway.
    SplitMix64 rng(7);
    GrayImage img = random_image(rng);
    for (auto p : read_pgm(write_pgm(img)).pixels) CHECK(p <= 255);
}

TEST_CASE("file helpers round-trip through disk") {
    GrayImage img(3, 2);
    img.pixels = {5, 10, 15, 20, 25, 30};
    std::string path = "test_imaging_tmp.pgm";
    write_pgm_file(path, img);
    GrayImage back = read_pgm_file(path);
    CHECK(back == img);
    std::remove(path.c_str());
}
