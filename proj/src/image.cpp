#include "maskbench/image.hpp"

#include <cstdio>
#include <fstream>

namespace maskbench {

namespace {

bool is_pnm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Skips whitespace and '#' comment lines, advancing pos.
void skip_space_and_comments(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (is_pnm_space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
}

// Reads one unsigned decimal header token.
long read_header_int(const std::vector<std::uint8_t>& b, std::size_t& pos,
                     const char* what) {
    skip_space_and_comments(b, pos);
    if (pos >= b.size())
        throw PgmParseError(std::string("truncated header, expected ") + what, pos);
    if (b[pos] < '0' || b[pos] > '9')
        throw PgmParseError(std::string("non-numeric header token for ") + what, pos);
    long value = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        value = value * 10 + (b[pos] - '0');
        if (value > 1'000'000'000L)
            throw PgmParseError(std::string("header value out of range for ") + what, pos);
        ++pos;
    }
    return value;
}

}  // namespace

GrayImage read_pgm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        std::string magic;
        for (std::size_t i = 0; i < bytes.size() && i < 2; ++i)
            magic.push_back(static_cast<char>(bytes[i]));
        throw PgmParseError("unsupported magic \"" + magic + "\", want \"P5\"", 0);
    }
    pos = 2;

    long w = read_header_int(bytes, pos, "width");
    long h = read_header_int(bytes, pos, "height");
    if (w <= 0 || h <= 0)
        throw PgmParseError("non-positive image dimensions", pos);
    long maxval = read_header_int(bytes, pos, "maxval");
    if (maxval != 255)
        throw PgmParseError("unsupported maxval " + std::to_string(maxval) +
                                ", want 255",
                            pos);

    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size() || !is_pnm_space(bytes[pos]))
        throw PgmParseError("missing whitespace before raster", pos);
    ++pos;

    std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < need)
        throw PgmParseError("truncated raster, need " + std::to_string(need) +
                                " bytes, have " + std::to_string(bytes.size() - pos),
                            pos);

    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return img;
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
    char header[64];
    int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width,
                          img.height);
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(n) + img.pixels.size());
    out.insert(out.end(), header, header + n);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return read_pgm(bytes);
    } catch (const PgmParseError& e) {
        throw PgmParseError(path + ": " + e.what(), e.offset());
    }
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    auto bytes = write_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

}  // namespace maskbench
