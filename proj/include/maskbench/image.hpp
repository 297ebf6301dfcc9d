#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskbench/errors.hpp"

namespace maskbench {

// 8-bit grayscale raster, row-major. The unit of all pixel processing.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size == width * height

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }

    bool operator==(const GrayImage& o) const = default;
};

// Decodes a binary "P5" portable graymap with maxval 255. Header comments
// ('#' to end of line) are allowed anywhere whitespace is. Throws
// PgmParseError naming the byte offset on malformed input.
GrayImage read_pgm(const std::vector<std::uint8_t>& bytes);

// Canonical encoder: "P5\n<w> <h>\n255\n" + raster. read_pgm(write_pgm(x)) == x.
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

// File wrappers around the byte-level codec.
GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const GrayImage& img);

}  // namespace maskbench
