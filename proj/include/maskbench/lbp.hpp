#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskbench/image.hpp"

namespace maskbench {

enum class CellNorm { None, L1 };

// LBP histogram configuration. Defaults: radius 8, 24 neighbors, 4x4 grid,
// uniform (u2) mapping, per-cell L1 normalization.
struct LbpConfig {
    int radius = 8;
    int neighbors = 24;
    int grid_x = 4;
    int grid_y = 4;
    bool uniform_mapping = true;
    CellNorm norm = CellNorm::L1;

    // Histogram bins per cell: P(P-1)+3 uniform, 2^P raw.
    int bins() const;
    // grid_x * grid_y * bins().
    int dimension() const;

    // Throws ConfigError on invalid parameter combinations.
    void validate() const;
    // Additionally requires the image's valid interior to cover the grid.
    void validate_for(int width, int height) const;

    std::uint64_t fingerprint() const;
    std::string describe() const;
};

using FeatureVector = std::vector<double>;

// Maps a raw P-bit LBP code to its u2 histogram bin: uniform codes (at most
// two circular bit transitions) get individual bins ordered by code value,
// everything else shares the last bin. Total bins = P(P-1)+3.
class UniformMap {
public:
    explicit UniformMap(int neighbors);

    int bins() const { return static_cast<int>(uniform_codes_.size()) + 1; }
    int map(std::uint32_t code) const;

    static int circular_transitions(std::uint32_t code, int bits);

private:
    int neighbors_;
    std::vector<std::uint32_t> uniform_codes_;  // sorted ascending
};

// Intensity at (cx,cy)'s k-th circular neighbor, bilinearly interpolated.
// Sample points that land on integer coordinates read the pixel exactly.
double sample_neighbor(const GrayImage& img, int cx, int cy, int k,
                       const LbpConfig& cfg);

// P-bit code at an interior pixel; bit k is set iff neighbor k >= center.
std::uint32_t lbp_code_at(const GrayImage& img, int cx, int cy, const LbpConfig& cfg);

// Grid-concatenated histogram of (mapped) LBP codes over the valid interior.
FeatureVector extract_features(const GrayImage& img, const LbpConfig& cfg);

}  // namespace maskbench
