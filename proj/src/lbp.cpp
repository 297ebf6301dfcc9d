#include "maskbench/lbp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maskbench/rng.hpp"

namespace maskbench {

int LbpConfig::bins() const {
    if (uniform_mapping) return neighbors * (neighbors - 1) + 3;
    return 1 << neighbors;
}

int LbpConfig::dimension() const { return grid_x * grid_y * bins(); }

void LbpConfig::validate() const {
    if (radius < 1) throw ConfigError("lbp: radius must be >= 1");
    if (neighbors < 4 || neighbors > 32)
        throw ConfigError("lbp: neighbors must be in [4, 32]");
    if (grid_x < 1 || grid_y < 1) throw ConfigError("lbp: grid counts must be >= 1");
    if (!uniform_mapping && neighbors > 16)
        throw ConfigError("lbp: uniform mapping is mandatory for neighbors > 16");
}

void LbpConfig::validate_for(int width, int height) const {
    validate();
    int vw = width - 2 * radius;
    int vh = height - 2 * radius;
    if (vw < grid_x || vh < grid_y)
        throw ConfigError("lbp: image " + std::to_string(width) + "x" +
                          std::to_string(height) + " too small for radius " +
                          std::to_string(radius) + " with " + std::to_string(grid_x) +
                          "x" + std::to_string(grid_y) + " grid");
}

std::uint64_t LbpConfig::fingerprint() const {
    Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(radius));
    h.update_u64(static_cast<std::uint64_t>(neighbors));
    h.update_u64(static_cast<std::uint64_t>(grid_x));
    h.update_u64(static_cast<std::uint64_t>(grid_y));
    h.update_u64(uniform_mapping ? 1 : 0);
    h.update_u64(norm == CellNorm::L1 ? 1 : 0);
    return h.digest();
}

std::string LbpConfig::describe() const {
    return "radius=" + std::to_string(radius) + " neighbors=" +
           std::to_string(neighbors) + " grid=" + std::to_string(grid_x) + "x" +
           std::to_string(grid_y) + " mapping=" + (uniform_mapping ? "u2" : "raw") +
           " norm=" + (norm == CellNorm::L1 ? "L1" : "none");
}

namespace {

struct NeighborOffset {
    int ix, iy;      // floor of the offset
    double fx, fy;   // fractional parts; 0 means the axis is exact
};

// Offsets are a pure function of (radius, neighbors); near-integer
// coordinates are snapped so axis-aligned samples read pixels exactly.
std::vector<NeighborOffset> neighbor_offsets(const LbpConfig& cfg) {
    std::vector<NeighborOffset> offs(static_cast<std::size_t>(cfg.neighbors));
    for (int k = 0; k < cfg.neighbors; ++k) {
        double theta = 2.0 * std::numbers::pi * k / cfg.neighbors;
        double dx = cfg.radius * std::cos(theta);
        double dy = -cfg.radius * std::sin(theta);  // image y grows downward
        auto snap = [](double v) {
            double r = std::round(v);
            return (std::abs(v - r) < 1e-9) ? r : v;
        };
        dx = snap(dx);
        dy = snap(dy);
        NeighborOffset o;
        o.ix = static_cast<int>(std::floor(dx));
        o.iy = static_cast<int>(std::floor(dy));
        o.fx = dx - o.ix;
        o.fy = dy - o.iy;
        offs[static_cast<std::size_t>(k)] = o;
    }
    return offs;
}

// Bilinear interpolation in incremental form. Written over pixel differences
// so that adding a constant to every input moves the result by exactly that
// constant, which makes LBP codes bit-exactly invariant under gray shifts.
inline double interp_at(const GrayImage& img, int cx, int cy,
                        const NeighborOffset& o) {
    int x0 = cx + o.ix;
    int y0 = cy + o.iy;
    double p00 = img.at(x0, y0);
    double v = p00;
    if (o.fx != 0.0) v += o.fx * (img.at(x0 + 1, y0) - p00);
    if (o.fy != 0.0) v += o.fy * (img.at(x0, y0 + 1) - p00);
    if (o.fx != 0.0 && o.fy != 0.0)
        v += o.fx * o.fy *
             (p00 + img.at(x0 + 1, y0 + 1) - img.at(x0 + 1, y0) - img.at(x0, y0 + 1));
    return v;
}

inline std::uint32_t code_at(const GrayImage& img, int cx, int cy,
                             const std::vector<NeighborOffset>& offs) {
    int center = img.at(cx, cy);
    std::uint32_t code = 0;
    for (std::size_t k = 0; k < offs.size(); ++k) {
        const NeighborOffset& o = offs[k];
        int x0 = cx + o.ix;
        int y0 = cy + o.iy;
        // Same arithmetic as interp_at, with the integer center subtracted
        // from each corner first; comparisons survive gray shifts exactly.
        double d00 = img.at(x0, y0) - center;
        double v = d00;
        if (o.fx != 0.0) v += o.fx * (img.at(x0 + 1, y0) - img.at(x0, y0));
        if (o.fy != 0.0) v += o.fy * (img.at(x0, y0 + 1) - img.at(x0, y0));
        if (o.fx != 0.0 && o.fy != 0.0)
            v += o.fx * o.fy *
                 (img.at(x0, y0) + img.at(x0 + 1, y0 + 1) - img.at(x0 + 1, y0) -
                  img.at(x0, y0 + 1));
        if (v >= 0.0) code |= (1u << k);
    }
    return code;
}

}  // namespace

double sample_neighbor(const GrayImage& img, int cx, int cy, int k,
                       const LbpConfig& cfg) {
    cfg.validate();
    auto offs = neighbor_offsets(cfg);
    return interp_at(img, cx, cy, offs[static_cast<std::size_t>(k)]);
}

std::uint32_t lbp_code_at(const GrayImage& img, int cx, int cy,
                          const LbpConfig& cfg) {
    cfg.validate();
    auto offs = neighbor_offsets(cfg);
    return code_at(img, cx, cy, offs);
}

UniformMap::UniformMap(int neighbors) : neighbors_(neighbors) {
    const int p = neighbors;
    const std::uint32_t mask =
        (p == 32) ? 0xffffffffu : ((1u << p) - 1u);
    uniform_codes_.reserve(static_cast<std::size_t>(p) * (p - 1) + 2);
    uniform_codes_.push_back(0);
    uniform_codes_.push_back(mask);
    // Exactly-two-transition codes are circular runs of ones, length 1..P-1.
    for (int len = 1; len < p; ++len) {
        std::uint32_t run = (len == 32) ? 0xffffffffu : ((1u << len) - 1u);
        for (int rot = 0; rot < p; ++rot) {
            std::uint32_t code =
                rot == 0 ? run : (((run << rot) | (run >> (p - rot))) & mask);
            uniform_codes_.push_back(code);
        }
    }
    std::sort(uniform_codes_.begin(), uniform_codes_.end());
}

int UniformMap::circular_transitions(std::uint32_t code, int bits) {
    std::uint32_t mask = (bits == 32) ? 0xffffffffu : ((1u << bits) - 1u);
    std::uint32_t rot =
        ((code << 1) | (code >> (bits - 1))) & mask;
    std::uint32_t diff = (code ^ rot) & mask;
    int n = 0;
    while (diff) {
        diff &= diff - 1;
        ++n;
    }
    return n;
}

int UniformMap::map(std::uint32_t code) const {
    if (circular_transitions(code, neighbors_) > 2)
        return static_cast<int>(uniform_codes_.size());
    auto it = std::lower_bound(uniform_codes_.begin(), uniform_codes_.end(), code);
    return static_cast<int>(it - uniform_codes_.begin());
}

FeatureVector extract_features(const GrayImage& img, const LbpConfig& cfg) {
    cfg.validate_for(img.width, img.height);
    const int r = cfg.radius;
    const int vw = img.width - 2 * r;
    const int vh = img.height - 2 * r;
    const int cell_w = vw / cfg.grid_x;  // remainder goes to the last column
    const int cell_h = vh / cfg.grid_y;
    const int bins = cfg.bins();

    auto offs = neighbor_offsets(cfg);
    UniformMap umap(cfg.neighbors);

    const int cells = cfg.grid_x * cfg.grid_y;
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(cells) * bins, 0);

    for (int y = r; y < r + vh; ++y) {
        int gy = std::min((y - r) / cell_h, cfg.grid_y - 1);
        for (int x = r; x < r + vw; ++x) {
            int gx = std::min((x - r) / cell_w, cfg.grid_x - 1);
            std::uint32_t code = code_at(img, x, y, offs);
            int bin = cfg.uniform_mapping ? umap.map(code) : static_cast<int>(code);
            counts[static_cast<std::size_t>(gy * cfg.grid_x + gx) * bins + bin]++;
        }
    }

    FeatureVector out(static_cast<std::size_t>(cells) * bins, 0.0);
    for (int c = 0; c < cells; ++c) {
        const std::uint32_t* src = &counts[static_cast<std::size_t>(c) * bins];
        double* dst = &out[static_cast<std::size_t>(c) * bins];
        if (cfg.norm == CellNorm::L1) {
            std::uint64_t total = 0;
            for (int b = 0; b < bins; ++b) total += src[b];
            double inv = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
            for (int b = 0; b < bins; ++b) dst[b] = src[b] * inv;
        } else {
            for (int b = 0; b < bins; ++b) dst[b] = src[b];
        }
    }
    return out;
}

}  // namespace maskbench
