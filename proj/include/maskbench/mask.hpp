#pragma once

#include <array>
#include <cstdint>

#include "maskbench/dataset.hpp"
#include "maskbench/image.hpp"

namespace maskbench {

enum class MaskFill { Uniform, VerticalStripes, Speckle, Gradient };

// One of the six synthetic mask templates: a trapezoid over the lower face,
// filled with a flat level, stripes, speckle or a vertical gradient.
struct MaskTemplate {
    int id = 1;  // 1..6
    MaskFill fill = MaskFill::Uniform;
    int level_a = 200;   // uniform level / stripe A / speckle base / gradient top
    int level_b = 0;     // stripe B / gradient bottom
    int period = 4;      // stripe period in pixels
    int amplitude = 0;   // speckle half-range

    double top_fraction = 0.55;
    double bottom_fraction = 0.95;
    double top_width_fraction = 0.90;
    double bottom_width_fraction = 0.55;

    void validate() const;
};

// Per-image placement offset, bounded to [-2, +2] pixels on each axis.
struct MaskJitter {
    int dx = 0;
    int dy = 0;
};

// The default template set: light/dark flat covers, stripes, speckle and a
// vertical gradient. Geometry fractions can be overridden uniformly.
std::array<MaskTemplate, 6> default_mask_templates(double top_fraction = 0.55,
                                                   double bottom_fraction = 0.95);

// Replaces every pixel whose center lies inside the jitter-shifted trapezoid
// with the template fill; everything outside is untouched.
GrayImage apply_mask(const GrayImage& img, const MaskTemplate& t, MaskJitter j);

// Masks every record, drawing template id and jitter from a per-record
// stream keyed by (seed, subject, index). Output is independent of record
// iteration order.
Corpus mask_corpus(const Corpus& corpus, std::uint64_t seed,
                   double top_fraction = 0.55, double bottom_fraction = 0.95);

}  // namespace maskbench
