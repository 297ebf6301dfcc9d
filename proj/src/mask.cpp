#include "maskbench/mask.hpp"

#include <algorithm>
#include <cmath>

#include "maskbench/errors.hpp"
#include "maskbench/rng.hpp"

namespace maskbench {

void MaskTemplate::validate() const {
    if (id < 1 || id > 6) throw ConfigError("mask template id must be in [1, 6]");
    if (!(0.0 < top_fraction && top_fraction < bottom_fraction &&
          bottom_fraction <= 1.0))
        throw ConfigError("mask fractions must satisfy 0 < top < bottom <= 1");
    if (!(top_width_fraction > 0.0 && top_width_fraction <= 1.0 &&
          bottom_width_fraction > 0.0 && bottom_width_fraction <= 1.0))
        throw ConfigError("mask width fractions must be in (0, 1]");
    if (level_a < 0 || level_a > 255 || level_b < 0 || level_b > 255)
        throw ConfigError("mask fill levels must be in [0, 255]");
    if (fill == MaskFill::VerticalStripes && period < 1)
        throw ConfigError("stripe period must be >= 1");
    if (fill == MaskFill::Speckle && amplitude < 0)
        throw ConfigError("speckle amplitude must be >= 0");
}

std::array<MaskTemplate, 6> default_mask_templates(double top_fraction,
                                                   double bottom_fraction) {
    std::array<MaskTemplate, 6> t{};
    t[0] = {1, MaskFill::Uniform, 200, 0, 4, 0};
    t[1] = {2, MaskFill::Uniform, 225, 0, 4, 0};
    t[2] = {3, MaskFill::Uniform, 60, 0, 4, 0};
    t[3] = {4, MaskFill::VerticalStripes, 180, 120, 4, 0};
    t[4] = {5, MaskFill::Speckle, 150, 0, 4, 30};
    t[5] = {6, MaskFill::Gradient, 190, 110, 4, 0};
    for (auto& tpl : t) {
        tpl.top_fraction = top_fraction;
        tpl.bottom_fraction = bottom_fraction;
        tpl.validate();
    }
    return t;
}

namespace {

inline std::uint8_t clamp255(int v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

// Fill level for an interior pixel. Stripe/speckle patterns use mask-local
// coordinates so the texture rides with the jitter offset.
std::uint8_t fill_level(const MaskTemplate& t, int x, int y, MaskJitter j,
                        double y_top, double y_bottom) {
    switch (t.fill) {
        case MaskFill::Uniform:
            return static_cast<std::uint8_t>(t.level_a);
        case MaskFill::VerticalStripes: {
            int local = x - j.dx + 2 * t.period * 64;  // keep it non-negative
            return static_cast<std::uint8_t>(((local / t.period) % 2 == 0)
                                                 ? t.level_a
                                                 : t.level_b);
        }
        case MaskFill::Speckle: {
            std::uint64_t h =
                mix_key(static_cast<std::uint64_t>(t.id) * 0x9e37u + 17u,
                        static_cast<std::uint64_t>(x - j.dx + 4096),
                        static_cast<std::uint64_t>(y - j.dy + 4096));
            int span = 2 * t.amplitude + 1;
            int delta = static_cast<int>(h % static_cast<std::uint64_t>(span)) -
                        t.amplitude;
            return clamp255(t.level_a + delta);
        }
        case MaskFill::Gradient: {
            double py = y + 0.5;
            double f = (py - y_top) / (y_bottom - y_top);
            f = std::clamp(f, 0.0, 1.0);
            double v = t.level_a + (t.level_b - t.level_a) * f;
            return clamp255(static_cast<int>(std::floor(v + 0.5)));
        }
    }
    return 0;
}

}  // namespace

GrayImage apply_mask(const GrayImage& img, const MaskTemplate& t, MaskJitter j) {
    t.validate();
    if (j.dx < -2 || j.dx > 2 || j.dy < -2 || j.dy > 2)
        throw ConfigError("mask jitter must be within [-2, +2]");

    const double y_top = t.top_fraction * img.height + j.dy;
    const double y_bottom = t.bottom_fraction * img.height + j.dy;
    const double cx = img.width / 2.0 + j.dx;
    const double hw_top = t.top_width_fraction * img.width / 2.0;
    const double hw_bottom = t.bottom_width_fraction * img.width / 2.0;

    GrayImage out = img;
    for (int y = 0; y < img.height; ++y) {
        double py = y + 0.5;
        if (py < y_top || py > y_bottom) continue;
        double f = (py - y_top) / (y_bottom - y_top);
        double hw = hw_top + (hw_bottom - hw_top) * f;
        for (int x = 0; x < img.width; ++x) {
            double px = x + 0.5;
            if (std::abs(px - cx) <= hw)
                out.at(x, y) = fill_level(t, x, y, j, y_top, y_bottom);
        }
    }
    return out;
}

Corpus mask_corpus(const Corpus& corpus, std::uint64_t seed, double top_fraction,
                   double bottom_fraction) {
    for (const ImageRecord& r : corpus.records)
        if (r.mask_state != MaskState::Unmasked)
            throw ConfigError("mask_corpus: input corpus must be all unmasked");

    auto templates = default_mask_templates(top_fraction, bottom_fraction);
    Corpus out;
    out.subject_count = corpus.subject_count;
    out.images_per_subject = corpus.images_per_subject;
    out.records.reserve(corpus.records.size());
    for (const ImageRecord& r : corpus.records) {
        SplitMix64 g(mix_key(seed ^ 0x6d61736bULL,
                             static_cast<std::uint64_t>(r.subject),
                             static_cast<std::uint64_t>(r.index)));
        const MaskTemplate& t = templates[g.next_below(6)];
        MaskJitter j;
        j.dx = static_cast<int>(g.next_in(-2, 2));
        j.dy = static_cast<int>(g.next_in(-2, 2));
        ImageRecord masked;
        masked.subject = r.subject;
        masked.index = r.index;
        masked.mask_state = MaskState::Masked;
        masked.image = apply_mask(r.image, t, j);
        out.records.push_back(std::move(masked));
    }
    return out;
}

}  // namespace maskbench
