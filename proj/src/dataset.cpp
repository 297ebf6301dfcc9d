#include "maskbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "maskbench/rng.hpp"

namespace fs = std::filesystem;

namespace maskbench {

std::uint64_t Corpus::content_hash() const {
    Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(subject_count));
    h.update_u64(static_cast<std::uint64_t>(images_per_subject));
    for (const ImageRecord& r : records) {
        h.update_u64(static_cast<std::uint64_t>(r.subject));
        h.update_u64(static_cast<std::uint64_t>(r.index));
        h.update_u64(r.mask_state == MaskState::Masked ? 1 : 0);
        h.update_u64(static_cast<std::uint64_t>(r.image.width));
        h.update_u64(static_cast<std::uint64_t>(r.image.height));
        h.update(r.image.pixels.data(), r.image.pixels.size());
    }
    return h.digest();
}

namespace {

// Parses "s<number>" directory names; returns 0 when not of that form.
int subject_number(const std::string& name) {
    if (name.size() < 2 || name[0] != 's') return 0;
    int v = 0;
    for (std::size_t i = 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return 0;
        v = v * 10 + (name[i] - '0');
        if (v > 1'000'000) return 0;
    }
    return v;
}

int image_number(const fs::path& p) {
    if (p.extension() != ".pgm") return 0;
    std::string stem = p.stem().string();
    if (stem.empty()) return 0;
    int v = 0;
    for (char c : stem) {
        if (c < '0' || c > '9') return 0;
        v = v * 10 + (c - '0');
        if (v > 1'000'000) return 0;
    }
    return v;
}

}  // namespace

Corpus load_corpus(const std::string& root) {
    fs::path base(root);
    if (!fs::is_directory(base)) throw IoError("corpus not found at " + root);

    int max_subject = 0;
    int max_index = 0;
    for (const auto& entry : fs::directory_iterator(base)) {
        if (!entry.is_directory()) continue;
        int s = subject_number(entry.path().filename().string());
        if (s == 0) continue;
        max_subject = std::max(max_subject, s);
        for (const auto& file : fs::directory_iterator(entry.path()))
            max_index = std::max(max_index, image_number(file.path()));
    }
    if (max_subject == 0 || max_index == 0)
        throw IoError("corpus not found at " + root +
                      " (no s<subject>/<index>.pgm entries)");

    Corpus corpus;
    corpus.subject_count = max_subject;
    corpus.images_per_subject = max_index;
    corpus.records.reserve(static_cast<std::size_t>(max_subject) * max_index);

    int width = 0, height = 0;
    for (int s = 1; s <= max_subject; ++s) {
        for (int i = 1; i <= max_index; ++i) {
            fs::path p = base / ("s" + std::to_string(s)) / (std::to_string(i) + ".pgm");
            if (!fs::exists(p))
                throw IoError("subject s" + std::to_string(s) + " missing image " +
                              std::to_string(i) + " (" + p.string() + ")");
            ImageRecord rec;
            rec.subject = s;
            rec.index = i;
            rec.mask_state = MaskState::Unmasked;
            rec.image = read_pgm_file(p.string());
            if (width == 0) {
                width = rec.image.width;
                height = rec.image.height;
            } else if (rec.image.width != width || rec.image.height != height) {
                throw IoError("inconsistent dimensions at " + p.string() + ": got " +
                              std::to_string(rec.image.width) + "x" +
                              std::to_string(rec.image.height) + ", expected " +
                              std::to_string(width) + "x" + std::to_string(height));
            }
            corpus.records.push_back(std::move(rec));
        }
    }
    return corpus;
}

void save_corpus(const std::string& root, const Corpus& corpus) {
    fs::path base(root);
    for (const ImageRecord& r : corpus.records) {
        fs::path dir = base / ("s" + std::to_string(r.subject));
        fs::create_directories(dir);
        write_pgm_file((dir / (std::to_string(r.index) + ".pgm")).string(), r.image);
    }
}

SplitSet build_splits(const Corpus& unmasked, const Corpus& masked,
                      int holdout_index) {
    if (unmasked.subject_count != masked.subject_count ||
        unmasked.images_per_subject != masked.images_per_subject)
        throw ConfigError("build_splits: corpora disagree on subjects/indices");
    const int S = unmasked.subject_count;
    const int P = unmasked.images_per_subject;
    if (holdout_index < 1 || holdout_index > P)
        throw ConfigError("build_splits: holdout index " +
                          std::to_string(holdout_index) + " out of range [1, " +
                          std::to_string(P) + "]");

    std::map<std::pair<int, int>, const ImageRecord*> um, m;
    for (const ImageRecord& r : unmasked.records) um[{r.subject, r.index}] = &r;
    for (const ImageRecord& r : masked.records) m[{r.subject, r.index}] = &r;
    if (um.size() != static_cast<std::size_t>(S) * P ||
        m.size() != static_cast<std::size_t>(S) * P)
        throw ConfigError("build_splits: corpora disagree on subjects/indices");

    auto pick = [](const std::map<std::pair<int, int>, const ImageRecord*>& src,
                   int subject, int index) {
        auto it = src.find({subject, index});
        if (it == src.end())
            throw ConfigError("build_splits: corpora disagree on subjects/indices");
        return *it->second;
    };

    SplitSet out;
    out.training_um.name = "training_um";
    out.training_hm.name = "training_hm";
    out.training_m.name = "training_m";
    out.testing_um.name = "testing_um";
    out.testing_m.name = "testing_m";

    // Per subject: the holdout image is the test pair; of the remaining
    // indices (ascending) the lowest half is used masked and the next half
    // unmasked in training_hm, dropping one so |hm| = P-2 per subject.
    const int hm_masked = (P - 2 + 1) / 2;
    const int hm_unmasked = (P - 2) / 2;
    for (int s = 1; s <= S; ++s) {
        std::vector<int> remaining;
        for (int i = 1; i <= P; ++i)
            if (i != holdout_index) remaining.push_back(i);

        out.testing_um.records.push_back(pick(um, s, holdout_index));
        out.testing_m.records.push_back(pick(m, s, holdout_index));
        for (int i : remaining) {
            out.training_um.records.push_back(pick(um, s, i));
            out.training_m.records.push_back(pick(m, s, i));
        }
        for (int j = 0; j < hm_masked && j < static_cast<int>(remaining.size()); ++j)
            out.training_hm.records.push_back(pick(m, s, remaining[j]));
        for (int j = hm_masked;
             j < hm_masked + hm_unmasked && j < static_cast<int>(remaining.size()); ++j)
            out.training_hm.records.push_back(pick(um, s, remaining[j]));
    }
    return out;
}

namespace {

// Subject-level face geometry, drawn once per subject. Identity lives both
// above the mask line (eyes, brows, forehead weave) and below it (mouth,
// chin weave), so masking genuinely removes part of the signal.
struct FaceParams {
    double head_cx, head_cy, head_a, head_b;
    int skin, background;
    double eye_y, eye_dx, eye_r;
    int eye_level;
    double brow_dy;
    int brow_half, brow_thick, brow_level;
    double nose_w;
    int nose_level;
    double mouth_y, mouth_half, mouth_thick;
    int mouth_level;
    double chin_freq, chin_angle, chin_amp, chin_phase;
    double brow_freq, brow_angle, brow_amp, brow_phase;
};

FaceParams draw_subject(std::uint64_t seed, int subject, int width, int height) {
    SplitMix64 g(mix_key(seed, 0x5ec7f1d0ull, static_cast<std::uint64_t>(subject)));
    FaceParams p;
    p.head_cx = width * (0.46 + 0.08 * g.next_unit());
    p.head_cy = height * (0.48 + 0.06 * g.next_unit());
    p.head_a = width * (0.30 + 0.10 * g.next_unit());
    p.head_b = height * (0.36 + 0.08 * g.next_unit());
    p.skin = 120 + static_cast<int>(g.next_below(60));
    p.background = 24 + static_cast<int>(g.next_below(40));
    p.eye_y = height * (0.30 + 0.08 * g.next_unit());
    p.eye_dx = width * (0.13 + 0.09 * g.next_unit());
    p.eye_r = width * (0.035 + 0.030 * g.next_unit());
    p.eye_level = 16 + static_cast<int>(g.next_below(50));
    p.brow_dy = height * (0.045 + 0.03 * g.next_unit());
    p.brow_half = 3 + static_cast<int>(g.next_below(7));
    p.brow_thick = 1 + static_cast<int>(g.next_below(4));
    p.brow_level = 30 + static_cast<int>(g.next_below(50));
    p.nose_w = 1.0 + 2.0 * g.next_unit();
    p.nose_level = p.skin - 30 - static_cast<int>(g.next_below(30));
    p.mouth_y = height * (0.66 + 0.12 * g.next_unit());
    p.mouth_half = width * (0.08 + 0.12 * g.next_unit());
    p.mouth_thick = 2.0 + 5.0 * g.next_unit();
    p.mouth_level = 30 + static_cast<int>(g.next_below(60));
    p.chin_freq = 0.5 + 1.6 * g.next_unit();
    p.chin_angle = std::numbers::pi * g.next_unit();
    p.chin_amp = 14.0 + 18.0 * g.next_unit();
    p.chin_phase = 2.0 * std::numbers::pi * g.next_unit();
    p.brow_freq = 0.4 + 1.2 * g.next_unit();
    p.brow_angle = std::numbers::pi * g.next_unit();
    p.brow_amp = 8.0 + 12.0 * g.next_unit();
    p.brow_phase = 2.0 * std::numbers::pi * g.next_unit();
    return p;
}

inline std::uint8_t clamp_level(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 8.0, 240.0));
}

GrayImage render_face(const FaceParams& p, int width, int height,
                      SplitMix64& img_rng) {
    // Per-image perturbations: whole-face shift, feature wobble, level wobble.
    const double dx = img_rng.next_in(-2, 2);
    const double dy = img_rng.next_in(-2, 2);
    const double eye_jx = img_rng.next_unit() - 0.5;
    const double eye_jy = img_rng.next_unit() - 0.5;
    const double mouth_jy = 1.6 * (img_rng.next_unit() - 0.5);
    const double level_j = img_rng.next_in(-8, 8);
    const int noise_amp = 5;

    const double cx = p.head_cx + dx;
    const double cy = p.head_cy + dy;
    const double eye_y = p.eye_y + dy + eye_jy;
    const double mouth_y = p.mouth_y + dy + mouth_jy;

    GrayImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v;
            double ex = (x - cx) / p.head_a;
            double ey = (y - cy) / p.head_b;
            if (ex * ex + ey * ey <= 1.0) {
                v = p.skin + level_j;
                // Subject-specific weave above the brow line and below the
                // nose line; both are oriented sinusoids.
                if (y < eye_y - p.brow_dy) {
                    double t = x * std::cos(p.brow_angle) + y * std::sin(p.brow_angle);
                    v += p.brow_amp * std::sin(p.brow_freq * t + p.brow_phase);
                } else if (y > mouth_y - 2.5 * p.mouth_thick) {
                    double t = x * std::cos(p.chin_angle) + y * std::sin(p.chin_angle);
                    v += p.chin_amp * std::sin(p.chin_freq * t + p.chin_phase);
                }
                // Eyes.
                double lx = x - (cx - p.eye_dx + eye_jx);
                double rx = x - (cx + p.eye_dx + eye_jx);
                double ey2 = y - eye_y;
                if (lx * lx + ey2 * ey2 <= p.eye_r * p.eye_r ||
                    rx * rx + ey2 * ey2 <= p.eye_r * p.eye_r)
                    v = p.eye_level + level_j;
                // Brows.
                double by = y - (eye_y - p.brow_dy);
                if (std::abs(by) <= p.brow_thick &&
                    (std::abs(lx) <= p.brow_half || std::abs(rx) <= p.brow_half))
                    v = p.brow_level + level_j;
                // Nose: vertical stroke from eye line to mouth line.
                if (std::abs(x - cx) <= p.nose_w && y > eye_y + p.eye_r &&
                    y < mouth_y - p.mouth_thick)
                    v = p.nose_level + level_j;
                // Mouth bar.
                if (std::abs(y - mouth_y) <= p.mouth_thick &&
                    std::abs(x - cx) <= p.mouth_half)
                    v = p.mouth_level + level_j;
            } else {
                v = p.background + level_j;
            }
            v += static_cast<double>(img_rng.next_in(-noise_amp, noise_amp));
            img.at(x, y) = clamp_level(v);
        }
    }
    return img;
}

}  // namespace

Corpus generate_fixture_corpus(std::uint64_t seed, int subjects, int per_subject,
                               int width, int height) {
    if (subjects < 1 || per_subject < 1 || width < 8 || height < 8)
        throw ConfigError("fixture corpus: counts and dimensions must be positive");
    Corpus corpus;
    corpus.subject_count = subjects;
    corpus.images_per_subject = per_subject;
    corpus.records.reserve(static_cast<std::size_t>(subjects) * per_subject);
    for (int s = 1; s <= subjects; ++s) {
        FaceParams params = draw_subject(seed, s, width, height);
        for (int i = 1; i <= per_subject; ++i) {
            SplitMix64 g(mix_key(seed, static_cast<std::uint64_t>(s),
                                 static_cast<std::uint64_t>(i)));
            ImageRecord rec;
            rec.subject = s;
            rec.index = i;
            rec.mask_state = MaskState::Unmasked;
            rec.image = render_face(params, width, height, g);
            corpus.records.push_back(std::move(rec));
        }
    }
    return corpus;
}

std::string split_manifest_csv(const SplitSet& splits, const std::string& root) {
    std::string out = "split,subject,index,mask_state,path\n";
    auto emit = [&](const DatasetSplit& split) {
        for (const ImageRecord& r : split.records) {
            out += split.name + "," + std::to_string(r.subject) + "," +
                   std::to_string(r.index) + "," + to_string(r.mask_state) + "," +
                   root + "/s" + std::to_string(r.subject) + "/" +
                   std::to_string(r.index) + ".pgm\n";
        }
    };
    emit(splits.training_um);
    emit(splits.training_hm);
    emit(splits.training_m);
    emit(splits.testing_um);
    emit(splits.testing_m);
    return out;
}

}  // namespace maskbench
