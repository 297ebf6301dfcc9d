#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskbench/image.hpp"

namespace maskbench {

enum class MaskState { Unmasked, Masked };

inline const char* to_string(MaskState s) {
    return s == MaskState::Unmasked ? "unmasked" : "masked";
}

// One labeled face image. subject and index are 1-based, matching the
// on-disk layout s<subject>/<index>.pgm.
struct ImageRecord {
    int subject = 0;
    int index = 0;
    MaskState mask_state = MaskState::Unmasked;
    GrayImage image;
};

// Subject-complete image collection: every subject holds exactly
// images_per_subject records and all images share one size.
struct Corpus {
    std::vector<ImageRecord> records;
    int subject_count = 0;
    int images_per_subject = 0;

    std::uint64_t content_hash() const;
};

struct DatasetSplit {
    std::string name;
    std::vector<ImageRecord> records;
};

// The five experimental splits: unmasked / half-masked / masked training
// plus the two per-subject holdout test sets.
struct SplitSet {
    DatasetSplit training_um;
    DatasetSplit training_hm;
    DatasetSplit training_m;
    DatasetSplit testing_um;
    DatasetSplit testing_m;
};

// Loads `root/s<subject>/<index>.pgm` for subjects 1..S, indices 1..P.
// S and P are taken from the tree; incomplete subjects or mismatched image
// dimensions are errors.
Corpus load_corpus(const std::string& root);

// Writes a corpus back out in the same directory layout.
void save_corpus(const std::string& root, const Corpus& corpus);

// Derives the five splits. `masked` must be the record-for-record masked
// rendering of `unmasked`. The image at holdout_index (per subject) becomes
// the test pair; see split rules in the implementation.
SplitSet build_splits(const Corpus& unmasked, const Corpus& masked,
                      int holdout_index);

// Deterministic procedural face corpus used for tests and CI runs: an
// elliptical head, textured skin bands, eye blobs, brows, nose and a mouth
// bar, all parameterized per subject and jittered per image.
Corpus generate_fixture_corpus(std::uint64_t seed, int subjects, int per_subject,
                               int width, int height);

// CSV manifest rows: split_name,subject,index,mask_state,path.
std::string split_manifest_csv(const SplitSet& splits, const std::string& root);

}  // namespace maskbench
