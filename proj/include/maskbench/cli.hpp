#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maskbench/evaluation.hpp"

namespace maskbench {

// Fully resolved run configuration; serialized into every report header.
struct RunConfig {
    std::string data_root;
    std::string out_root = "out";
    std::uint64_t master_seed = 1;
    std::optional<std::uint64_t> mask_seed;  // defaults to master_seed
    int holdout_index = 0;                   // 0 means the last image per subject
    LbpConfig lbp;
    ModelHypers hypers;
    double mask_top = 0.55;
    double mask_bottom = 0.95;
    std::string format = "both";  // csv | md | both
    int jobs = 0;                 // 0 means all hardware threads
    bool use_cache = true;

    std::uint64_t resolved_mask_seed() const {
        return mask_seed.value_or(master_seed);
    }
    // Everything that determines the feature matrices, tied to the corpus.
    std::uint64_t pipeline_fingerprint(std::uint64_t corpus_hash) const;
};

// Full pipeline: load, mask, split, extract, train, evaluate, render, write.
// Reports land under <out_root>/reports, models under <out_root>/models.
ReportBundle cmd_reproduce(const RunConfig& cfg);

// Writes a procedural fixture corpus as PGM files.
void cmd_fixtures(const std::string& out_root, std::uint64_t seed, int subjects,
                  int per_subject, int width, int height);

// Masks a corpus directory into the same layout under out_root.
void cmd_mask(const std::string& data_root, const std::string& out_root,
              std::uint64_t mask_seed, double top_fraction, double bottom_fraction);

// Command-line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace maskbench
