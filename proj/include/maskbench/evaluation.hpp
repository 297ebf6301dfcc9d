#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maskbench/classifiers.hpp"
#include "maskbench/dataset.hpp"
#include "maskbench/lbp.hpp"

namespace maskbench {

enum class TrainSet : int { UM = 0, HM = 1, M = 2 };
enum class TestSet : int { UM = 0, M = 1 };

// One of the six train/test pairings, in the fixed presentation order
// UM/UM, UM/M, HM/UM, HM/M, M/UM, M/M.
struct ExperimentId {
    TrainSet train;
    TestSet test;

    int column() const;  // 0..5 presentation order
    std::string label() const;
    static ExperimentId from_column(int column);
};

inline const char* to_string(TrainSet t) {
    switch (t) {
        case TrainSet::UM: return "UM";
        case TrainSet::HM: return "HM";
        default: return "M";
    }
}
inline const char* to_string(TestSet t) { return t == TestSet::UM ? "UM" : "M"; }

struct ClassMetrics {
    int cls = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Counting-first metrics: accuracy and miss rate derive from the same two
// integers, so miss_rate == 1 - accuracy holds exactly.
struct Metrics {
    std::size_t n_test = 0;
    std::size_t misses = 0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;

    double accuracy() const {
        return n_test == 0 ? 0.0
                           : static_cast<double>(n_test - misses) /
                                 static_cast<double>(n_test);
    }
    double miss_rate() const { return 1.0 - accuracy(); }
};

// Trainer hyperparameters for the whole model zoo.
struct ModelHypers {
    double svc_cost = 1.0;
    int svc_iters = 2000;
    double lda_shrinkage = 1e-3;
    int knn_k = 5;
    KnnMetric knn_metric = KnnMetric::Euclidean;
    int dt_min_leaf = 1;
    double lr_l2 = 1e-4;
    double lr_tol = 1e-6;
    int lr_max_iters = 1000;
    double nb_var_smoothing = 1e-9;

    std::uint64_t fingerprint() const;
    std::string describe() const;
};

constexpr int kModelCount = 6;
constexpr int kExperimentCount = 6;
extern const std::array<const char*, kModelCount> kModelNames;  // SVC..NB

// Everything a report needs to be reproducible from scratch.
struct Provenance {
    std::uint64_t master_seed = 0;
    std::uint64_t mask_seed = 0;
    int holdout_index = 0;
    std::string lbp_description;
    std::uint64_t lbp_fingerprint = 0;
    std::string hyper_description;
    std::uint64_t hyper_fingerprint = 0;
    std::uint64_t corpus_hash = 0;
    int subjects = 0;
    int images_per_subject = 0;

    std::string header_lines() const;  // "# key: value\n" block
};

// Full experiment-matrix results: 6 models x 6 experiments of Metrics.
struct ReportBundle {
    std::array<std::array<Metrics, kExperimentCount>, kModelCount> cells;
    Provenance provenance;

    const Metrics& cell(int model, const ExperimentId& e) const {
        return cells[static_cast<std::size_t>(model)]
                    [static_cast<std::size_t>(e.column())];
    }
    double model_average_accuracy(int model) const;
    double experiment_average_accuracy(int column) const;
    double model_average_f1(int model) const;
    double experiment_average_f1(int column) const;
    // Mean miss rate over models for one (train set, test group) pair.
    double average_miss_rate(TrainSet train, TestSet test) const;
};

// Feature extraction for a whole split; row order follows the split.
Matrix extract_split_features(const DatasetSplit& split, const LbpConfig& cfg);

// Labels parallel to extract_split_features rows.
std::vector<int> split_labels(const DatasetSplit& split);

// Predicts every record of the split and aggregates counting metrics plus
// macro-F1 over the union of true and predicted classes.
Metrics evaluate(const TrainedModel& m, const DatasetSplit& split,
                 const LbpConfig& cfg);

// Pre-extracted variant used by the matrix runner.
Metrics evaluate_features(const TrainedModel& m, const Matrix& features,
                          const std::vector<int>& labels);

// Trains all six models on all three training splits and evaluates each
// against both test splits. Training or evaluation failures are annotated
// with the (model, experiment) that caused them.
ReportBundle run_experiment_matrix(const SplitSet& splits, const LbpConfig& cfg,
                                   const ModelHypers& hypers,
                                   std::vector<TrainedModel>* trained = nullptr);

// Rendered report tables keyed by name: accuracy, f1, miss_um, miss_hm,
// miss_m, miss_overall. CSV keeps full precision; markdown rounds half-up
// to whole percent (the overall table keeps one decimal).
enum class ReportFormat { Csv, Markdown };
std::map<std::string, std::string> render_reports(const ReportBundle& bundle,
                                                  ReportFormat format);

// Parses one of the CSV tables back into (model, train, test, metric) -> value.
std::map<std::string, double> parse_report_csv(const std::string& csv);

}  // namespace maskbench
