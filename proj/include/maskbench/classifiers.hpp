#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "maskbench/errors.hpp"
#include "maskbench/matops.hpp"

namespace maskbench {

// Feature matrix with parallel subject labels. lbp_fingerprint identifies
// the feature configuration that produced the matrix; it travels into every
// trained model so mismatched model/feature pairings are detectable.
struct LabeledDataset {
    Matrix features;          // n x d
    std::vector<int> labels;  // subject ids, size n
    std::uint64_t lbp_fingerprint = 0;

    std::vector<int> distinct_classes() const;  // sorted ascending
    void validate() const;
};

// ---------------------------------------------------------------------------
// Model parameterizations. All classes vectors are sorted ascending and all
// argmax tie-breaks resolve to the smallest class id.
// ---------------------------------------------------------------------------

struct SvcModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    Matrix weights;  // C x d
    std::vector<double> biases;
    double cost = 1.0;
    int iters = 0;
    Matrix objective_trace;  // checkpoints x C, non-increasing per column
    std::vector<double> final_objectives;
    double final_hinge = 0.0;
    bool non_separable = false;
};

struct LdaModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    Matrix means;    // C x d
    Matrix weights;  // C x d, rows are Sigma_reg^{-1} mu_c
    std::vector<double> biases;
    std::vector<double> log_priors;
    double shrinkage = 0.0;
};

enum class KnnMetric : std::uint8_t { Euclidean = 0, ChiSquare = 1 };

struct KnnModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    Matrix features;  // stored training set, verbatim
    std::vector<int> labels;
    int k = 5;
    KnnMetric metric = KnnMetric::Euclidean;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;  // valid at leaves
};

struct DtModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int min_leaf = 1;
};

struct LrModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    Matrix weights;  // C x d
    std::vector<double> biases;
    double l2 = 1e-4;
    double tol = 1e-6;
    int max_iters = 0;
    int iterations_run = 0;
    double final_loss = 0.0;
    double final_grad_inf_norm = 0.0;
    std::vector<double> loss_trace;  // non-increasing
};

struct NbModel {
    std::uint64_t lbp_fingerprint = 0;
    std::size_t dim = 0;
    std::vector<int> classes;
    Matrix means;      // C x d
    Matrix variances;  // C x d, floored
    std::vector<double> log_priors;
    double var_smoothing = 1e-9;
};

using TrainedModel =
    std::variant<SvcModel, LdaModel, KnnModel, DtModel, LrModel, NbModel>;

// ---------------------------------------------------------------------------
// Trainers. All are deterministic functions of (dataset, hyperparameters).
// ---------------------------------------------------------------------------

// One-vs-rest L2-regularized hinge loss, full-batch projected subgradient
// descent with step 1/(lambda t), lambda = 1/(n cost). The reported model is
// the best-objective iterate per class, so recorded checkpoint objectives
// never increase.
SvcModel train_svc(const LabeledDataset& ds, double cost = 1.0, int iters = 2000);

// Gaussian discriminants with a shared covariance shrunk toward a scaled
// identity: (1-gamma) Sigma + gamma (trace(Sigma)/d) I.
LdaModel train_lda(const LabeledDataset& ds, double shrinkage = 1e-3);

KnnModel train_knn(const LabeledDataset& ds, int k = 5,
                   KnnMetric metric = KnnMetric::Euclidean);

// CART with Gini impurity; thresholds are midpoints of consecutive distinct
// values, ties to (lowest feature, lowest threshold).
DtModel train_dt(const LabeledDataset& ds, int min_leaf = 1);

// Multinomial softmax with L2 penalty (biases unpenalized), full-batch
// gradient descent with Armijo backtracking line search.
LrModel train_lr(const LabeledDataset& ds, double l2 = 1e-4, double tol = 1e-6,
                 int max_iters = 1000);

// Per-class per-feature Gaussians, population variances floored at
// var_smoothing times the largest overall feature variance.
NbModel train_nb(const LabeledDataset& ds, double var_smoothing = 1e-9);

// ---------------------------------------------------------------------------
// Prediction.
// ---------------------------------------------------------------------------

int predict(const SvcModel& m, const double* x, std::size_t dim);
int predict(const LdaModel& m, const double* x, std::size_t dim);
int predict(const KnnModel& m, const double* x, std::size_t dim);
int predict(const DtModel& m, const double* x, std::size_t dim);
int predict(const LrModel& m, const double* x, std::size_t dim);
int predict(const NbModel& m, const double* x, std::size_t dim);

int predict(const TrainedModel& m, const double* x, std::size_t dim);
std::vector<int> predict_batch(const TrainedModel& m, const Matrix& x);

// Per-class scores as used by the linear argmax rules; exposed so tests can
// cross-check predictions against direct recomputation.
std::vector<double> decision_scores(const SvcModel& m, const double* x, std::size_t dim);
std::vector<double> decision_scores(const LdaModel& m, const double* x, std::size_t dim);
std::vector<double> decision_scores(const NbModel& m, const double* x, std::size_t dim);
std::vector<double> softmax_probabilities(const LrModel& m, const double* x,
                                          std::size_t dim);

// Softmax objective and gradient of train_lr, exposed for finite-difference
// verification. Returns the loss; fills gradients when non-null.
double lr_objective(const LabeledDataset& ds, const Matrix& weights,
                    const std::vector<double>& biases, double l2,
                    Matrix* grad_w = nullptr, std::vector<double>* grad_b = nullptr);

const char* model_kind_name(const TrainedModel& m);

}  // namespace maskbench
