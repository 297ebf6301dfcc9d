#include <algorithm>
#include <cmath>

#include "maskbench/classifiers.hpp"

namespace maskbench {

std::vector<int> LabeledDataset::distinct_classes() const {
    std::vector<int> c(labels);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

void LabeledDataset::validate() const {
    if (features.rows != labels.size())
        throw ConfigError("dataset: feature rows and labels differ in length");
    if (features.rows == 0 || features.cols == 0)
        throw ConfigError("dataset: empty feature matrix");
    std::size_t c = distinct_classes().size();
    if (c < 2) throw ConfigError("dataset: need at least 2 classes");
    if (features.rows < c)
        throw ConfigError("dataset: fewer samples than classes");
}

namespace {

void check_dim(std::size_t model_dim, std::size_t dim, const char* kind) {
    if (model_dim != dim)
        throw ConfigError(std::string(kind) + ": input dimension " +
                          std::to_string(dim) + " does not match model dimension " +
                          std::to_string(model_dim));
}

// First maximum wins; classes are sorted, so ties resolve to the smallest id.
int argmax_class(const std::vector<double>& scores, const std::vector<int>& classes) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return classes[best];
}

std::vector<double> linear_class_scores(const Matrix& w,
                                        const std::vector<double>& biases,
                                        const double* x) {
    std::vector<double> s(w.rows);
    for (std::size_t c = 0; c < w.rows; ++c) s[c] = dot(w.row(c), x, w.cols) + biases[c];
    return s;
}

}  // namespace

std::vector<double> decision_scores(const SvcModel& m, const double* x,
                                    std::size_t dim) {
    check_dim(m.dim, dim, "svc");
    return linear_class_scores(m.weights, m.biases, x);
}

std::vector<double> decision_scores(const LdaModel& m, const double* x,
                                    std::size_t dim) {
    check_dim(m.dim, dim, "lda");
    return linear_class_scores(m.weights, m.biases, x);
}

std::vector<double> decision_scores(const NbModel& m, const double* x,
                                    std::size_t dim) {
    check_dim(m.dim, dim, "nb");
    std::vector<double> s(m.classes.size());
    constexpr double kLog2Pi = 1.8378770664093454836;
    for (std::size_t c = 0; c < m.classes.size(); ++c) {
        double acc = m.log_priors[c];
        const double* mu = m.means.row(c);
        const double* var = m.variances.row(c);
        for (std::size_t j = 0; j < dim; ++j) {
            double diff = x[j] - mu[j];
            acc += -0.5 * (kLog2Pi + std::log(var[j])) - diff * diff / (2.0 * var[j]);
        }
        s[c] = acc;
    }
    return s;
}

std::vector<double> softmax_probabilities(const LrModel& m, const double* x,
                                          std::size_t dim) {
    check_dim(m.dim, dim, "lr");
    std::vector<double> logits = linear_class_scores(m.weights, m.biases, x);
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : logits) v /= z;
    return logits;
}

int predict(const SvcModel& m, const double* x, std::size_t dim) {
    return argmax_class(decision_scores(m, x, dim), m.classes);
}

int predict(const LdaModel& m, const double* x, std::size_t dim) {
    return argmax_class(decision_scores(m, x, dim), m.classes);
}

int predict(const NbModel& m, const double* x, std::size_t dim) {
    return argmax_class(decision_scores(m, x, dim), m.classes);
}

int predict(const LrModel& m, const double* x, std::size_t dim) {
    check_dim(m.dim, dim, "lr");
    std::vector<double> logits = linear_class_scores(m.weights, m.biases, x);
    return argmax_class(logits, m.classes);
}

int predict(const DtModel& m, const double* x, std::size_t dim) {
    check_dim(m.dim, dim, "dt");
    int node = 0;
    while (m.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const TreeNode& nd = m.nodes[static_cast<std::size_t>(node)];
        node = (x[static_cast<std::size_t>(nd.feature)] <= nd.threshold) ? nd.left
                                                                         : nd.right;
    }
    return m.nodes[static_cast<std::size_t>(node)].label;
}

int predict(const TrainedModel& m, const double* x, std::size_t dim) {
    return std::visit([&](const auto& model) { return predict(model, x, dim); }, m);
}

std::vector<int> predict_batch(const TrainedModel& m, const Matrix& x) {
    std::vector<int> out(x.rows);
    parallel_chunks(x.rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = predict(m, x.row(i), x.cols);
    });
    return out;
}

const char* model_kind_name(const TrainedModel& m) {
    switch (m.index()) {
        case 0: return "SVC";
        case 1: return "LDA";
        case 2: return "KNN";
        case 3: return "DT";
        case 4: return "LR";
        default: return "NB";
    }
}

}  // namespace maskbench
