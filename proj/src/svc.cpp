#include <algorithm>
#include <cmath>
#include <limits>

#include "maskbench/classifiers.hpp"
#include "maskbench/rng.hpp"

namespace maskbench {

namespace {

// Row hashes let us detect identical feature vectors carrying different
// labels, which no linear separator can resolve.
bool has_conflicting_duplicates(const LabeledDataset& ds) {
    struct Row {
        std::uint64_t hash;
        std::size_t index;
    };
    std::vector<Row> rows(ds.features.rows);
    for (std::size_t i = 0; i < ds.features.rows; ++i) {
        Fnv1a h;
        h.update(ds.features.row(i), ds.features.cols * sizeof(double));
        rows[i] = {h.digest(), i};
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.hash < b.hash;
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].hash != rows[i - 1].hash) continue;
        std::size_t a = rows[i - 1].index, b = rows[i].index;
        if (ds.labels[a] == ds.labels[b]) continue;
        if (std::equal(ds.features.row(a), ds.features.row(a) + ds.features.cols,
                       ds.features.row(b)))
            return true;
    }
    return false;
}

}  // namespace

SvcModel train_svc(const LabeledDataset& ds, double cost, int iters) {
    ds.validate();
    if (cost <= 0.0) throw ConfigError("svc: cost must be positive");
    if (iters < 1) throw ConfigError("svc: iters must be >= 1");

    const std::size_t n = ds.features.rows;
    const std::size_t d = ds.features.cols;
    const std::vector<int> classes = ds.distinct_classes();
    const std::size_t nc = classes.size();

    std::vector<int> yidx(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), ds.labels[i]);
        yidx[i] = static_cast<int>(it - classes.begin());
    }

    const CsrMatrix x_csr = CsrMatrix::from_dense(ds.features);
    const CsrMatrix x_csc = CsrMatrix::from_dense(transpose(ds.features));
    const double lambda = 1.0 / (static_cast<double>(n) * cost);
    const double radius = 1.0 / std::sqrt(lambda);
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix w(nc, d);
    std::vector<double> b(nc, 0.0);
    Matrix w_best(nc, d);
    std::vector<double> b_best(nc, 0.0);
    std::vector<double> j_best(nc, std::numeric_limits<double>::infinity());

    Matrix scores;
    Matrix delta(n, nc);
    Matrix grad;
    std::vector<double> col_sums(nc);

    const int checkpoint_every = 100;
    std::vector<double> trace;

    // Evaluates the current iterate: per-class objective (pocketing the best
    // iterate seen) and the hinge subgradient coefficients.
    auto evaluate = [&](bool want_subgradient) {
        csr_linear_scores(x_csr, w, b, scores);
        if (want_subgradient) std::fill(delta.data.begin(), delta.data.end(), 0.0);
        std::fill(col_sums.begin(), col_sums.end(), 0.0);
        for (std::size_t c = 0; c < nc; ++c) {
            double hinge = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double y = (static_cast<std::size_t>(yidx[i]) == c) ? 1.0 : -1.0;
                double margin = y * scores.at(i, c);
                if (margin < 1.0) {
                    hinge += 1.0 - margin;
                    if (want_subgradient) {
                        delta.at(i, c) = -y * inv_n;
                        col_sums[c] += -y * inv_n;
                    }
                }
            }
            double obj = 0.5 * lambda * dot(w.row(c), w.row(c), d) + hinge * inv_n;
            if (obj < j_best[c]) {
                j_best[c] = obj;
                std::copy(w.row(c), w.row(c) + d, w_best.row(c));
                b_best[c] = b[c];
            }
        }
    };

    for (int t = 1; t <= iters; ++t) {
        evaluate(true);
        grad.rows = 0;
        csc_feature_weighted_sums(x_csc, delta, grad);  // d x C

        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double decay = 1.0 - eta * lambda;
        parallel_chunks(nc, [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                double* wc = w.row(c);
                double norm_sq = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    wc[j] = decay * wc[j] - eta * grad.at(j, c);
                    norm_sq += wc[j] * wc[j];
                }
                b[c] -= eta * col_sums[c];
                // Projection onto the ball that must contain the optimum.
                double norm = std::sqrt(norm_sq);
                if (norm > radius) {
                    double scale = radius / norm;
                    for (std::size_t j = 0; j < d; ++j) wc[j] *= scale;
                }
            }
        });

        if (t % checkpoint_every == 0)
            for (std::size_t c = 0; c < nc; ++c) trace.push_back(j_best[c]);
    }
    evaluate(false);  // pocket the final iterate too
    for (std::size_t c = 0; c < nc; ++c) trace.push_back(j_best[c]);

    SvcModel model;
    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = d;
    model.classes = classes;
    model.weights = std::move(w_best);
    model.biases = std::move(b_best);
    model.cost = cost;
    model.iters = iters;
    model.final_objectives = j_best;

    model.objective_trace.rows = trace.size() / nc;
    model.objective_trace.cols = nc;
    model.objective_trace.data = std::move(trace);

    // Hinge of the reported (pocketed) solution.
    csr_linear_scores(x_csr, model.weights, model.biases, scores);
    double total_hinge = 0.0;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            double y = (static_cast<std::size_t>(yidx[i]) == c) ? 1.0 : -1.0;
            total_hinge += std::max(0.0, 1.0 - y * scores.at(i, c)) * inv_n;
        }
    model.final_hinge = total_hinge;
    model.non_separable = has_conflicting_duplicates(ds);
    return model;
}

}  // namespace maskbench
