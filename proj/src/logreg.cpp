#include <algorithm>
#include <cmath>

#include "maskbench/classifiers.hpp"

namespace maskbench {

namespace {

struct Problem {
    const CsrMatrix& x;
    const CsrMatrix& x_csc;
    const std::vector<int>& yidx;
    std::size_t d;
    std::size_t nc;
    double l2;
};

// Mean negative log-likelihood + (l2/2)||W||^2, biases unpenalized.
// Fills `probs` (n x C) with softmax rows when non-null.
double softmax_loss(const Problem& p, const Matrix& w, const std::vector<double>& b,
                    Matrix* probs) {
    const std::size_t n = p.x.rows;
    const std::size_t nc = p.nc;
    static thread_local Matrix scores;
    csr_linear_scores(p.x, w, b, scores);
    if (probs) {
        probs->rows = n;
        probs->cols = nc;
        probs->data.resize(n * nc);
    }
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* si = scores.row(i);
        double mx = si[0];
        for (std::size_t c = 1; c < nc; ++c) mx = std::max(mx, si[c]);
        double z = 0.0;
        for (std::size_t c = 0; c < nc; ++c) z += std::exp(si[c] - mx);
        double log_z = mx + std::log(z);
        nll += log_z - si[static_cast<std::size_t>(p.yidx[i])];
        if (probs) {
            double* pi = probs->row(i);
            for (std::size_t c = 0; c < nc; ++c) pi[c] = std::exp(si[c] - log_z);
        }
    }
    double loss = nll / static_cast<double>(n);
    for (std::size_t c = 0; c < nc; ++c)
        loss += 0.5 * p.l2 * dot(w.row(c), w.row(c), w.cols);
    if (!std::isfinite(loss)) throw NumericError("lr: non-finite loss");
    return loss;
}

// Gradient from the softmax rows of the current point.
void softmax_gradient(const Problem& p, const Matrix& w, const Matrix& probs,
                      Matrix& grad_w, std::vector<double>& grad_b) {
    const std::size_t n = p.x.rows;
    const std::size_t nc = p.nc;
    const std::size_t d = p.d;
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix coeff = probs;  // (P - Y) / n
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = coeff.row(i);
        ci[static_cast<std::size_t>(p.yidx[i])] -= 1.0;
        for (std::size_t c = 0; c < nc; ++c) ci[c] *= inv_n;
    }
    static thread_local Matrix g;  // d x C
    csc_feature_weighted_sums(p.x_csc, coeff, g);

    grad_w.rows = nc;
    grad_w.cols = d;
    grad_w.data.resize(nc * d);
    parallel_chunks(nc, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const double* wc = w.row(c);
            double* gc = grad_w.row(c);
            for (std::size_t j = 0; j < d; ++j)
                gc[j] = g.at(j, c) + p.l2 * wc[j];
        }
    });
    grad_b.assign(nc, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ci = coeff.row(i);
        for (std::size_t c = 0; c < nc; ++c) grad_b[c] += ci[c];
    }
}

double inf_norm(const Matrix& gw, const std::vector<double>& gb) {
    double m = 0.0;
    for (double v : gw.data) m = std::max(m, std::abs(v));
    for (double v : gb) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

double lr_objective(const LabeledDataset& ds, const Matrix& weights,
                    const std::vector<double>& biases, double l2, Matrix* grad_w,
                    std::vector<double>* grad_b) {
    const std::vector<int> classes = ds.distinct_classes();
    std::vector<int> yidx(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), ds.labels[i]);
        yidx[i] = static_cast<int>(it - classes.begin());
    }
    CsrMatrix x_csr = CsrMatrix::from_dense(ds.features);
    CsrMatrix x_csc = CsrMatrix::from_dense(transpose(ds.features));
    Problem p{x_csr, x_csc, yidx, ds.features.cols, classes.size(), l2};
    Matrix probs;
    double loss = softmax_loss(p, weights, biases, &probs);
    if (grad_w && grad_b) softmax_gradient(p, weights, probs, *grad_w, *grad_b);
    return loss;
}

LrModel train_lr(const LabeledDataset& ds, double l2, double tol, int max_iters) {
    ds.validate();
    if (l2 < 0.0) throw ConfigError("lr: l2 must be non-negative");
    if (max_iters < 0) throw ConfigError("lr: max_iters must be >= 0");

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
    Problem p{x_csr, x_csc, yidx, d, nc, l2};

    Matrix w(nc, d);
    std::vector<double> b(nc, 0.0);
    Matrix probs;
    double loss = softmax_loss(p, w, b, &probs);

    LrModel model;
    model.loss_trace.push_back(loss);

    Matrix grad_w;
    std::vector<double> grad_b;
    Matrix w_trial(nc, d);
    std::vector<double> b_trial(nc, 0.0);

    constexpr double kArmijo = 1e-4;
    double step_seed = 1.0;
    int iterations = 0;
    double grad_norm = 0.0;

    for (int it = 0; it < max_iters; ++it) {
        softmax_gradient(p, w, probs, grad_w, grad_b);
        grad_norm = inf_norm(grad_w, grad_b);
        if (grad_norm <= tol) break;

        double gsq = dot(grad_w.data.data(), grad_w.data.data(), grad_w.data.size()) +
                     dot(grad_b.data(), grad_b.data(), grad_b.size());

        // Backtracking halving line search, warm-started from the last
        // accepted step so settled iterations cost one trial.
        double step = std::min(step_seed * 2.0, 1e8);
        bool accepted = false;
        double trial_loss = 0.0;
        while (step > 1e-20) {
            parallel_chunks(nc, [&](std::size_t begin, std::size_t end) {
                for (std::size_t c = begin; c < end; ++c) {
                    const double* wc = w.row(c);
                    const double* gc = grad_w.row(c);
                    double* tc = w_trial.row(c);
                    for (std::size_t j = 0; j < d; ++j) tc[j] = wc[j] - step * gc[j];
                    b_trial[c] = b[c] - step * grad_b[c];
                }
            });
            trial_loss = softmax_loss(p, w_trial, b_trial, &probs);
            if (trial_loss <= loss - kArmijo * step * gsq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // step underflow: no representable descent left

        std::swap(w.data, w_trial.data);
        std::swap(b, b_trial);
        loss = trial_loss;
        step_seed = step;
        ++iterations;
        model.loss_trace.push_back(loss);
    }
    // Reported loss and gradient norm describe the final iterate.
    loss = softmax_loss(p, w, b, &probs);
    softmax_gradient(p, w, probs, grad_w, grad_b);
    grad_norm = inf_norm(grad_w, grad_b);

    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = d;
    model.classes = classes;
    model.weights = std::move(w);
    model.biases = std::move(b);
    model.l2 = l2;
    model.tol = tol;
    model.max_iters = max_iters;
    model.iterations_run = iterations;
    model.final_loss = loss;
    model.final_grad_inf_norm = grad_norm;
    return model;
}

}  // namespace maskbench
