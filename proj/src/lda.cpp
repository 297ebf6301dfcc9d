#include <algorithm>
#include <cmath>

#include "maskbench/classifiers.hpp"

namespace maskbench {

namespace {

// In-place Cholesky of a symmetric positive definite matrix (lower factor).
// Returns false on a non-positive pivot.
bool cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a.at(j, k) * a.at(j, k);
        if (diag <= 0.0 || !std::isfinite(diag)) return false;
        diag = std::sqrt(diag);
        a.at(j, j) = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= a.at(i, k) * a.at(j, k);
            a.at(i, j) = v / diag;
        }
    }
    return true;
}

// Solves L L^T x = rhs in place given the lower Cholesky factor.
void cholesky_solve(const Matrix& l, std::vector<double>& rhs) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= l.at(i, k) * rhs[k];
        rhs[i] = v / l.at(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= l.at(k, ii) * rhs[k];
        rhs[ii] = v / l.at(ii, ii);
    }
}

}  // namespace

LdaModel train_lda(const LabeledDataset& ds, double shrinkage) {
    ds.validate();
    if (shrinkage < 0.0 || shrinkage > 1.0)
        throw ConfigError("lda: shrinkage must be in [0, 1]");

    const std::size_t n = ds.features.rows;
    const std::size_t d = ds.features.cols;
    const std::vector<int> classes = ds.distinct_classes();
    const std::size_t nc = classes.size();

    std::vector<int> yidx(n);
    std::vector<double> counts(nc, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), ds.labels[i]);
        yidx[i] = static_cast<int>(it - classes.begin());
        counts[static_cast<std::size_t>(yidx[i])] += 1.0;
    }

    Matrix means(nc, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = ds.features.row(i);
        double* mu = means.row(static_cast<std::size_t>(yidx[i]));
        for (std::size_t j = 0; j < d; ++j) mu[j] += xi[j];
    }
    for (std::size_t c = 0; c < nc; ++c) {
        double* mu = means.row(c);
        for (std::size_t j = 0; j < d; ++j) mu[j] /= counts[c];
    }

    // Centered samples and the trace of the pooled covariance (divide by n).
    Matrix centered(n, d);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = ds.features.row(i);
        const double* mu = means.row(static_cast<std::size_t>(yidx[i]));
        double* zi = centered.row(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            zi[j] = xi[j] - mu[j];
            sq += zi[j] * zi[j];
        }
        trace += sq;
    }
    trace /= static_cast<double>(n);

    const double gamma = shrinkage;
    const double sigma_bar = trace / static_cast<double>(d);
    const double beta = (1.0 - gamma) / static_cast<double>(n);

    Matrix weights(nc, d);

    if (gamma == 0.0) {
        // Unshrunk covariance: only solvable densely, and only when the
        // scatter can have full rank at all.
        if (n < d)
            throw NumericError(
                "lda: covariance factorization failed: singular pooled covariance "
                "(n < d and shrinkage is 0)");
        Matrix sigma(d, d);
        for (std::size_t i = 0; i < n; ++i) {
            const double* zi = centered.row(i);
            for (std::size_t a = 0; a < d; ++a) {
                double va = zi[a] * beta;  // beta == 1/n here
                double* row = sigma.row(a);
                for (std::size_t b2 = 0; b2 <= a; ++b2) row[b2] += va * zi[b2];
            }
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b2 = a + 1; b2 < d; ++b2) sigma.at(a, b2) = sigma.at(b2, a);
        if (!cholesky(sigma))
            throw NumericError(
                "lda: covariance factorization failed: singular pooled covariance");
        for (std::size_t c = 0; c < nc; ++c) {
            std::vector<double> rhs(means.row(c), means.row(c) + d);
            cholesky_solve(sigma, rhs);
            std::copy(rhs.begin(), rhs.end(), weights.row(c));
        }
    } else {
        // With shrinkage the regularized covariance is alpha I + beta Z^T Z;
        // solve through the n x n dual system (Woodbury), which stays cheap
        // when d greatly exceeds n. A zero trace degenerates to a pure ridge.
        const double alpha = gamma * (sigma_bar > 0.0 ? sigma_bar : 1.0);
        if (beta == 0.0) {
            for (std::size_t c = 0; c < nc; ++c) {
                const double* mu = means.row(c);
                double* wc = weights.row(c);
                for (std::size_t j = 0; j < d; ++j) wc[j] = mu[j] / alpha;
            }
        } else {
            Matrix m(n, n);  // (1/beta) I + (1/alpha) Z Z^T
            parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    for (std::size_t k = 0; k <= i; ++k)
                        m.at(i, k) = dot(centered.row(i), centered.row(k), d) / alpha;
                    m.at(i, i) += 1.0 / beta;
                }
            });
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = i + 1; k < n; ++k) m.at(i, k) = m.at(k, i);
            if (!cholesky(m))
                throw NumericError("lda: covariance factorization failed");
            for (std::size_t c = 0; c < nc; ++c) {
                const double* mu = means.row(c);
                std::vector<double> t(n);
                for (std::size_t i = 0; i < n; ++i)
                    t[i] = dot(centered.row(i), mu, d);
                cholesky_solve(m, t);
                double* wc = weights.row(c);
                std::fill(wc, wc + d, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double* zi = centered.row(i);
                    double ti = t[i];
                    if (ti == 0.0) continue;
                    for (std::size_t j = 0; j < d; ++j) wc[j] += ti * zi[j];
                }
                for (std::size_t j = 0; j < d; ++j)
                    wc[j] = (mu[j] - wc[j] / alpha) / alpha;
            }
        }
    }

    LdaModel model;
    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = d;
    model.classes = classes;
    model.log_priors.resize(nc);
    model.biases.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        model.log_priors[c] = std::log(counts[c] / static_cast<double>(n));
        model.biases[c] =
            -0.5 * dot(means.row(c), weights.row(c), d) + model.log_priors[c];
    }
    model.means = std::move(means);
    model.weights = std::move(weights);
    model.shrinkage = shrinkage;
    return model;
}

}  // namespace maskbench
