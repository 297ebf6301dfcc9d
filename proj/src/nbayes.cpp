#include <algorithm>
#include <cmath>

#include "maskbench/classifiers.hpp"

namespace maskbench {

NbModel train_nb(const LabeledDataset& ds, double var_smoothing) {
    ds.validate();
    if (var_smoothing < 0.0) throw ConfigError("nb: var_smoothing must be >= 0");

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
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t j = 0; j < d; ++j) means.at(c, j) /= counts[c];

    // Population variances, per class and overall (two-pass for stability).
    Matrix variances(nc, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = ds.features.row(i);
        std::size_t c = static_cast<std::size_t>(yidx[i]);
        const double* mu = means.row(c);
        double* var = variances.row(c);
        for (std::size_t j = 0; j < d; ++j) {
            double diff = xi[j] - mu[j];
            var[j] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t j = 0; j < d; ++j) variances.at(c, j) /= counts[c];

    std::vector<double> overall_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = ds.features.row(i);
        for (std::size_t j = 0; j < d; ++j) overall_mean[j] += xi[j];
    }
    for (std::size_t j = 0; j < d; ++j) overall_mean[j] /= static_cast<double>(n);
    double max_overall_var = 0.0;
    {
        std::vector<double> acc(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = ds.features.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                double diff = xi[j] - overall_mean[j];
                acc[j] += diff * diff;
            }
        }
        for (std::size_t j = 0; j < d; ++j)
            max_overall_var = std::max(max_overall_var, acc[j] / static_cast<double>(n));
    }

    // Variance floor; when the data is entirely constant fall back to the
    // smoothing value itself so densities stay finite.
    double eps = var_smoothing * max_overall_var;
    if (eps <= 0.0) eps = var_smoothing > 0.0 ? var_smoothing : 1e-300;
    for (double& v : variances.data) v = std::max(v, eps);

    NbModel model;
    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = d;
    model.classes = classes;
    model.means = std::move(means);
    model.variances = std::move(variances);
    model.log_priors.resize(nc);
    for (std::size_t c = 0; c < nc; ++c)
        model.log_priors[c] = std::log(counts[c] / static_cast<double>(n));
    model.var_smoothing = var_smoothing;
    return model;
}

}  // namespace maskbench
