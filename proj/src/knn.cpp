#include <algorithm>
#include <cmath>

#include "maskbench/classifiers.hpp"

namespace maskbench {

KnnModel train_knn(const LabeledDataset& ds, int k, KnnMetric metric) {
    ds.validate();
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    if (static_cast<std::size_t>(k) > ds.features.rows)
        throw ConfigError("knn: k = " + std::to_string(k) + " exceeds sample count " +
                          std::to_string(ds.features.rows));
    KnnModel model;
    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = ds.features.cols;
    model.classes = ds.distinct_classes();
    model.features = ds.features;
    model.labels = ds.labels;
    model.k = k;
    model.metric = metric;
    return model;
}

namespace {

double squared_euclidean(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        double d0 = a[i] - b[i];
        double d1 = a[i + 1] - b[i + 1];
        s0 += d0 * d0;
        s1 += d1 * d1;
    }
    for (; i < n; ++i) {
        double d0 = a[i] - b[i];
        s0 += d0 * d0;
    }
    return s0 + s1;
}

// Chi-square histogram distance; empty-bin pairs contribute nothing.
double chi_square(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = a[i] + b[i];
        if (sum <= 0.0) continue;
        double diff = a[i] - b[i];
        s += diff * diff / sum;
    }
    return s;
}

}  // namespace

int predict(const KnnModel& m, const double* x, std::size_t dim) {
    if (m.dim != dim)
        throw ConfigError("knn: input dimension " + std::to_string(dim) +
                          " does not match model dimension " + std::to_string(m.dim));
    const std::size_t n = m.features.rows;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ti = m.features.row(i);
        double d = m.metric == KnnMetric::Euclidean ? squared_euclidean(x, ti, dim)
                                                    : chi_square(x, ti, dim);
        dist[i] = {d, i};
    }
    // Distance ties break toward the lower stored ordinal.
    std::size_t k = static_cast<std::size_t>(m.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());

    std::vector<int> votes(m.classes.size(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        int label = m.labels[dist[i].second];
        auto it = std::lower_bound(m.classes.begin(), m.classes.end(), label);
        votes[static_cast<std::size_t>(it - m.classes.begin())]++;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return m.classes[best];
}

}  // namespace maskbench
