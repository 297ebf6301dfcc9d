#include <algorithm>
#include <cmath>
#include <limits>

#include "maskbench/classifiers.hpp"

namespace maskbench {

namespace {

struct SplitCandidate {
    double weighted_impurity = std::numeric_limits<double>::infinity();
    double threshold = 0.0;
    bool valid = false;
};

// Weighted Gini of a two-way split expressed through class-count sums:
// N_L - S_L/N_L + N_R - S_R/N_R, where S is the sum of squared counts.
double weighted_gini(double n_left, double sq_left, double n_right, double sq_right) {
    return (n_left - sq_left / n_left) + (n_right - sq_right / n_right);
}

class TreeBuilder {
public:
    TreeBuilder(const LabeledDataset& ds, const std::vector<int>& yidx,
                std::size_t num_classes, int min_leaf)
        : x_(ds.features), yidx_(yidx), nc_(num_classes), min_leaf_(min_leaf) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(x_.rows);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        grow(all);
        return std::move(nodes_);
    }

private:
    int make_leaf(const std::vector<std::size_t>& samples) {
        std::vector<int> counts(nc_, 0);
        for (std::size_t i : samples) counts[static_cast<std::size_t>(yidx_[i])]++;
        std::size_t best = 0;
        for (std::size_t c = 1; c < nc_; ++c)
            if (counts[c] > counts[best]) best = c;
        TreeNode leaf;
        leaf.label = static_cast<int>(best);
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size() - 1);
    }

    // Best candidate for one feature: scan midpoints of consecutive distinct
    // sorted values, moving class counts from right to left.
    SplitCandidate scan_feature(const std::vector<std::size_t>& samples,
                                std::size_t feature,
                                std::vector<std::pair<double, int>>& scratch) const {
        scratch.clear();
        for (std::size_t i : samples)
            scratch.emplace_back(x_.at(i, feature), yidx_[i]);
        std::sort(scratch.begin(), scratch.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        SplitCandidate best;
        const double total = static_cast<double>(scratch.size());
        std::vector<double> left(nc_, 0.0), right(nc_, 0.0);
        double sq_left = 0.0, sq_right = 0.0;
        for (const auto& [v, c] : scratch) right[static_cast<std::size_t>(c)] += 1.0;
        for (double c : right) sq_right += c * c;

        double n_left = 0.0;
        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
            double& l = left[static_cast<std::size_t>(scratch[i].second)];
            double& r = right[static_cast<std::size_t>(scratch[i].second)];
            sq_left += 2.0 * l + 1.0;
            sq_right -= 2.0 * r - 1.0;
            l += 1.0;
            r -= 1.0;
            n_left += 1.0;
            if (scratch[i].first == scratch[i + 1].first) continue;
            double w = weighted_gini(n_left, sq_left, total - n_left, sq_right);
            if (w < best.weighted_impurity) {
                best.weighted_impurity = w;
                best.threshold = scratch[i].first +
                                 (scratch[i + 1].first - scratch[i].first) / 2.0;
                best.valid = true;
            }
        }
        return best;
    }

    int grow(const std::vector<std::size_t>& samples) {
        // Stop when pure or when the node is at or below the leaf floor.
        bool pure = true;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (yidx_[samples[i]] != yidx_[samples[0]]) {
                pure = false;
                break;
            }
        if (pure || samples.size() <= static_cast<std::size_t>(min_leaf_))
            return make_leaf(samples);

        // Node impurity in the same weighted form as the split scores.
        std::vector<double> counts(nc_, 0.0);
        for (std::size_t i : samples) counts[static_cast<std::size_t>(yidx_[i])] += 1.0;
        double sq = 0.0;
        for (double c : counts) sq += c * c;
        const double total = static_cast<double>(samples.size());
        const double node_impurity = total - sq / total;

        std::vector<SplitCandidate> per_feature(x_.cols);
        parallel_chunks(x_.cols, [&](std::size_t begin, std::size_t end) {
            std::vector<std::pair<double, int>> scratch;
            scratch.reserve(samples.size());
            for (std::size_t j = begin; j < end; ++j)
                per_feature[j] = scan_feature(samples, j, scratch);
        });

        // Lowest impurity wins; ties go to the lowest feature index and then
        // the lowest threshold (scan order guarantees both).
        std::size_t best_feature = x_.cols;
        SplitCandidate best;
        for (std::size_t j = 0; j < x_.cols; ++j) {
            const SplitCandidate& cand = per_feature[j];
            if (!cand.valid) continue;
            if (cand.weighted_impurity < best.weighted_impurity) {
                best = cand;
                best_feature = j;
            }
        }
        if (best_feature == x_.cols || !(node_impurity - best.weighted_impurity > 0.0))
            return make_leaf(samples);  // feature-exhausted or no usable split

        std::vector<std::size_t> left_samples, right_samples;
        for (std::size_t i : samples) {
            if (x_.at(i, best_feature) <= best.threshold)
                left_samples.push_back(i);
            else
                right_samples.push_back(i);
        }

        TreeNode node;
        node.feature = static_cast<int>(best_feature);
        node.threshold = best.threshold;
        nodes_.push_back(node);
        std::size_t self = nodes_.size() - 1;
        int left = grow(left_samples);
        int right = grow(right_samples);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return static_cast<int>(self);
    }

    const Matrix& x_;
    const std::vector<int>& yidx_;
    std::size_t nc_;
    int min_leaf_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DtModel train_dt(const LabeledDataset& ds, int min_leaf) {
    ds.validate();
    if (min_leaf < 1) throw ConfigError("dt: min_leaf must be >= 1");

    const std::vector<int> classes = ds.distinct_classes();
    std::vector<int> yidx(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), ds.labels[i]);
        yidx[i] = static_cast<int>(it - classes.begin());
    }

    TreeBuilder builder(ds, yidx, classes.size(), min_leaf);
    std::vector<TreeNode> nodes = builder.build();
    // Leaf labels are class indices during building; map them to class ids.
    for (TreeNode& n : nodes)
        if (n.feature < 0) n.label = classes[static_cast<std::size_t>(n.label)];

    DtModel model;
    model.lbp_fingerprint = ds.lbp_fingerprint;
    model.dim = ds.features.cols;
    model.classes = classes;
    model.nodes = std::move(nodes);
    model.min_leaf = min_leaf;
    return model;
}

}  // namespace maskbench
