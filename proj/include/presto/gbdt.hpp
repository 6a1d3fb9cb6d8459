#pragma once

// Multi-class gradient-boosted decision trees with a pluggable cross-entropy
// loss (standard or structured). One regression tree per class per round,
// histogram split finding, second-order leaf values and early stopping on a
// validation fold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presto/core.hpp"
#include "presto/structured_loss.hpp"

namespace presto {

/// Per-row curvature handed to the tree builder under the structured loss.
/// `exact` is the true diagonal, which turns negative whenever a block
/// dominates; `bound` drops the concave within-block part and uses
/// p(1 - p), an upper bound on that diagonal, so Newton steps stay damped.
enum class StructuredCurvature { bound, exact };

inline std::string to_string(StructuredCurvature c) { return c == StructuredCurvature::bound ? "bound" : "exact"; }

inline StructuredCurvature structured_curvature_from_string(const std::string& name) {
    if (name == "bound") return StructuredCurvature::bound;
    if (name == "exact") return StructuredCurvature::exact;
    throw ConfigError("unknown structured_curvature '" + name + "' (expected bound or exact)");
}

struct GbdtConfig {
    int num_classes = 2;
    double learning_rate = 0.1;
    int max_depth = 5;
    int max_trees = 1000;
    /// Patience in rounds; nullopt trains exactly max_trees rounds.
    std::optional<int> early_stopping_rounds = 25;
    int min_samples_leaf = 5;
    double colsample_per_node = 1.0;
    double lambda = 1.0;
    double min_split_gain = 0.0;
    int max_bins = 256;
    /// Pseudo-count added to every class when computing the initial log-priors.
    /// Zero makes an unobserved class an error.
    double prior_pseudocount = 0.0;
    /// Structured cross-entropy partitions; nullopt selects standard cross-entropy.
    std::optional<WeightedPartitionSet> structured_partitions;
    StructuredCurvature structured_curvature = StructuredCurvature::bound;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
        if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
        if (max_trees < 1) throw ConfigError("max_trees must be >= 1");
        if (early_stopping_rounds && *early_stopping_rounds < 1) {
            throw ConfigError("early_stopping_rounds must be >= 1");
        }
        if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
        if (!(colsample_per_node > 0.0 && colsample_per_node <= 1.0)) {
            throw ConfigError("colsample_per_node must lie in (0, 1]");
        }
        if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
        if (!(min_split_gain >= 0.0)) throw ConfigError("min_split_gain must be >= 0");
        if (max_bins < 2 || max_bins > 65535) throw ConfigError("max_bins must lie in [2, 65535]");
        if (!(prior_pseudocount >= 0.0)) throw ConfigError("prior_pseudocount must be >= 0");
        if (structured_partitions && structured_partitions->num_classes() != num_classes) {
            throw ConfigError("structured partition set covers " +
                              std::to_string(structured_partitions->num_classes()) + " classes, forest has " +
                              std::to_string(num_classes));
        }
    }
};

/// Leaf Hessian sums are floored at this value before any division.
inline constexpr double kHessianFloor = 1e-6;

// ---------------------------------------------------------------------------
// Feature binning
// ---------------------------------------------------------------------------

/// Per-feature cut points. Bin b of a feature holds values in
/// [cuts[b-1], cuts[b]); the slot after the last regular bin holds NaN.
class FeatureBinner {
public:
    FeatureBinner() = default;

    FeatureBinner(const FeatureMatrix& x, int max_bins) {
        cuts_.resize(x.cols());
        std::vector<double> column;
        for (std::size_t f = 0; f < x.cols(); ++f) {
            column.clear();
            for (std::size_t i = 0; i < x.rows(); ++i) {
                const double v = x(i, f);
                if (!std::isnan(v)) {
                    column.push_back(v);
                }
            }
            cuts_[f] = make_cuts(std::move(column), static_cast<std::size_t>(max_bins));
        }
    }

    std::size_t num_features() const { return cuts_.size(); }
    const std::vector<double>& cuts(std::size_t feature) const { return cuts_[feature]; }

    /// Regular bins for a feature (the missing slot excluded).
    std::size_t regular_bins(std::size_t feature) const { return cuts_[feature].size() + 1; }
    std::size_t missing_bin(std::size_t feature) const { return cuts_[feature].size() + 1; }

    std::uint16_t bin(std::size_t feature, double x) const {
        if (std::isnan(x)) {
            return static_cast<std::uint16_t>(missing_bin(feature));
        }
        const auto& c = cuts_[feature];
        return static_cast<std::uint16_t>(std::upper_bound(c.begin(), c.end(), x) - c.begin());
    }

private:
    static std::vector<double> make_cuts(std::vector<double> values, std::size_t max_bins) {
        std::sort(values.begin(), values.end());
        std::vector<double> uniques;
        std::vector<std::size_t> counts;
        for (const double v : values) {
            if (uniques.empty() || uniques.back() != v) {
                uniques.push_back(v);
                counts.push_back(0);
            }
            ++counts.back();
        }
        std::vector<double> cuts;
        if (uniques.size() <= max_bins) {
            for (std::size_t i = 0; i + 1 < uniques.size(); ++i) {
                cuts.push_back(midpoint(uniques[i], uniques[i + 1]));
            }
            return cuts;
        }
        // Equal-frequency cuts placed between distinct values.
        const double per_bin = static_cast<double>(values.size()) / static_cast<double>(max_bins);
        double seen = 0.0;
        double next_boundary = per_bin;
        for (std::size_t i = 0; i + 1 < uniques.size() && cuts.size() + 1 < max_bins; ++i) {
            seen += static_cast<double>(counts[i]);
            if (seen >= next_boundary) {
                cuts.push_back(midpoint(uniques[i], uniques[i + 1]));
                while (next_boundary <= seen) {
                    next_boundary += per_bin;
                }
            }
        }
        return cuts;
    }

    static double midpoint(double a, double b) {
        const double m = a + 0.5 * (b - a);
        // Keep a < cut <= b so that `x < cut` separates the two values.
        return m > a ? m : b;
    }

    std::vector<std::vector<double>> cuts_;
};

/// Column-major bin indices of a feature matrix under a FeatureBinner.
class BinnedMatrix {
public:
    BinnedMatrix(const FeatureMatrix& x, const FeatureBinner& binner)
        : rows_(x.rows()), cols_(x.cols()), bins_(x.rows() * x.cols()) {
        for (std::size_t f = 0; f < cols_; ++f) {
            for (std::size_t i = 0; i < rows_; ++i) {
                bins_[f * rows_ + i] = binner.bin(f, x(i, f));
            }
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const std::uint16_t> column(std::size_t f) const { return {bins_.data() + f * rows_, rows_}; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint16_t> bins_;
};

// ---------------------------------------------------------------------------
// Histograms and split search
// ---------------------------------------------------------------------------

struct GradStats {
    double grad = 0.0;
    double hess = 0.0;
    std::size_t count = 0;

    GradStats& operator+=(const GradStats& o) {
        grad += o.grad;
        hess += o.hess;
        count += o.count;
        return *this;
    }
    GradStats& operator-=(const GradStats& o) {
        grad -= o.grad;
        hess -= o.hess;
        count -= o.count;
        return *this;
    }
    friend GradStats operator+(GradStats a, const GradStats& b) { return a += b; }
    friend GradStats operator-(GradStats a, const GradStats& b) { return a -= b; }
};

/// Structure score G^2 / (max(H, floor) + lambda).
inline double leaf_score(const GradStats& s, double lambda) {
    return s.grad * s.grad / (std::max(s.hess, kHessianFloor) + lambda);
}

inline double leaf_weight(const GradStats& s, double lambda) {
    return -s.grad / (std::max(s.hess, kHessianFloor) + lambda);
}

/// Gradient statistics per (feature, bin), including each feature's missing slot.
class Histogram {
public:
    explicit Histogram(const FeatureBinner& binner) {
        offsets_.resize(binner.num_features() + 1, 0);
        for (std::size_t f = 0; f < binner.num_features(); ++f) {
            offsets_[f + 1] = offsets_[f] + binner.regular_bins(f) + 1;
        }
        cells_.resize(offsets_.back());
    }

    void accumulate(const BinnedMatrix& data, std::span<const std::size_t> rows, std::span<const double> grad,
                    std::span<const double> hess) {
        std::fill(cells_.begin(), cells_.end(), GradStats{});
        for (std::size_t f = 0; f + 1 < offsets_.size(); ++f) {
            const auto col = data.column(f);
            GradStats* cells = cells_.data() + offsets_[f];
            for (const auto r : rows) {
                auto& cell = cells[col[r]];
                cell.grad += grad[r];
                cell.hess += hess[r];
                ++cell.count;
            }
        }
    }

    void subtract_from(const Histogram& parent, const Histogram& sibling) {
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            cells_[i] = parent.cells_[i] - sibling.cells_[i];
        }
    }

    std::span<const GradStats> feature(std::size_t f) const {
        return {cells_.data() + offsets_[f], offsets_[f + 1] - offsets_[f]};
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<GradStats> cells_;
};

struct SplitParams {
    double lambda = 1.0;
    std::size_t min_samples_leaf = 1;
    double min_split_gain = 0.0;
};

struct SplitCandidate {
    bool valid = false;
    std::size_t feature = 0;
    /// Rows whose regular bin is <= last_left_bin go left.
    std::size_t last_left_bin = 0;
    double threshold = 0.0;
    bool default_left = false;
    double gain = 0.0;
    GradStats left;
    GradStats right;
};

/// Best split of a node over the given features. Ties keep the earliest
/// (feature, bin) candidate in scan order.
inline SplitCandidate find_best_split(const Histogram& hist, const FeatureBinner& binner, const GradStats& total,
                                      std::span<const std::size_t> features, const SplitParams& params) {
    SplitCandidate best;
    const double parent_score = leaf_score(total, params.lambda);
    auto consider = [&](std::size_t f, std::size_t b, const GradStats& left, const GradStats& right,
                        bool default_left) {
        if (left.count < params.min_samples_leaf || right.count < params.min_samples_leaf) {
            return;
        }
        const double gain =
            0.5 * (leaf_score(left, params.lambda) + leaf_score(right, params.lambda) - parent_score);
        if (gain > params.min_split_gain && (!best.valid || gain > best.gain)) {
            best = SplitCandidate{true, f, b, binner.cuts(f)[b], default_left, gain, left, right};
        }
    };
    for (const auto f : features) {
        const auto cells = hist.feature(f);
        const std::size_t regular = binner.regular_bins(f);
        const GradStats missing = cells[regular];
        const GradStats present = total - missing;
        GradStats left;
        for (std::size_t b = 0; b + 1 < regular; ++b) {
            left += cells[b];
            const GradStats right = present - left;
            if (missing.count == 0) {
                consider(f, b, left, right, left.count >= right.count);
            } else {
                consider(f, b, left, right + missing, false);
                consider(f, b, left + missing, right, true);
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Trees and forests
// ---------------------------------------------------------------------------

/// Axis-aligned regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
    struct Node {
        int feature = -1;  ///< -1 marks a leaf
        double threshold = 0.0;
        bool default_left = false;
        int left = -1;
        int right = -1;
        double value = 0.0;

        bool is_leaf() const { return feature < 0; }
    };

    std::vector<Node> nodes;

    double predict(std::span<const double> row) const {
        int i = 0;
        for (;;) {
            const Node& n = nodes[static_cast<std::size_t>(i)];
            if (n.is_leaf()) {
                return n.value;
            }
            const double x = row[static_cast<std::size_t>(n.feature)];
            const bool go_left = std::isnan(x) ? n.default_left : x < n.threshold;
            i = go_left ? n.left : n.right;
        }
    }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) {
            return n.is_leaf();
        }));
    }
};

/// A trained multi-class boosted ensemble: round r, class c uses tree r*k + c.
class BoostedForest {
public:
    BoostedForest() = default;

    BoostedForest(int num_classes, std::size_t num_features, std::vector<double> base_scores,
                  std::vector<RegressionTree> trees)
        : num_classes_(num_classes),
          num_features_(num_features),
          base_scores_(std::move(base_scores)),
          trees_(std::move(trees)) {
        if (num_classes_ < 1 || base_scores_.size() != static_cast<std::size_t>(num_classes_)) {
            throw DataError("forest base scores do not match the class count");
        }
        if (trees_.size() % static_cast<std::size_t>(num_classes_) != 0) {
            throw DataError("forest tree count is not a multiple of the class count");
        }
    }

    int num_classes() const { return num_classes_; }
    std::size_t num_features() const { return num_features_; }
    std::size_t rounds() const { return trees_.size() / static_cast<std::size_t>(num_classes_); }
    const std::vector<double>& base_scores() const { return base_scores_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }

    /// Raw scores using the first `rounds` rounds (all by default).
    void predict_scores(std::span<const double> row, std::span<double> out,
                        std::optional<std::size_t> rounds = std::nullopt) const {
        const auto k = static_cast<std::size_t>(num_classes_);
        const std::size_t limit = std::min(rounds.value_or(this->rounds()), this->rounds());
        std::copy(base_scores_.begin(), base_scores_.end(), out.begin());
        for (std::size_t r = 0; r < limit; ++r) {
            for (std::size_t c = 0; c < k; ++c) {
                out[c] += trees_[r * k + c].predict(row);
            }
        }
    }

    std::vector<double> predict_proba_row(std::span<const double> row,
                                          std::optional<std::size_t> rounds = std::nullopt) const {
        if (row.size() != num_features_) {
            throw DataError("row has " + std::to_string(row.size()) + " features, forest expects " +
                            std::to_string(num_features_));
        }
        std::vector<double> scores(static_cast<std::size_t>(num_classes_));
        predict_scores(row, scores, rounds);
        return softmax(scores);
    }

    /// One probability vector per row of x.
    std::vector<std::vector<double>> predict_proba(const FeatureMatrix& x,
                                                   std::optional<std::size_t> rounds = std::nullopt) const {
        if (x.rows() > 0 && x.cols() != num_features_) {
            throw DataError("input has " + std::to_string(x.cols()) + " features, forest expects " +
                            std::to_string(num_features_));
        }
        std::vector<std::vector<double>> out;
        out.reserve(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out.push_back(predict_proba_row(x.row(i), rounds));
        }
        return out;
    }

    friend bool operator==(const BoostedForest& a, const BoostedForest& b) {
        if (a.num_classes_ != b.num_classes_ || a.num_features_ != b.num_features_ ||
            a.base_scores_ != b.base_scores_ || a.trees_.size() != b.trees_.size()) {
            return false;
        }
        for (std::size_t t = 0; t < a.trees_.size(); ++t) {
            const auto& x = a.trees_[t].nodes;
            const auto& y = b.trees_[t].nodes;
            if (x.size() != y.size()) return false;
            for (std::size_t n = 0; n < x.size(); ++n) {
                if (x[n].feature != y[n].feature || x[n].threshold != y[n].threshold ||
                    x[n].default_left != y[n].default_left || x[n].left != y[n].left || x[n].right != y[n].right ||
                    x[n].value != y[n].value) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    int num_classes_ = 1;
    std::size_t num_features_ = 0;
    std::vector<double> base_scores_{0.0};
    std::vector<RegressionTree> trees_;
};

/// Per-round losses recorded during fit. Index r is the loss after r rounds.
struct TrainingTrace {
    std::vector<double> train_loss;  ///< configured loss on the training fold
    std::vector<double> valid_loss;  ///< standard cross-entropy on the validation fold
    /// Round with the lowest validation loss (the last round without validation data).
    std::size_t best_round = 0;
};

struct FitResult {
    BoostedForest forest;
    TrainingTrace trace;
};

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const BinnedMatrix& data, const FeatureBinner& binner, const GbdtConfig& config, Rng& rng)
        : data_(data), binner_(binner), config_(config), rng_(rng) {
        params_.lambda = config.lambda;
        params_.min_samples_leaf = static_cast<std::size_t>(config.min_samples_leaf);
        params_.min_split_gain = config.min_split_gain;
        const std::size_t f = binner.num_features();
        features_per_node_ = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(config.colsample_per_node * static_cast<double>(f))));
        features_per_node_ = std::min(features_per_node_, f);
    }

    /// Grows one tree on (grad, hess); adds scaled leaf values into `scores`
    /// at stride `stride` (the class offset is applied by the caller).
    RegressionTree build(std::span<const double> grad, std::span<const double> hess, std::span<double> scores,
                         std::size_t stride) {
        grad_ = grad;
        hess_ = hess;
        rows_.resize(data_.rows());
        std::iota(rows_.begin(), rows_.end(), std::size_t{0});
        scratch_.resize(rows_.size());
        RegressionTree tree;
        tree.nodes.emplace_back();
        Histogram root(binner_);
        root.accumulate(data_, rows_, grad_, hess_);
        GradStats total;
        for (const auto r : rows_) {
            total.grad += grad_[r];
            total.hess += hess_[r];
        }
        total.count = rows_.size();
        grow(tree, 0, 0, rows_.size(), 0, total, std::move(root));
        for (const auto& leaf : leaves_) {
            for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
                scores[rows_[i] * stride] += leaf.value;
            }
        }
        leaves_.clear();
        return tree;
    }

private:
    struct LeafRange {
        std::size_t begin;
        std::size_t end;
        double value;
    };

    std::vector<std::size_t> sample_features() {
        const std::size_t f = binner_.num_features();
        if (features_per_node_ >= f) {
            std::vector<std::size_t> all(f);
            std::iota(all.begin(), all.end(), std::size_t{0});
            return all;
        }
        auto picked = rng_.sample_without_replacement(f, features_per_node_);
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    void make_leaf(RegressionTree& tree, int node, std::size_t begin, std::size_t end, const GradStats& stats) {
        const double value = config_.learning_rate * leaf_weight(stats, config_.lambda);
        tree.nodes[static_cast<std::size_t>(node)].value = value;
        leaves_.push_back({begin, end, value});
    }

    void grow(RegressionTree& tree, int node, std::size_t begin, std::size_t end, int depth, const GradStats& stats,
              Histogram hist) {
        if (depth >= config_.max_depth || end - begin < 2 * params_.min_samples_leaf) {
            make_leaf(tree, node, begin, end, stats);
            return;
        }
        const auto features = sample_features();
        const SplitCandidate split = find_best_split(hist, binner_, stats, features, params_);
        if (!split.valid) {
            make_leaf(tree, node, begin, end, stats);
            return;
        }
        // Stable partition of rows_[begin, end) into left then right.
        const auto col = data_.column(split.feature);
        const std::size_t missing_bin = binner_.missing_bin(split.feature);
        std::size_t nl = 0;
        std::size_t nr = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = rows_[i];
            const std::size_t b = col[r];
            const bool left = b == missing_bin ? split.default_left : b <= split.last_left_bin;
            if (left) {
                rows_[begin + nl++] = r;
            } else {
                scratch_[nr++] = r;
            }
        }
        std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(nr),
                  rows_.begin() + static_cast<std::ptrdiff_t>(begin + nl));
        const std::size_t mid = begin + nl;

        auto& n = tree.nodes[static_cast<std::size_t>(node)];
        n.feature = static_cast<int>(split.feature);
        n.threshold = split.threshold;
        n.default_left = split.default_left;
        const int left_id = static_cast<int>(tree.nodes.size());
        const int right_id = left_id + 1;
        n.left = left_id;
        n.right = right_id;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();

        // Histogram of the smaller child directly, the larger by subtraction.
        Histogram small(binner_);
        Histogram large(binner_);
        const bool left_smaller = nl <= nr;
        const std::span<const std::size_t> small_rows =
            left_smaller ? std::span<const std::size_t>(rows_.data() + begin, nl)
                         : std::span<const std::size_t>(rows_.data() + mid, nr);
        small.accumulate(data_, small_rows, grad_, hess_);
        large.subtract_from(hist, small);

        if (left_smaller) {
            grow(tree, left_id, begin, mid, depth + 1, split.left, std::move(small));
            grow(tree, right_id, mid, end, depth + 1, split.right, std::move(large));
        } else {
            grow(tree, left_id, begin, mid, depth + 1, split.left, std::move(large));
            grow(tree, right_id, mid, end, depth + 1, split.right, std::move(small));
        }
    }

    const BinnedMatrix& data_;
    const FeatureBinner& binner_;
    const GbdtConfig& config_;
    Rng& rng_;
    SplitParams params_;
    std::size_t features_per_node_ = 1;
    std::span<const double> grad_;
    std::span<const double> hess_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> scratch_;
    std::vector<LeafRange> leaves_;
};

inline void check_features(const FeatureMatrix& x, const char* what) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double v = x(i, j);
            if (std::isinf(v)) {
                throw DataError(std::string(what) + " feature (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") is infinite");
            }
        }
    }
}

inline void check_labels(std::span<const int> y, int num_classes, const char* what) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= num_classes) {
            throw DataError(std::string(what) + " label " + std::to_string(y[i]) + " at row " + std::to_string(i) +
                            " is outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

/// Mean standard cross-entropy of labels under row-major raw scores.
inline double mean_cross_entropy(std::span<const double> scores, std::span<const int> labels, std::size_t k) {
    if (labels.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double* s = scores.data() + i * k;
        const double top = *std::max_element(s, s + k);
        double z = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            z += std::exp(s[c] - top);
        }
        total += std::log(z) - (s[static_cast<std::size_t>(labels[i])] - top);
    }
    return total / static_cast<double>(labels.size());
}

}  // namespace detail

/// Trains a forest and records per-round losses. With early stopping and a
/// non-empty validation fold, the forest is truncated to the round with the
/// lowest validation cross-entropy (earliest on ties).
inline FitResult fit_with_trace(const FeatureMatrix& x_train, std::span<const int> y_train,
                                const FeatureMatrix& x_valid, std::span<const int> y_valid, const GbdtConfig& config) {
    config.validate();
    const auto k = static_cast<std::size_t>(config.num_classes);
    const std::size_t n = x_train.rows();
    if (n == 0) {
        throw DataError("cannot fit a forest on zero rows");
    }
    if (y_train.size() != n) {
        throw DataError("training features have " + std::to_string(n) + " rows but " +
                        std::to_string(y_train.size()) + " labels");
    }
    if (y_valid.size() != x_valid.rows()) {
        throw DataError("validation features have " + std::to_string(x_valid.rows()) + " rows but " +
                        std::to_string(y_valid.size()) + " labels");
    }
    if (x_valid.rows() > 0 && x_valid.cols() != x_train.cols()) {
        throw DataError("validation features have " + std::to_string(x_valid.cols()) + " columns, training has " +
                        std::to_string(x_train.cols()));
    }
    detail::check_features(x_train, "training");
    detail::check_features(x_valid, "validation");
    detail::check_labels(y_train, config.num_classes, "training");
    detail::check_labels(y_valid, config.num_classes, "validation");

    std::vector<double> counts(k, 0.0);
    for (const int label : y_train) {
        counts[static_cast<std::size_t>(label)] += 1.0;
    }
    std::vector<double> base(k);
    const double alpha = config.prior_pseudocount;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0.0 && alpha == 0.0) {
            throw DataError("class " + std::to_string(c) + " never occurs in the training labels");
        }
        base[c] = std::log((counts[c] + alpha) / (static_cast<double>(n) + static_cast<double>(k) * alpha));
    }

    const FeatureBinner binner(x_train, config.max_bins);
    const BinnedMatrix binned(x_train, binner);
    Rng rng(config.seed);
    detail::TreeBuilder builder(binned, binner, config, rng);

    const bool structured = config.structured_partitions && !config.structured_partitions->is_singleton_only();

    std::vector<double> train_scores(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(base.begin(), base.end(), train_scores.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
    const std::size_t nv = x_valid.rows();
    std::vector<double> valid_scores(nv * k);
    for (std::size_t i = 0; i < nv; ++i) {
        std::copy(base.begin(), base.end(), valid_scores.begin() + static_cast<std::ptrdiff_t>(i * k));
    }

    std::vector<double> grad(n * k);
    std::vector<double> hess(n * k);
    std::vector<double> probs(k);
    std::vector<double> class_grad(n);
    std::vector<double> class_hess(n);

    auto compute_gradients = [&]() {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const double> s(train_scores.data() + i * k, k);
            const std::span<double> g(grad.data() + i * k, k);
            const std::span<double> h(hess.data() + i * k, k);
            const int label = y_train[i];
            if (structured) {
                structured_ce_grad_hess(s, label, *config.structured_partitions, g, h, probs);
                loss += structured_ce(probs, label, *config.structured_partitions);
                if (config.structured_curvature == StructuredCurvature::bound) {
                    for (std::size_t c = 0; c < k; ++c) h[c] = probs[c] * (1.0 - probs[c]);
                }
            } else {
                softmax(s, probs);
                for (std::size_t c = 0; c < k; ++c) {
                    g[c] = probs[c];
                    h[c] = probs[c] * (1.0 - probs[c]);
                }
                g[static_cast<std::size_t>(label)] -= 1.0;
                loss -= std::log(std::max(probs[static_cast<std::size_t>(label)], std::numeric_limits<double>::min()));
            }
        }
        return loss / static_cast<double>(n);
    };

    const bool stopping = config.early_stopping_rounds.has_value() && nv > 0;
    TrainingTrace trace;
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(config.max_trees) * k);
    double best_valid = std::numeric_limits<double>::infinity();
    if (nv > 0) {
        best_valid = detail::mean_cross_entropy(valid_scores, y_valid, k);
        trace.valid_loss.push_back(best_valid);
    }

    for (int round = 1; round <= config.max_trees; ++round) {
        trace.train_loss.push_back(compute_gradients());
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                class_grad[i] = grad[i * k + c];
                class_hess[i] = hess[i * k + c];
            }
            const std::span<double> class_scores(train_scores.data() + c, train_scores.size() - c);
            RegressionTree tree = builder.build(class_grad, class_hess, class_scores, k);
            for (std::size_t i = 0; i < nv; ++i) {
                valid_scores[i * k + c] += tree.predict(x_valid.row(i));
            }
            trees.push_back(std::move(tree));
        }
        if (nv > 0) {
            const double loss = detail::mean_cross_entropy(valid_scores, y_valid, k);
            trace.valid_loss.push_back(loss);
            if (loss < best_valid) {
                best_valid = loss;
                trace.best_round = static_cast<std::size_t>(round);
            }
            if (stopping && static_cast<std::size_t>(round) - trace.best_round >=
                                static_cast<std::size_t>(*config.early_stopping_rounds)) {
                break;
            }
        } else {
            trace.best_round = static_cast<std::size_t>(round);
        }
    }
    trace.train_loss.push_back(compute_gradients());

    if (stopping) {
        trees.resize(trace.best_round * k);
    }
    return {BoostedForest(config.num_classes, x_train.cols(), std::move(base), std::move(trees)), std::move(trace)};
}

inline BoostedForest fit(const FeatureMatrix& x_train, std::span<const int> y_train, const FeatureMatrix& x_valid,
                         std::span<const int> y_valid, const GbdtConfig& config) {
    return fit_with_trace(x_train, y_train, x_valid, y_valid, config).forest;
}

inline std::vector<std::vector<double>> predict_proba(const BoostedForest& forest, const FeatureMatrix& x) {
    return forest.predict_proba(x);
}

}  // namespace presto
