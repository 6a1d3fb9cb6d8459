#pragma once

// Weighted partition sets over ordered class labels and the structured
// cross-entropy built on them, including its derivatives with respect to
// pre-softmax scores.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presto/core.hpp"

namespace presto {

/// A set of partitions of {0, ..., k-1} with positive weights summing to one.
class WeightedPartitionSet {
public:
    using Block = std::vector<int>;
    using Partition = std::vector<Block>;

    WeightedPartitionSet() = default;

    WeightedPartitionSet(int num_classes, std::vector<Partition> partitions, std::vector<double> weights)
        : num_classes_(num_classes), partitions_(std::move(partitions)), weights_(std::move(weights)) {
        if (num_classes_ < 1) {
            throw ConfigError("a partition set needs at least one class");
        }
        if (partitions_.empty() || partitions_.size() != weights_.size()) {
            throw ConfigError("partition set needs one weight per partition and at least one partition");
        }
        double total = 0.0;
        for (const double w : weights_) {
            if (!(w > 0.0)) {
                throw ConfigError("partition weights must be positive");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw ConfigError("partition weights sum to " + std::to_string(total) + ", not 1");
        }
        block_of_.assign(partitions_.size(), std::vector<int>(static_cast<std::size_t>(num_classes_), -1));
        for (std::size_t p = 0; p < partitions_.size(); ++p) {
            for (std::size_t b = 0; b < partitions_[p].size(); ++b) {
                if (partitions_[p][b].empty()) {
                    throw ConfigError("partition " + std::to_string(p) + " has an empty block");
                }
                for (const int c : partitions_[p][b]) {
                    if (c < 0 || c >= num_classes_) {
                        throw ConfigError("partition " + std::to_string(p) + " names class " + std::to_string(c) +
                                          " outside [0, " + std::to_string(num_classes_) + ")");
                    }
                    auto& slot = block_of_[p][static_cast<std::size_t>(c)];
                    if (slot != -1) {
                        throw ConfigError("partition " + std::to_string(p) + " places class " + std::to_string(c) +
                                          " in two blocks");
                    }
                    slot = static_cast<int>(b);
                }
            }
            for (int c = 0; c < num_classes_; ++c) {
                if (block_of_[p][static_cast<std::size_t>(c)] == -1) {
                    throw ConfigError("partition " + std::to_string(p) + " does not cover class " + std::to_string(c));
                }
            }
        }
    }

    /// The single partition into singletons, weight 1.
    static WeightedPartitionSet singletons(int num_classes) {
        Partition p;
        for (int c = 0; c < num_classes; ++c) {
            p.push_back({c});
        }
        return WeightedPartitionSet(num_classes, {p}, {1.0});
    }

    int num_classes() const { return num_classes_; }
    std::size_t size() const { return partitions_.size(); }
    const std::vector<Partition>& partitions() const { return partitions_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Block index of `cls` within partition `p`.
    int block_of(std::size_t p, int cls) const { return block_of_[p][static_cast<std::size_t>(cls)]; }

    const Block& block(std::size_t p, int cls) const {
        return partitions_[p][static_cast<std::size_t>(block_of(p, cls))];
    }

    /// True when every block of every partition is a single class, so the
    /// loss coincides with standard cross-entropy.
    bool is_singleton_only() const {
        for (const auto& p : partitions_) {
            if (static_cast<int>(p.size()) != num_classes_) {
                return false;
            }
        }
        return true;
    }

private:
    int num_classes_ = 0;
    std::vector<Partition> partitions_;
    std::vector<double> weights_;
    std::vector<std::vector<int>> block_of_;
};

/// Singleton partition with weight `singleton_weight` plus the `block_size`
/// phase-shifted groupings of consecutive classes, each weighted
/// (1 - singleton_weight) / block_size. Shift j >= 2 starts with a leading
/// block of j - 1 classes, then runs of `block_size`, with a ragged tail.
inline WeightedPartitionSet standard_ordinal_partition(int num_classes, double singleton_weight, int block_size) {
    if (num_classes < 2) {
        throw ConfigError("ordinal partition needs at least 2 classes");
    }
    if (!(singleton_weight > 0.0 && singleton_weight < 1.0)) {
        throw ConfigError("singleton weight must lie in (0, 1)");
    }
    // Block size 1 only repeats the singleton partition, so it is accepted for
    // any k even though it breaks s < k/2 when k <= 2.
    if (block_size < 1 || (block_size > 1 && 2 * block_size >= num_classes)) {
        throw ConfigError("block size " + std::to_string(block_size) + " must satisfy 1 <= s < k/2 for k = " +
                          std::to_string(num_classes));
    }
    using Block = WeightedPartitionSet::Block;
    using Partition = WeightedPartitionSet::Partition;

    std::vector<Partition> partitions;
    std::vector<double> weights;

    Partition singles;
    for (int c = 0; c < num_classes; ++c) {
        singles.push_back({c});
    }
    partitions.push_back(std::move(singles));
    weights.push_back(singleton_weight);

    const double shifted_weight = (1.0 - singleton_weight) / block_size;
    for (int shift = 1; shift <= block_size; ++shift) {
        Partition p;
        int next = 0;
        if (shift >= 2) {
            Block lead;
            for (; next < shift - 1; ++next) {
                lead.push_back(next);
            }
            p.push_back(std::move(lead));
        }
        while (next < num_classes) {
            Block run;
            for (int i = 0; i < block_size && next < num_classes; ++i, ++next) {
                run.push_back(next);
            }
            p.push_back(std::move(run));
        }
        partitions.push_back(std::move(p));
        weights.push_back(shifted_weight);
    }
    return WeightedPartitionSet(num_classes, std::move(partitions), std::move(weights));
}

/// Default block size for k classes: round(sqrt(k)), clamped to s < k/2 and s >= 1.
inline int default_block_size(int num_classes) {
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_classes))));
    while (s > 1 && 2 * s >= num_classes) {
        --s;
    }
    return std::max(s, 1);
}

/// Partition set used by the structured variant for k bins.
inline WeightedPartitionSet ordinal_partition_for(int num_classes, double singleton_weight,
                                                  std::optional<int> block_size = std::nullopt) {
    if (num_classes < 2) {
        return WeightedPartitionSet::singletons(std::max(num_classes, 1));
    }
    int s = block_size ? *block_size : default_block_size(num_classes);
    while (s > 1 && 2 * s >= num_classes) {
        --s;
    }
    return standard_ordinal_partition(num_classes, singleton_weight, std::max(s, 1));
}

/// Weighted sum over partitions of -log(probability of the true class's block).
/// A zero block probability yields +inf.
inline double structured_ce(std::span<const double> probs, int true_class, const WeightedPartitionSet& wps) {
    if (static_cast<int>(probs.size()) != wps.num_classes()) {
        throw ConfigError("probability vector length does not match the partition set");
    }
    if (true_class < 0 || true_class >= wps.num_classes()) {
        throw ConfigError("true class " + std::to_string(true_class) + " out of range");
    }
    double loss = 0.0;
    for (std::size_t p = 0; p < wps.size(); ++p) {
        double block_prob = 0.0;
        for (const int j : wps.block(p, true_class)) {
            block_prob += probs[static_cast<std::size_t>(j)];
        }
        if (!(block_prob > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        loss -= wps.weights()[p] * std::log(block_prob);
    }
    return loss;
}

/// Numerically stable softmax.
inline void softmax(std::span<const double> scores, std::span<double> out) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - top);
        total += out[i];
    }
    for (auto& v : out) {
        v /= total;
    }
}

inline std::vector<double> softmax(std::span<const double> scores) {
    std::vector<double> out(scores.size());
    softmax(scores, out);
    return out;
}

/// Gradient and diagonal Hessian of structured_ce(softmax(scores)) with
/// respect to the scores.
///
/// For one partition with true block B and P = sum_{j in B} p_j, the term
/// -log P has gradient p_m - [m in B] p_m / P and second derivative
/// p_m (1 - p_m) - [m in B] q (1 - q), q = p_m / P. The weighted sum of these
/// is written into `grad` and `hess`; `probs` receives softmax(scores).
inline void structured_ce_grad_hess(std::span<const double> scores, int true_class, const WeightedPartitionSet& wps,
                                    std::span<double> grad, std::span<double> hess, std::span<double> probs) {
    const std::size_t k = scores.size();
    softmax(scores, probs);
    for (std::size_t m = 0; m < k; ++m) {
        grad[m] = probs[m];
        hess[m] = probs[m] * (1.0 - probs[m]);
    }
    for (std::size_t p = 0; p < wps.size(); ++p) {
        const double w = wps.weights()[p];
        const auto& block = wps.block(p, true_class);
        double block_prob = 0.0;
        for (const int j : block) {
            block_prob += probs[static_cast<std::size_t>(j)];
        }
        if (!(block_prob > 0.0)) {
            block_prob = std::numeric_limits<double>::min();
        }
        for (const int j : block) {
            const auto m = static_cast<std::size_t>(j);
            const double q = std::min(probs[m] / block_prob, 1.0);
            grad[m] -= w * q;
            hess[m] -= w * q * (1.0 - q);
        }
    }
}

struct GradHess {
    std::vector<double> gradient;
    std::vector<double> hessian;
};

inline GradHess structured_ce_grad_hess(std::span<const double> scores, int true_class,
                                        const WeightedPartitionSet& wps) {
    if (static_cast<int>(scores.size()) != wps.num_classes()) {
        throw ConfigError("score vector length does not match the partition set");
    }
    if (true_class < 0 || true_class >= wps.num_classes()) {
        throw ConfigError("true class " + std::to_string(true_class) + " out of range");
    }
    GradHess out{std::vector<double>(scores.size()), std::vector<double>(scores.size())};
    std::vector<double> probs(scores.size());
    structured_ce_grad_hess(scores, true_class, wps, out.gradient, out.hessian, probs);
    return out;
}

}  // namespace presto
