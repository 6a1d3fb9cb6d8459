#pragma once

// Piecewise-constant densities over a sorted set of bin edges: construction
// from class probabilities, pointwise averaging and the usual queries.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "presto/core.hpp"

namespace presto {

/// Sorted edges b_0 < b_1 < ... < b_k describing k contiguous bins.
class BinPartition {
public:
    BinPartition() = default;

    explicit BinPartition(std::vector<double> edges) : edges_(std::move(edges)) {
        if (edges_.size() < 2) {
            throw ConfigError("a bin partition needs at least 2 edges, got " + std::to_string(edges_.size()));
        }
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            if (!std::isfinite(edges_[i])) {
                throw ConfigError("bin edge " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(edges_[i - 1] < edges_[i])) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "bin edges must be strictly increasing: edge " << i - 1 << " = " << edges_[i - 1]
                    << ", edge " << i << " = " << edges_[i];
                throw ConfigError(msg.str());
            }
        }
    }

    const std::vector<double>& edges() const { return edges_; }
    std::size_t bin_count() const { return edges_.empty() ? 0 : edges_.size() - 1; }
    double lower() const { return edges_.front(); }
    double upper() const { return edges_.back(); }
    double width(std::size_t bin) const { return edges_[bin + 1] - edges_[bin]; }

    /// Bin containing x, with x == upper() mapped to the last bin; nullopt
    /// outside [lower(), upper()].
    std::optional<std::size_t> bin_of(double x) const {
        if (!(x >= edges_.front() && x <= edges_.back())) {
            return std::nullopt;
        }
        if (x == edges_.back()) {
            return bin_count() - 1;
        }
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        return static_cast<std::size_t>(it - edges_.begin()) - 1;
    }

    friend bool operator==(const BinPartition&, const BinPartition&) = default;

private:
    std::vector<double> edges_;
};

/// A pdf that is constant on each bin of a partition and zero outside it.
class PiecewiseConstantDensity {
public:
    PiecewiseConstantDensity() = default;

    /// Builds directly from heights (probability per unit of target).
    PiecewiseConstantDensity(BinPartition partition, std::vector<double> heights)
        : partition_(std::move(partition)), heights_(std::move(heights)) {
        if (heights_.size() != partition_.bin_count()) {
            throw ConfigError("density has " + std::to_string(heights_.size()) + " heights for " +
                              std::to_string(partition_.bin_count()) + " bins");
        }
        cumulative_.resize(heights_.size() + 1, 0.0);
        for (std::size_t i = 0; i < heights_.size(); ++i) {
            if (!(heights_[i] >= 0.0) || !std::isfinite(heights_[i])) {
                throw ConfigError("density height " + std::to_string(i) + " is negative or not finite");
            }
            cumulative_[i + 1] = cumulative_[i] + heights_[i] * partition_.width(i);
        }
        if (std::abs(cumulative_.back() - 1.0) > kNormalizationTolerance) {
            throw InvariantError("density integrates to " + std::to_string(cumulative_.back()) + ", not 1");
        }
    }

    const BinPartition& partition() const { return partition_; }
    const std::vector<double>& edges() const { return partition_.edges(); }
    const std::vector<double>& heights() const { return heights_; }
    std::size_t bin_count() const { return heights_.size(); }

    /// Probability mass of one bin.
    double mass(std::size_t bin) const { return cumulative_[bin + 1] - cumulative_[bin]; }

    /// Total mass, exactly summed over bins.
    double total_mass() const { return cumulative_.back(); }

    double pdf(double x) const {
        const auto bin = partition_.bin_of(x);
        return bin ? heights_[*bin] : 0.0;
    }

    double cdf(double x) const {
        const auto& e = partition_.edges();
        if (x <= e.front()) {
            return 0.0;
        }
        if (x >= e.back()) {
            return 1.0;
        }
        const auto bin = *partition_.bin_of(x);
        const double value = cumulative_[bin] + heights_[bin] * (x - e[bin]);
        return std::clamp(value, 0.0, 1.0);
    }

    /// Smallest x with cdf(x) >= q; quantile(0) = b_0 and quantile(1) = b_k.
    double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw ConfigError("quantile level must lie in [0, 1], got " + std::to_string(q));
        }
        const auto& e = partition_.edges();
        if (q == 0.0) {
            return e.front();
        }
        if (q == 1.0) {
            return e.back();
        }
        // First bin whose right-hand cumulative mass reaches q. A zero-height
        // bin can never be first unless q is reached at its left edge, which
        // the previous bin already covers, so flat regions resolve leftwards.
        const auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), q);
        if (it == cumulative_.end()) {
            return e.back();
        }
        const auto bin = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
        if (heights_[bin] <= 0.0) {
            return e[bin];
        }
        const double x = e[bin] + (q - cumulative_[bin]) / heights_[bin];
        return std::clamp(x, e[bin], e[bin + 1]);
    }

    double mean() const {
        const auto& e = partition_.edges();
        double total = 0.0;
        for (std::size_t i = 0; i < heights_.size(); ++i) {
            total += mass(i) * 0.5 * (e[i] + e[i + 1]);
        }
        return total;
    }

    /// Negative log density at y; nullopt when y has zero density.
    std::optional<double> nll(double y) const {
        const double p = pdf(y);
        if (!(p > 0.0)) {
            return std::nullopt;
        }
        return -std::log(p);
    }

    /// Same as nll() but with +inf for a zero-density observation.
    double nll_or_inf(double y) const {
        const auto value = nll(y);
        return value ? *value : std::numeric_limits<double>::infinity();
    }

private:
    BinPartition partition_;
    std::vector<double> heights_;
    std::vector<double> cumulative_{0.0};
};

/// Density with height p_i / (b_i - b_{i-1}) on bin i.
inline PiecewiseConstantDensity make_density(std::span<const double> probs, const BinPartition& partition) {
    if (probs.size() != partition.bin_count()) {
        throw ConfigError("probability vector has " + std::to_string(probs.size()) + " entries for " +
                          std::to_string(partition.bin_count()) + " bins");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0)) {
            throw ConfigError("probability " + std::to_string(i) + " is negative or NaN");
        }
        total += probs[i];
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
        throw ConfigError("probabilities sum to " + std::to_string(total) + ", not 1");
    }
    std::vector<double> heights(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        heights[i] = probs[i] / partition.width(i);
    }
    return PiecewiseConstantDensity(partition, std::move(heights));
}

/// Pointwise mean of the given densities on the union of their edges.
inline PiecewiseConstantDensity average(std::span<const PiecewiseConstantDensity> densities) {
    if (densities.empty()) {
        throw ConfigError("cannot average an empty list of densities");
    }
    if (densities.size() == 1) {
        return densities.front();
    }
    std::vector<double> edges;
    for (const auto& d : densities) {
        edges.insert(edges.end(), d.edges().begin(), d.edges().end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const auto m = static_cast<double>(densities.size());
    std::vector<double> heights(edges.size() - 1, 0.0);
    for (const auto& d : densities) {
        // Walk the merged grid and the density's own bins together.
        const auto& own = d.edges();
        std::size_t bin = 0;
        for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
            const double left = edges[j];
            if (left < own.front() || left >= own.back()) {
                continue;
            }
            while (own[bin + 1] <= left) {
                ++bin;
            }
            heights[j] += d.heights()[bin];
        }
    }
    double total = 0.0;
    for (std::size_t j = 0; j < heights.size(); ++j) {
        heights[j] /= m;
        total += heights[j] * (edges[j + 1] - edges[j]);
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
        detail::warn("averaged density integrated to " + std::to_string(total) + "; renormalizing");
        for (auto& h : heights) {
            h /= total;
        }
    }
    return PiecewiseConstantDensity(BinPartition(std::move(edges)), std::move(heights));
}

inline PiecewiseConstantDensity average(const std::vector<PiecewiseConstantDensity>& densities) {
    return average(std::span<const PiecewiseConstantDensity>(densities));
}

}  // namespace presto
