#pragma once

// Interval selection: random-quantile edges (with optional extension past the
// observed range), fixed grids, random subsets of a fixed grid, and the
// discretizer that maps targets to bin labels.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "presto/core.hpp"
#include "presto/density.hpp"

namespace presto {

enum class IntervalMethod { rand_quantile, fixed, fixed_rss };

inline std::string to_string(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::rand_quantile: return "rand_quantile";
        case IntervalMethod::fixed: return "fixed";
        case IntervalMethod::fixed_rss: return "fixed_rss";
    }
    return "unknown";
}

inline IntervalMethod interval_method_from_string(const std::string& name) {
    if (name == "rand_quantile") return IntervalMethod::rand_quantile;
    if (name == "fixed") return IntervalMethod::fixed;
    if (name == "fixed_rss") return IntervalMethod::fixed_rss;
    throw ConfigError("unknown interval method '" + name + "' (expected rand_quantile, fixed or fixed_rss)");
}

/// Width of each extension bin is (quantile(q_max) - quantile(q_min)) * scale.
struct ExtendParams {
    double q_min = 0.25;
    double q_max = 0.75;
    double scale = 0.25;

    void validate() const {
        if (!(q_min >= 0.0 && q_min < q_max && q_max <= 1.0)) {
            throw ConfigError("extend quantiles must satisfy 0 <= q_min < q_max <= 1");
        }
        if (!(scale >= 0.0) || !std::isfinite(scale)) {
            throw ConfigError("extend scale must be a finite value >= 0");
        }
    }
};

struct IntervalMethodConfig {
    IntervalMethod method = IntervalMethod::rand_quantile;
    int num_quantiles = 25;
    bool extend = true;
    ExtendParams extend_params;
    std::vector<double> grid;
    std::optional<std::size_t> subset_size;

    void validate() const {
        switch (method) {
            case IntervalMethod::rand_quantile:
                if (num_quantiles < 1) {
                    throw ConfigError("num_quantiles must be >= 1");
                }
                if (extend) {
                    extend_params.validate();
                }
                break;
            case IntervalMethod::fixed:
            case IntervalMethod::fixed_rss:
                if (grid.size() < 2) {
                    throw ConfigError("interval grid needs at least 2 points");
                }
                for (std::size_t i = 1; i < grid.size(); ++i) {
                    if (!(grid[i - 1] < grid[i])) {
                        throw ConfigError("interval grid must be strictly increasing (position " +
                                          std::to_string(i) + ")");
                    }
                }
                if (method == IntervalMethod::fixed_rss) {
                    if (!subset_size) {
                        throw ConfigError("fixed_rss requires subset_size");
                    }
                    if (*subset_size > grid.size() - 2) {
                        throw ConfigError("subset_size " + std::to_string(*subset_size) + " exceeds the " +
                                          std::to_string(grid.size() - 2) + " interior grid points");
                    }
                }
                break;
        }
    }
};

/// Empirical quantile of sorted data, linearly interpolating between order
/// statistics at position (n - 1) * q.
inline double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw DataError("quantile of an empty sample");
    }
    const double position = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(position));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = position - static_cast<double>(lo);
    if (frac == 0.0) {
        return sorted[lo];
    }
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace detail {

inline std::vector<double> sorted_targets(std::span<const double> y) {
    if (y.empty()) {
        throw DataError("cannot choose intervals from an empty target list");
    }
    std::vector<double> sorted(y.begin(), y.end());
    for (const double v : sorted) {
        if (!std::isfinite(v)) {
            throw DataError("target values must be finite");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

inline BinPartition unique_edges(std::vector<double> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 2) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "degenerate interval selection: all candidate edges equal "
            << (points.empty() ? 0.0 : points.front()) << " (enable extend or supply varied targets)";
        throw DataError(msg.str());
    }
    return BinPartition(std::move(points));
}

}  // namespace detail

/// Random-quantile edges for explicitly supplied quantile levels.
inline BinPartition rand_quantile_edges_from_levels(std::span<const double> y_train, std::vector<double> levels,
                                                    bool extend, const ExtendParams& params = {}) {
    const auto sorted = detail::sorted_targets(y_train);
    if (levels.empty()) {
        throw ConfigError("at least one quantile level is required");
    }
    for (const double z : levels) {
        if (!(z >= 0.0 && z <= 1.0)) {
            throw ConfigError("quantile levels must lie in [0, 1]");
        }
    }
    std::sort(levels.begin(), levels.end());

    std::vector<double> anchors;
    anchors.reserve(levels.size() + 2);
    anchors.push_back(sorted.front());
    for (const double z : levels) {
        anchors.push_back(empirical_quantile(sorted, z));
    }
    anchors.push_back(sorted.back());

    std::vector<double> points;
    points.reserve(anchors.size() + 3);
    points.push_back(anchors.front());
    for (std::size_t j = 0; j + 1 < anchors.size(); ++j) {
        points.push_back(0.5 * (anchors[j] + anchors[j + 1]));
    }
    points.push_back(anchors.back());

    if (extend) {
        params.validate();
        const double u = empirical_quantile(sorted, params.q_min);
        const double v = empirical_quantile(sorted, params.q_max);
        const double w = (v - u) * params.scale;
        points.push_back(sorted.front() - w);
        points.push_back(sorted.back() + w);
    }
    return detail::unique_edges(std::move(points));
}

/// Draws r iid uniform quantile levels and builds random-quantile edges.
inline BinPartition rand_quantile_edges(std::span<const double> y_train, int r, bool extend,
                                        const ExtendParams& params, Rng& rng) {
    if (r < 1) {
        throw ConfigError("number of quantiles must be >= 1, got " + std::to_string(r));
    }
    std::vector<double> levels(static_cast<std::size_t>(r));
    for (auto& z : levels) {
        z = rng.uniform();
    }
    return rand_quantile_edges_from_levels(y_train, std::move(levels), extend, params);
}

inline BinPartition fixed_edges(std::span<const double> grid) {
    if (grid.size() < 2) {
        throw ConfigError("a fixed grid needs at least 2 points");
    }
    return BinPartition(std::vector<double>(grid.begin(), grid.end()));
}

/// Keeps the first and last grid points plus `subset_size` interior points
/// chosen uniformly without replacement.
inline BinPartition fixed_rss_edges(std::span<const double> grid, std::size_t subset_size, Rng& rng) {
    const auto full = fixed_edges(grid);
    const std::size_t interior = grid.size() - 2;
    if (subset_size > interior) {
        throw ConfigError("subset_size " + std::to_string(subset_size) + " exceeds the " +
                          std::to_string(interior) + " interior grid points");
    }
    auto picks = rng.sample_without_replacement(interior, subset_size);
    std::sort(picks.begin(), picks.end());
    std::vector<double> edges;
    edges.reserve(subset_size + 2);
    edges.push_back(grid.front());
    for (const auto p : picks) {
        edges.push_back(grid[p + 1]);
    }
    edges.push_back(grid.back());
    return BinPartition(std::move(edges));
}

/// Partition for one classifier under the configured method.
inline BinPartition select_intervals(const IntervalMethodConfig& config, std::span<const double> y_train, Rng& rng) {
    config.validate();
    switch (config.method) {
        case IntervalMethod::rand_quantile:
            return rand_quantile_edges(y_train, config.num_quantiles, config.extend, config.extend_params, rng);
        case IntervalMethod::fixed:
            return fixed_edges(config.grid);
        case IntervalMethod::fixed_rss:
            return fixed_rss_edges(config.grid, *config.subset_size, rng);
    }
    throw ConfigError("unknown interval method");
}

/// Half-open bin labels with y == b_k in the last bin.
inline std::vector<int> discretize(std::span<const double> y, const BinPartition& partition) {
    std::vector<int> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto bin = partition.bin_of(y[i]);
        if (!bin) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "target value " << y[i] << " (row " << i << ") lies outside the partition range ["
                << partition.lower() << ", " << partition.upper() << "]";
            throw DataError(msg.str());
        }
        labels[i] = static_cast<int>(*bin);
    }
    return labels;
}

/// Like discretize(), but values outside the range go to the nearest end bin.
inline std::vector<int> discretize_clamped(std::span<const double> y, const BinPartition& partition) {
    std::vector<int> labels(y.size());
    const double lo = partition.lower();
    const double hi = partition.upper();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::isnan(y[i])) {
            throw DataError("target value at row " + std::to_string(i) + " is NaN");
        }
        labels[i] = static_cast<int>(*partition.bin_of(std::clamp(y[i], lo, hi)));
    }
    return labels;
}

}  // namespace presto
