#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "presto/core.hpp"
#include "presto/density.hpp"

namespace presto::test {

/// Random strictly increasing edges and a probability vector over them.
/// With `allow_zero_bins`, about a fifth of the bins get no mass.
inline std::pair<std::vector<double>, BinPartition> random_probs_and_partition(Rng& rng, bool allow_zero_bins = true) {
    const std::size_t k = 1 + rng.below(12);
    std::vector<double> edges{-5.0 + 10.0 * rng.uniform()};
    for (std::size_t i = 0; i < k; ++i) edges.push_back(edges.back() + 0.01 + 3.0 * rng.uniform());
    std::vector<double> probs(k);
    double total = 0.0;
    for (auto& p : probs) {
        p = (allow_zero_bins && rng.uniform() < 0.2) ? 0.0 : rng.uniform();
        total += p;
    }
    if (total == 0.0) {
        probs[0] = 1.0;
        total = 1.0;
    }
    for (auto& p : probs) p /= total;
    return {probs, BinPartition(edges)};
}

inline PiecewiseConstantDensity random_density(Rng& rng, bool allow_zero_bins = true) {
    const auto [probs, partition] = random_probs_and_partition(rng, allow_zero_bins);
    return make_density(probs, partition);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("presto_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace presto::test
