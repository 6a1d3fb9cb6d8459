#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "presto/density.hpp"
#include "presto/intervals.hpp"

using namespace presto;

namespace {

std::vector<double> zero_to_ten() {
    std::vector<double> y;
    for (int i = 0; i <= 10; ++i) y.push_back(i);
    return y;
}

}  // namespace

TEST(EmpiricalQuantile, MatchesNumpyDefault) {
    // Reference values from numpy.quantile (linear method).
    std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6};
    std::sort(a.begin(), a.end());
    EXPECT_DOUBLE_EQ(empirical_quantile(a, 0.0), 1.0);
    EXPECT_NEAR(empirical_quantile(a, 0.3), 2.1, 1e-12);
    EXPECT_DOUBLE_EQ(empirical_quantile(a, 0.5), 3.5);
    EXPECT_NEAR(empirical_quantile(a, 0.77), 5.39, 1e-12);
    EXPECT_DOUBLE_EQ(empirical_quantile(a, 1.0), 9.0);
}

TEST(RandQuantile, HandTraceWithoutExtend) {
    const auto p = rand_quantile_edges_from_levels(zero_to_ten(), {0.5}, false);
    EXPECT_EQ(p.edges(), (std::vector<double>{0.0, 2.5, 7.5, 10.0}));
}

TEST(RandQuantile, HandTraceWithExtend) {
    const auto p = rand_quantile_edges_from_levels(zero_to_ten(), {0.5}, true, ExtendParams{0.25, 0.75, 1.0});
    EXPECT_EQ(p.edges(), (std::vector<double>{-5.0, 0.0, 2.5, 7.5, 10.0, 15.0}));
}

TEST(RandQuantile, ConstantTargetIsAnError) {
    const std::vector<double> y(20, 3.0);
    Rng rng(1);
    EXPECT_THROW(rand_quantile_edges(y, 5, false, {}, rng), Error);
    EXPECT_THROW(rand_quantile_edges(y, 5, true, {}, rng), Error);
}

TEST(RandQuantile, RejectsBadArguments) {
    Rng rng(1);
    EXPECT_THROW(rand_quantile_edges(std::vector<double>{}, 5, false, {}, rng), Error);
    EXPECT_THROW(rand_quantile_edges(zero_to_ten(), 0, false, {}, rng), ConfigError);
    EXPECT_THROW(rand_quantile_edges_from_levels(zero_to_ten(), {1.5}, false), ConfigError);
    EXPECT_THROW(ExtendParams({0.75, 0.25, 0.25}).validate(), ConfigError);
    EXPECT_THROW(ExtendParams({0.25, 0.75, -1.0}).validate(), ConfigError);
}

TEST(RandQuantile, SameSeedSameEdges) {
    Rng a(99), b(99);
    std::vector<double> y;
    Rng gen(5);
    for (int i = 0; i < 200; ++i) y.push_back(gen.normal());
    EXPECT_EQ(rand_quantile_edges(y, 25, true, {}, a), rand_quantile_edges(y, 25, true, {}, b));
}

TEST(RandQuantile, PropertiesOnRandomTargets) {
    Rng rng(3);
    for (int rep = 0; rep < 300; ++rep) {
        std::vector<double> y;
        const auto n = 2 + rng.below(100);
        const bool ties = rng.uniform() < 0.5;
        for (std::size_t i = 0; i < n; ++i) y.push_back(ties ? static_cast<double>(rng.below(6)) : rng.normal() * 3.0);
        if (*std::min_element(y.begin(), y.end()) == *std::max_element(y.begin(), y.end())) continue;
        const bool extend = rng.uniform() < 0.5;
        const auto p = rand_quantile_edges(y, 1 + static_cast<int>(rng.below(30)), extend, {}, rng);
        const auto& e = p.edges();
        const double lo = *std::min_element(y.begin(), y.end());
        const double hi = *std::max_element(y.begin(), y.end());
        EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
        EXPECT_TRUE(std::adjacent_find(e.begin(), e.end()) == e.end());
        EXPECT_NE(std::find(e.begin(), e.end(), lo), e.end());
        EXPECT_NE(std::find(e.begin(), e.end(), hi), e.end());
        if (extend) {
            // With ties the quartile spread can be zero, leaving no extension.
            EXPECT_LE(e.front(), lo);
            EXPECT_GE(e.back(), hi);
        } else {
            EXPECT_EQ(e.front(), lo);
            EXPECT_EQ(e.back(), hi);
        }
        // Every training target lands in a bin that a one-hot density covers.
        const auto labels = discretize(y, p);
        for (std::size_t i = 0; i < y.size(); ++i) {
            std::vector<double> onehot(p.bin_count(), 0.0);
            onehot[static_cast<std::size_t>(labels[i])] = 1.0;
            EXPECT_GT(make_density(onehot, p).pdf(y[i]), 0.0);
        }
    }
}

TEST(RandQuantile, ExtendStrictlyContainsRangeWhenSpreadPositive) {
    Rng rng(4);
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) y.push_back(rng.normal());
    const auto p = rand_quantile_edges(y, 25, true, {}, rng);
    EXPECT_LT(p.lower(), *std::min_element(y.begin(), y.end()));
    EXPECT_GT(p.upper(), *std::max_element(y.begin(), y.end()));
}

TEST(FixedEdges, WineGridIsKeptVerbatim) {
    const std::vector<double> grid{2, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8};
    EXPECT_EQ(fixed_edges(grid).edges(), grid);
    EXPECT_EQ(fixed_edges(std::vector<double>{0, 1}).bin_count(), 1u);
    EXPECT_THROW(fixed_edges(std::vector<double>{1, 1, 2}), ConfigError);
    EXPECT_THROW(fixed_edges(std::vector<double>{1}), ConfigError);
}

TEST(FixedRssEdges, Examples) {
    Rng rng(8);
    const std::vector<double> grid{0, 1, 2, 3};
    EXPECT_EQ(fixed_rss_edges(grid, 2, rng).edges(), grid);
    EXPECT_EQ(fixed_rss_edges(grid, 0, rng).edges(), (std::vector<double>{0, 3}));
    EXPECT_THROW(fixed_rss_edges(grid, 3, rng), ConfigError);
}

TEST(FixedRssEdges, NavalStyleGrid) {
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.95 + 0.001 * i);
    grid.back() = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto p = fixed_rss_edges(grid, 20, rng);
        EXPECT_EQ(p.edges().size(), 22u);
        EXPECT_DOUBLE_EQ(p.lower(), 0.95);
        EXPECT_DOUBLE_EQ(p.upper(), 1.0);
        for (const double e : p.edges()) EXPECT_NE(std::find(grid.begin(), grid.end(), e), grid.end());
    }
}

TEST(FixedRssEdges, InteriorPointsAreSampledUniformly) {
    // Each of 8 interior points should be kept about half the time with subset 4.
    const std::vector<double> grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> kept(10, 0);
    Rng rng(17);
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
        const auto p = fixed_rss_edges(grid, 4, rng);
        for (const double e : p.edges()) ++kept[static_cast<std::size_t>(e)];
    }
    EXPECT_EQ(kept[0], reps);
    EXPECT_EQ(kept[9], reps);
    for (int i = 1; i < 9; ++i) EXPECT_NEAR(kept[static_cast<std::size_t>(i)] / double(reps), 0.5, 0.04);
}

TEST(Discretize, BoundaryRules) {
    const BinPartition p({0.0, 2.5, 7.5, 10.0});
    EXPECT_EQ(discretize(std::vector<double>{2.5, 10.0, 0.0, 7.4}, p), (std::vector<int>{1, 2, 0, 1}));
}

TEST(Discretize, OutOfRangeNamesTheValue) {
    const BinPartition p({0.0, 1.0});
    try {
        discretize(std::vector<double>{0.5, 1.25}, p);
        FAIL() << "expected an error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("1.25"), std::string::npos) << e.what();
    }
}

TEST(Discretize, ClampedSendsOutliersToEndBins) {
    const BinPartition p({0.0, 1.0, 2.0});
    EXPECT_EQ(discretize_clamped(std::vector<double>{-4.0, 0.5, 1.5, 9.0}, p), (std::vector<int>{0, 0, 1, 1}));
    EXPECT_THROW(discretize_clamped(std::vector<double>{std::nan("")}, p), DataError);
}

TEST(IntervalConfig, ValidatesMethodFields) {
    IntervalMethodConfig c;
    EXPECT_NO_THROW(c.validate());
    c.num_quantiles = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.method = IntervalMethod::fixed;
    EXPECT_THROW(c.validate(), ConfigError);
    c.grid = {0, 1, 2};
    EXPECT_NO_THROW(c.validate());
    c.method = IntervalMethod::fixed_rss;
    EXPECT_THROW(c.validate(), ConfigError);
    c.subset_size = 1;
    EXPECT_NO_THROW(c.validate());
    c.subset_size = 2;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(interval_method_from_string("fixed_rss"), IntervalMethod::fixed_rss);
    EXPECT_THROW(interval_method_from_string("quantile"), ConfigError);
}
