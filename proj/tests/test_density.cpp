#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "presto/density.hpp"
#include "support.hpp"

using namespace presto;

namespace {

PiecewiseConstantDensity uniform(double lo, double hi) { return make_density(std::vector<double>{1.0}, BinPartition({lo, hi})); }

// Midpoint-rule integral of the pdf over [lo, hi] with `steps` cells.
double integrate(const PiecewiseConstantDensity& d, double lo, double hi, int steps) {
    const double h = (hi - lo) / steps;
    double total = 0.0;
    for (int i = 0; i < steps; ++i) total += d.pdf(lo + (i + 0.5) * h) * h;
    return total;
}

}  // namespace

TEST(BinPartition, RejectsBadEdges) {
    EXPECT_THROW(BinPartition({1.0}), ConfigError);
    EXPECT_THROW(BinPartition({0.0, 0.0}), ConfigError);
    EXPECT_THROW(BinPartition({0.0, 2.0, 1.0}), ConfigError);
    EXPECT_THROW(BinPartition({0.0, std::nan("")}), ConfigError);
    EXPECT_NO_THROW(BinPartition({0.0, 1.0}));
}

TEST(BinPartition, BinOfUsesHalfOpenBinsAndClosedTop) {
    const BinPartition p({0.0, 2.5, 7.5, 10.0});
    EXPECT_EQ(p.bin_of(0.0), 0u);
    EXPECT_EQ(p.bin_of(2.5), 1u);
    EXPECT_EQ(p.bin_of(7.4999), 1u);
    EXPECT_EQ(p.bin_of(10.0), 2u);
    EXPECT_FALSE(p.bin_of(-0.1));
    EXPECT_FALSE(p.bin_of(10.1));
    EXPECT_FALSE(p.bin_of(std::nan("")));
}

TEST(MakeDensity, HeightsAreMassOverWidth) {
    const auto d1 = make_density(std::vector<double>{1.0}, BinPartition({0.0, 1.0}));
    EXPECT_DOUBLE_EQ(d1.heights()[0], 1.0);

    const auto d2 = make_density(std::vector<double>{0.2, 0.8}, BinPartition({0.0, 1.0, 3.0}));
    EXPECT_DOUBLE_EQ(d2.heights()[0], 0.2);
    EXPECT_DOUBLE_EQ(d2.heights()[1], 0.4);

    const auto d3 = make_density(std::vector<double>{0.5, 0.5}, BinPartition({0.0, 1.0, 2.0}));
    EXPECT_DOUBLE_EQ(d3.heights()[0], 0.5);
    EXPECT_DOUBLE_EQ(d3.heights()[1], 0.5);
    EXPECT_NEAR(d3.total_mass(), 1.0, 1e-15);
}

TEST(MakeDensity, RejectsInvalidProbabilities) {
    const BinPartition p({0.0, 1.0, 3.0});
    EXPECT_THROW(make_density(std::vector<double>{1.0}, p), ConfigError);
    EXPECT_THROW(make_density(std::vector<double>{0.5, 0.4}, p), ConfigError);
    EXPECT_THROW(make_density(std::vector<double>{1.2, -0.2}, p), ConfigError);
}

TEST(Density, PdfCdfOnUniform) {
    const auto d = uniform(0.0, 10.0);
    EXPECT_DOUBLE_EQ(d.pdf(5.0), 0.1);
    EXPECT_DOUBLE_EQ(d.pdf(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(d.pdf(10.0), 0.1);
    EXPECT_DOUBLE_EQ(d.cdf(2.5), 0.25);
    EXPECT_DOUBLE_EQ(d.cdf(11.0), 1.0);
    EXPECT_DOUBLE_EQ(d.cdf(-3.0), 0.0);
}

TEST(Density, CdfAccumulatesLinearly) {
    const PiecewiseConstantDensity d(BinPartition({0.0, 1.0, 3.0}), {0.2, 0.4});
    EXPECT_NEAR(d.cdf(2.0), 0.6, 1e-15);
}

TEST(Density, QuantileExamples) {
    EXPECT_DOUBLE_EQ(uniform(0.0, 10.0).quantile(0.5), 5.0);
    const PiecewiseConstantDensity d(BinPartition({0.0, 1.0, 3.0}), {0.2, 0.4});
    EXPECT_DOUBLE_EQ(d.quantile(0.2), 1.0);
    EXPECT_DOUBLE_EQ(d.quantile(0.0), 0.0);
    EXPECT_DOUBLE_EQ(d.quantile(1.0), 3.0);
    EXPECT_THROW(d.quantile(-0.01), ConfigError);
    EXPECT_THROW(d.quantile(1.01), ConfigError);
}

TEST(Density, QuantileResolvesFlatRegionToTheLeft) {
    // Mass 0.5 on [0,1), nothing on [1,4), 0.5 on [4,5].
    const PiecewiseConstantDensity d(BinPartition({0.0, 1.0, 4.0, 5.0}), {0.5, 0.0, 0.5});
    EXPECT_DOUBLE_EQ(d.quantile(0.5), 1.0);
    EXPECT_DOUBLE_EQ(d.quantile(0.75), 4.5);
}

TEST(Density, MeanExamples) {
    EXPECT_DOUBLE_EQ(uniform(0.0, 10.0).mean(), 5.0);
    const auto d = make_density(std::vector<double>{0.2, 0.8}, BinPartition({0.0, 1.0, 3.0}));
    EXPECT_NEAR(d.mean(), 1.7, 1e-15);
    const auto sym = make_density(std::vector<double>{0.1, 0.4, 0.4, 0.1}, BinPartition({-3.0, -1.0, 0.0, 1.0, 3.0}));
    EXPECT_NEAR(sym.mean(), 0.0, 1e-12);
}

TEST(Density, NllExamples) {
    EXPECT_NEAR(*uniform(0.0, 10.0).nll(3.0), 2.302585092994046, 1e-12);
    EXPECT_DOUBLE_EQ(*uniform(0.0, 1.0).nll(0.5), 0.0);
    EXPECT_FALSE(uniform(0.0, 1.0).nll(2.0).has_value());
    EXPECT_TRUE(std::isinf(uniform(0.0, 1.0).nll_or_inf(2.0)));
}

TEST(Density, ConstructorRejectsUnnormalizedHeights) {
    EXPECT_THROW(PiecewiseConstantDensity(BinPartition({0.0, 1.0}), {0.5}), InvariantError);
    EXPECT_THROW(PiecewiseConstantDensity(BinPartition({0.0, 1.0}), {0.5, 0.5}), ConfigError);
    EXPECT_THROW(PiecewiseConstantDensity(BinPartition({0.0, 1.0, 2.0}), {1.5, -0.5}), ConfigError);
}

TEST(Average, SingleDensityIsIdentity) {
    const PiecewiseConstantDensity d(BinPartition({0.0, 1.0, 3.0}), {0.2, 0.4});
    const auto a = average(std::vector<PiecewiseConstantDensity>{d});
    for (double x = -0.5; x <= 3.5; x += 0.125) EXPECT_DOUBLE_EQ(a.pdf(x), d.pdf(x));
}

TEST(Average, OverlappingUniforms) {
    const auto a = average(std::vector<PiecewiseConstantDensity>{uniform(0.0, 2.0), uniform(1.0, 3.0)});
    ASSERT_EQ(a.edges(), (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(a.heights()[0], 0.25);
    EXPECT_DOUBLE_EQ(a.heights()[1], 0.5);
    EXPECT_DOUBLE_EQ(a.heights()[2], 0.25);
}

TEST(Average, EmptyInputIsAnError) { EXPECT_THROW(average(std::vector<PiecewiseConstantDensity>{}), ConfigError); }

TEST(Average, FineGridIntegralOfRandomAverages) {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<PiecewiseConstantDensity> ds;
        for (int i = 0; i < 4; ++i) ds.push_back(test::random_density(rng));
        const auto a = average(ds);
        EXPECT_NEAR(a.total_mass(), 1.0, 1e-9);
        // Independent check: numeric integration of the pdf.
        EXPECT_NEAR(integrate(a, a.edges().front(), a.edges().back(), 400000), 1.0, 1e-3);
    }
}

// Randomized algebraic properties, 1000 cases each.
TEST(DensityProperties, NormalizationAndMassRecovery) {
    Rng rng(1);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto probs_partition = test::random_probs_and_partition(rng);
        const auto d = make_density(probs_partition.first, probs_partition.second);
        double total = 0.0;
        for (std::size_t i = 0; i < d.bin_count(); ++i) {
            total += d.heights()[i] * d.partition().width(i);
            EXPECT_NEAR(d.mass(i), probs_partition.first[i], 1e-12);
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(DensityProperties, CdfQuantileRoundTrip) {
    Rng rng(2);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto d = test::random_density(rng, /*allow_zero_bins=*/false);
        const double q = rng.uniform();
        EXPECT_NEAR(d.cdf(d.quantile(q)), q, 1e-9);
        const double x = d.edges().front() + rng.uniform() * (d.edges().back() - d.edges().front());
        EXPECT_NEAR(d.quantile(d.cdf(x)), x, 1e-9 * std::max(1.0, std::abs(x)));
    }
}

TEST(DensityProperties, CdfIsNondecreasing) {
    Rng rng(3);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto d = test::random_density(rng);
        double prev = 0.0;
        const double lo = d.edges().front() - 1.0;
        const double hi = d.edges().back() + 1.0;
        for (int i = 0; i <= 50; ++i) {
            const double c = d.cdf(lo + (hi - lo) * i / 50.0);
            EXPECT_GE(c, prev);
            prev = c;
        }
    }
}

TEST(DensityProperties, AverageMeanIsMeanOfMeans) {
    Rng rng(4);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto m = 1 + rng.below(6);
        std::vector<PiecewiseConstantDensity> ds;
        double expected = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            ds.push_back(test::random_density(rng));
            expected += ds.back().mean();
        }
        expected /= static_cast<double>(m);
        EXPECT_NEAR(average(ds).mean(), expected, 1e-9 * std::max(1.0, std::abs(expected)));
    }
}

TEST(DensityProperties, AverageIsOrderInvariantAndIdempotent) {
    Rng rng(5);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<PiecewiseConstantDensity> ds;
        const auto m = 2 + rng.below(4);
        for (std::size_t i = 0; i < m; ++i) ds.push_back(test::random_density(rng));
        auto shuffled = ds;
        rng.shuffle(shuffled);
        const auto a = average(ds);
        const auto b = average(shuffled);
        const auto twice = average(std::vector<PiecewiseConstantDensity>{ds[0], ds[0]});
        const double lo = a.edges().front() - 0.5;
        const double hi = a.edges().back() + 0.5;
        for (int i = 0; i < 10; ++i) {
            const double x = lo + (hi - lo) * rng.uniform();
            EXPECT_NEAR(a.pdf(x), b.pdf(x), 1e-12);
            EXPECT_NEAR(twice.pdf(x), ds[0].pdf(x), 1e-12);
        }
    }
}
