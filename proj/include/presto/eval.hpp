#pragma once

// Benchmark protocol: seeded train/valid/test splits, early-stopped fits,
// retraining on train+valid at the tuned round counts, and the reported
// measurements (test NLL, RMSE of density means, interval coverage, learning
// curves and structured-vs-standard comparisons).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "presto/core.hpp"
#include "presto/csv.hpp"
#include "presto/density.hpp"
#include "presto/regressor.hpp"
#include "presto/serialize.hpp"

namespace presto {

inline const std::vector<double>& default_coverage_levels() {
    static const std::vector<double> levels{0.20, 0.50, 0.80, 0.90, 0.95};
    return levels;
}

struct TrialSpec {
    std::string dataset_id;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double test_fraction = 0.10;
    /// Fraction of the non-test rows held out for validation.
    double valid_fraction = 0.20;
    /// When set, the last this-many rows form a fixed test set (a published
    /// split) and only the remaining rows are shuffled.
    std::optional<std::size_t> test_tail_rows;
    PrestoConfig config;
    /// Reuse the validation-stage partitions when retraining instead of
    /// redrawing them from the combined fold.
    bool freeze_partitions = false;
    std::vector<double> coverage_levels = default_coverage_levels();
    bool keep_densities = false;

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
        if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw ConfigError("valid_fraction must lie in (0, 1)");
        for (const double level : coverage_levels) {
            if (!(level > 0.0 && level < 1.0)) throw ConfigError("coverage levels must lie in (0, 1)");
        }
        config.validate();
    }
};

struct TrialSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
};

/// Seeded permutation: the first round(test_fraction * n) rows form the test
/// set, then round(valid_fraction * rest) the validation set. With
/// `test_tail_rows` the test set is the last rows in file order instead.
inline TrialSplit make_split(std::size_t n, std::uint64_t seed, double test_fraction, double valid_fraction,
                             std::optional<std::size_t> test_tail_rows = std::nullopt) {
    if (test_tail_rows && *test_tail_rows >= n) {
        throw DataError("test_tail_rows " + std::to_string(*test_tail_rows) + " leaves no training rows out of " +
                        std::to_string(n));
    }
    const std::size_t shuffled = test_tail_rows ? n - *test_tail_rows : n;
    std::vector<std::size_t> head(shuffled);
    for (std::size_t i = 0; i < shuffled; ++i) head[i] = i;
    Rng rng(seed ^ 0x243f6a8885a308d3ULL);
    rng.shuffle(head);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t i = shuffled; i < n; ++i) order.push_back(i);
    order.insert(order.end(), head.begin(), head.end());
    const auto n_test = test_tail_rows
                            ? *test_tail_rows
                            : static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    const auto n_valid = static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(n - n_test)));
    if (n_test == 0 || n_valid == 0 || n_test + n_valid >= n) {
        throw DataError("dataset with " + std::to_string(n) + " rows is too small to split");
    }
    TrialSplit split;
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                       order.begin() + static_cast<std::ptrdiff_t>(n_test + n_valid));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_valid), order.end());
    return split;
}

struct CoverageReport {
    std::vector<double> levels;
    std::vector<std::size_t> inside;
    std::size_t total = 0;

    double rate(std::size_t i) const { return total == 0 ? 0.0 : static_cast<double>(inside[i]) / static_cast<double>(total); }
    std::vector<double> rates() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < levels.size(); ++i) out.push_back(rate(i));
        return out;
    }
};

/// Fraction of rows whose target lies in the closed central interval.
inline CoverageReport coverage_eval(std::span<const PiecewiseConstantDensity> densities, std::span<const double> y,
                                    std::span<const double> levels) {
    if (densities.size() != y.size()) {
        throw DataError("coverage_eval: " + std::to_string(densities.size()) + " densities for " +
                        std::to_string(y.size()) + " targets");
    }
    CoverageReport report;
    report.levels.assign(levels.begin(), levels.end());
    report.inside.assign(levels.size(), 0);
    report.total = y.size();
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const auto interval = central_interval(densities[i], levels[l]);
            if (y[i] >= interval.lo && y[i] <= interval.hi) {
                ++report.inside[l];
            }
        }
    }
    return report;
}

struct NllReport {
    double mean = 0.0;  ///< +inf when any observation has zero density
    std::size_t support_violations = 0;
};

inline NllReport nll_eval(std::span<const PiecewiseConstantDensity> densities, std::span<const double> y) {
    if (densities.size() != y.size() || y.empty()) {
        throw DataError("nll_eval needs one density per target and at least one row");
    }
    NllReport report;
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto value = densities[i].nll(y[i]);
        if (!value) {
            ++report.support_violations;
        } else {
            total += *value;
        }
    }
    if (report.support_violations > 0) {
        detail::warn(std::to_string(report.support_violations) + " observation(s) fall outside the predicted support");
        report.mean = std::numeric_limits<double>::infinity();
    } else {
        report.mean = total / static_cast<double>(y.size());
    }
    return report;
}

inline double rmse_eval(std::span<const PiecewiseConstantDensity> densities, std::span<const double> y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = densities[i].mean() - y[i];
        total += e * e;
    }
    return std::sqrt(total / static_cast<double>(y.size()));
}

struct TrialResult {
    std::string dataset_id;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string loss;
    std::size_t n_train = 0;
    std::size_t n_valid = 0;
    std::size_t n_test = 0;
    double nll = 0.0;
    std::size_t support_violations = 0;
    double rmse = 0.0;
    CoverageReport coverage;
    std::vector<std::size_t> tuned_rounds;
    int max_depth = 0;
    std::vector<PiecewiseConstantDensity> densities;
    double seconds = 0.0;
};

struct RefitResult {
    PrestoModel model;
    std::vector<std::size_t> tuned_rounds;
    std::vector<MemberFitInfo> validation;
};

/// Early-stopped fit on train/valid, then a refit on train+valid at the
/// tuned per-classifier round counts. Partitions are redrawn from the
/// combined targets with the same streams unless `freeze_partitions`.
inline RefitResult fit_and_refit(const Dataset& train, const Dataset& valid, const PrestoConfig& config,
                                 bool freeze_partitions) {
    RefitResult out;
    const auto tuned = presto_fit_detailed(train.x, train.y, valid.x, valid.y, config);
    for (const auto& info : tuned.members) {
        out.tuned_rounds.push_back(info.rounds);
    }
    out.validation = tuned.members;
    const FeatureMatrix x = train.x.stacked(valid.x);
    std::vector<double> y = train.y;
    y.insert(y.end(), valid.y.begin(), valid.y.end());
    std::optional<std::vector<BinPartition>> frozen;
    if (freeze_partitions) {
        frozen.emplace();
        for (const auto& m : tuned.model.members) frozen->push_back(m.partition);
    }
    const FeatureMatrix no_rows(0, x.cols());
    out.model = presto_fit_detailed(x, y, no_rows, {}, config, out.tuned_rounds, frozen).model;
    out.model.feature_names = train.feature_names;
    out.model.target_name = train.target_name;
    return out;
}

/// A trained model for one trial plus the split it came from.
struct TrialFit {
    TrialSplit split;
    PrestoModel model;
    std::vector<std::size_t> tuned_rounds;
};

inline TrialFit fit_trial(const Dataset& data, const TrialSpec& spec) {
    spec.validate();
    if (!data.has_target()) {
        throw DataError("dataset has no target column");
    }
    TrialFit out;
    out.split = make_split(data.rows(), spec.seed, spec.test_fraction, spec.valid_fraction, spec.test_tail_rows);
    auto refit = fit_and_refit(data.subset(out.split.train), data.subset(out.split.valid), spec.config,
                               spec.freeze_partitions);
    out.model = std::move(refit.model);
    out.tuned_rounds = std::move(refit.tuned_rounds);
    return out;
}

inline TrialResult run_trial(const Dataset& data, const TrialSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const TrialFit fitted = fit_trial(data, spec);
    const Dataset test = data.subset(fitted.split.test);
    auto densities = presto_predict(fitted.model, test.x);

    TrialResult r;
    r.dataset_id = spec.dataset_id;
    r.trial = spec.trial;
    r.seed = spec.seed;
    r.loss = to_string(spec.config.loss);
    r.n_train = fitted.split.train.size();
    r.n_valid = fitted.split.valid.size();
    r.n_test = fitted.split.test.size();
    const auto nll = nll_eval(densities, test.y);
    r.nll = nll.mean;
    r.support_violations = nll.support_violations;
    r.rmse = rmse_eval(densities, test.y);
    r.coverage = coverage_eval(densities, test.y, spec.coverage_levels);
    r.tuned_rounds = fitted.tuned_rounds;
    r.max_depth = spec.config.gbdt.max_depth;
    if (spec.keep_densities) {
        r.densities = std::move(densities);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Spec for trial `index` of a run: seed is base_seed + index for both the
/// split and the model.
inline TrialSpec trial_spec(const TrialSpec& base, std::size_t index) {
    TrialSpec spec = base;
    spec.trial = index;
    spec.seed = base.seed + index;
    spec.config.seed = base.config.seed + index;
    return spec;
}

struct MeanSe {
    double mean = 0.0;
    std::optional<double> se;  ///< nullopt for a single observation
};

/// Mean and standard error (sample stdev / sqrt(n)).
inline MeanSe mean_se(std::span<const double> values) {
    if (values.empty()) {
        throw ConfigError("cannot summarize zero values");
    }
    MeanSe out;
    double total = 0.0;
    for (const double v : values) total += v;
    out.mean = total / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - out.mean) * (v - out.mean);
        const double stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        out.se = stdev / std::sqrt(static_cast<double>(values.size()));
    }
    return out;
}

struct Summary {
    std::string dataset_id;
    std::string loss;
    std::size_t trials = 0;
    std::size_t n = 0;
    MeanSe nll;
    MeanSe rmse;
    std::vector<double> coverage_levels;
    std::vector<MeanSe> coverage;
    std::size_t support_violations = 0;
};

inline Summary aggregate(std::span<const TrialResult> results) {
    if (results.empty()) {
        throw ConfigError("cannot aggregate zero trial results");
    }
    Summary s;
    s.dataset_id = results.front().dataset_id;
    s.loss = results.front().loss;
    s.trials = results.size();
    s.n = results.front().n_train + results.front().n_valid + results.front().n_test;
    std::vector<double> nll, rmse;
    for (const auto& r : results) {
        nll.push_back(r.nll);
        rmse.push_back(r.rmse);
        s.support_violations += r.support_violations;
    }
    s.nll = mean_se(nll);
    s.rmse = mean_se(rmse);
    s.coverage_levels = results.front().coverage.levels;
    for (std::size_t l = 0; l < s.coverage_levels.size(); ++l) {
        std::vector<double> rates;
        for (const auto& r : results) rates.push_back(r.coverage.rate(l));
        s.coverage.push_back(mean_se(rates));
    }
    return s;
}

/// Test NLL after averaging the first m classifiers, for m = 1 .. m_max.
/// The classifiers are fitted once; prefixes of the same ensemble are scored.
inline std::vector<double> learning_curve(const Dataset& data, const TrialSpec& spec, int m_max) {
    if (m_max < 1) {
        throw ConfigError("learning curve needs m_max >= 1");
    }
    TrialSpec full = spec;
    full.config.num_classifiers = m_max;
    const TrialFit fitted = fit_trial(data, full);
    const Dataset test = data.subset(fitted.split.test);
    const auto per_member = member_densities(fitted.model, test.x);

    std::vector<double> curve;
    for (int m = 1; m <= m_max; ++m) {
        std::vector<PiecewiseConstantDensity> averaged;
        averaged.reserve(test.rows());
        for (std::size_t r = 0; r < test.rows(); ++r) {
            averaged.push_back(average(std::span<const PiecewiseConstantDensity>(per_member[r].data(),
                                                                                 static_cast<std::size_t>(m))));
        }
        curve.push_back(nll_eval(averaged, test.y).mean);
    }
    return curve;
}

struct VariantComparison {
    std::string dataset_id;
    std::vector<double> structured_nll;
    std::vector<double> standard_nll;
    MeanSe structured;
    MeanSe standard;
    /// Mean of (structured - standard) over paired trials.
    double mean_difference = 0.0;
    std::size_t structured_wins = 0;
};

/// Pairs trial results of the two variants by position.
inline VariantComparison compare_variants(std::span<const TrialResult> structured,
                                          std::span<const TrialResult> standard) {
    if (structured.empty() || structured.size() != standard.size()) {
        throw ConfigError("variant comparison needs the same, nonzero number of trials per variant");
    }
    VariantComparison out;
    out.dataset_id = structured.front().dataset_id;
    double diff = 0.0;
    for (std::size_t t = 0; t < structured.size(); ++t) {
        if (structured[t].seed != standard[t].seed) {
            throw ConfigError("variant comparison needs paired seeds");
        }
        out.structured_nll.push_back(structured[t].nll);
        out.standard_nll.push_back(standard[t].nll);
        diff += structured[t].nll - standard[t].nll;
        if (structured[t].nll < standard[t].nll) ++out.structured_wins;
    }
    out.structured = mean_se(out.structured_nll);
    out.standard = mean_se(out.standard_nll);
    out.mean_difference = diff / static_cast<double>(structured.size());
    return out;
}

/// Runs both loss variants on identical splits and seeds.
inline VariantComparison variant_comparison(const Dataset& data, const TrialSpec& base, std::size_t trials) {
    if (trials == 0) {
        throw ConfigError("variant comparison needs at least one trial");
    }
    std::vector<TrialResult> structured, standard;
    for (std::size_t t = 0; t < trials; ++t) {
        TrialSpec spec = trial_spec(base, t);
        spec.config.loss = LossKind::structured;
        structured.push_back(run_trial(data, spec));
        spec.config.loss = LossKind::standard;
        standard.push_back(run_trial(data, spec));
    }
    return compare_variants(structured, standard);
}

struct DepthTuning {
    int best_depth = 0;
    std::vector<int> depths;
    std::vector<double> valid_nll;
};

/// Chooses max_depth by validation NLL of the averaged density on one split.
inline DepthTuning tune_max_depth(const Dataset& data, const TrialSpec& spec, const std::vector<int>& grid) {
    if (grid.empty()) {
        throw ConfigError("depth grid is empty");
    }
    spec.validate();
    const TrialSplit split =
        make_split(data.rows(), spec.seed, spec.test_fraction, spec.valid_fraction, spec.test_tail_rows);
    const Dataset train = data.subset(split.train);
    const Dataset valid = data.subset(split.valid);
    DepthTuning out;
    double best = std::numeric_limits<double>::infinity();
    for (const int depth : grid) {
        PrestoConfig config = spec.config;
        config.gbdt.max_depth = depth;
        const auto model = presto_fit(train.x, train.y, valid.x, valid.y, config);
        const auto densities = presto_predict(model, valid.x);
        double total = 0.0;
        for (std::size_t i = 0; i < valid.rows(); ++i) total += densities[i].nll_or_inf(valid.y[i]);
        const double nll = total / static_cast<double>(valid.rows());
        out.depths.push_back(depth);
        out.valid_nll.push_back(nll);
        if (out.best_depth == 0 || nll < best) {
            best = nll;
            out.best_depth = depth;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

namespace detail {

inline Json finite_or_string(double v) {
    if (std::isfinite(v)) return Json(v);
    return Json(v > 0 ? "inf" : (v < 0 ? "-inf" : "nan"));
}

inline std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "nan";
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

inline std::string se_text(const std::optional<double>& se, int digits) {
    return se ? fixed(*se, digits) : std::string("NA");
}

}  // namespace detail

/// One JSON line per trial. Timing is left out unless requested so that
/// identical runs produce identical files.
inline Json to_json(const TrialResult& r, bool include_timing = false) {
    Json coverage = Json::object();
    for (std::size_t l = 0; l < r.coverage.levels.size(); ++l) {
        std::ostringstream key;
        key << std::fixed << std::setprecision(2) << r.coverage.levels[l];
        coverage[key.str()] = r.coverage.rate(l);
    }
    Json j{{"dataset", r.dataset_id},
           {"trial", r.trial},
           {"seed", r.seed},
           {"loss", r.loss},
           {"n_train", r.n_train},
           {"n_valid", r.n_valid},
           {"n_test", r.n_test},
           {"nll", detail::finite_or_string(r.nll)},
           {"support_violations", r.support_violations},
           {"rmse", r.rmse},
           {"coverage", coverage},
           {"max_depth", r.max_depth},
           {"tuned_rounds", r.tuned_rounds}};
    if (!r.densities.empty()) {
        Json ds = Json::array();
        for (const auto& d : r.densities) ds.push_back(to_json(d));
        j["densities"] = std::move(ds);
    }
    if (include_timing) {
        j["seconds"] = r.seconds;
    }
    return j;
}

inline std::string summary_csv_header(const std::vector<double>& levels) {
    std::ostringstream out;
    out << "dataset,N,loss,trials,nll,nll_se,rmse,rmse_se";
    for (const double l : levels) out << ",cov_" << static_cast<int>(std::lround(l * 100));
    out << ",support_violations";
    return out.str();
}

/// Row in the layout of the NLL/RMSE/coverage tables.
inline std::string summary_csv_row(const Summary& s) {
    std::ostringstream out;
    out << s.dataset_id << ',' << s.n << ',' << s.loss << ',' << s.trials << ',' << detail::fixed(s.nll.mean, 3)
        << ',' << detail::se_text(s.nll.se, 3) << ',' << detail::fixed(s.rmse.mean, 3) << ','
        << detail::se_text(s.rmse.se, 3);
    for (const auto& c : s.coverage) out << ',' << detail::fixed(c.mean, 3);
    out << ',' << s.support_violations;
    return out.str();
}

inline std::string learning_curve_csv(const std::vector<double>& curve) {
    std::ostringstream out;
    out << "m,nll\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < curve.size(); ++i) out << i + 1 << ',' << curve[i] << '\n';
    return out.str();
}

inline std::string comparison_csv(const std::vector<VariantComparison>& rows) {
    std::ostringstream out;
    out << "dataset,trials,structured_nll,structured_se,standard_nll,standard_se,mean_difference,structured_wins\n";
    for (const auto& c : rows) {
        out << c.dataset_id << ',' << c.structured_nll.size() << ',' << detail::fixed(c.structured.mean, 3) << ','
            << detail::se_text(c.structured.se, 3) << ',' << detail::fixed(c.standard.mean, 3) << ','
            << detail::se_text(c.standard.se, 3) << ',' << detail::fixed(c.mean_difference, 4) << ','
            << c.structured_wins << '\n';
    }
    return out.str();
}

}  // namespace presto
