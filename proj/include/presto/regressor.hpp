#pragma once

// The probabilistic regressor: m boosted classifiers, each trained on its own
// random coarsening of the target, whose class probabilities become
// piecewise-constant densities that are averaged pointwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "presto/core.hpp"
#include "presto/density.hpp"
#include "presto/gbdt.hpp"
#include "presto/intervals.hpp"
#include "presto/structured_loss.hpp"

namespace presto {

enum class LossKind { standard, structured };

inline std::string to_string(LossKind loss) { return loss == LossKind::standard ? "standard" : "structured"; }

inline LossKind loss_kind_from_string(const std::string& name) {
    if (name == "standard") return LossKind::standard;
    if (name == "structured") return LossKind::structured;
    throw ConfigError("unknown loss '" + name + "' (expected standard or structured)");
}

/// How the structured variant builds its partition set for k bins.
struct PartitionPolicy {
    double singleton_weight = 0.1;
    /// Fixed block size; nullopt uses round(sqrt(k)).
    std::optional<int> block_size;
    /// Force the singleton-only partition set (structured loss reduces to standard).
    bool singletons_only = false;

    WeightedPartitionSet build(int num_classes) const {
        if (singletons_only) {
            return WeightedPartitionSet::singletons(num_classes);
        }
        return ordinal_partition_for(num_classes, singleton_weight, block_size);
    }
};

struct PrestoConfig {
    int num_classifiers = 10;
    IntervalMethodConfig interval;
    /// Template for every forest; num_classes, seed and loss are set per classifier.
    /// Extension bins hold no training targets, hence the nonzero prior pseudo-count.
    GbdtConfig gbdt = [] {
        GbdtConfig g;
        g.prior_pseudocount = 1.0;
        return g;
    }();
    LossKind loss = LossKind::structured;
    PartitionPolicy partitions;
    std::uint64_t seed = 0;
    /// Worker threads for the independent classifier fits.
    int threads = 1;

    void validate() const {
        if (num_classifiers < 1) throw ConfigError("num_classifiers must be >= 1");
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (!(partitions.singleton_weight > 0.0 && partitions.singleton_weight < 1.0)) {
            throw ConfigError("singleton_weight must lie in (0, 1)");
        }
        if (partitions.block_size && *partitions.block_size < 1) throw ConfigError("block_size must be >= 1");
        interval.validate();
        GbdtConfig probe = gbdt;
        probe.num_classes = 2;
        probe.structured_partitions.reset();
        probe.validate();
    }
};

struct PrestoMember {
    BinPartition partition;
    BoostedForest forest;
};

struct PrestoModel {
    std::vector<PrestoMember> members;
    PrestoConfig config;
    /// Column names seen at fit time; empty when unknown.
    std::vector<std::string> feature_names;
    std::string target_name;
};

/// Per-classifier details from a fit, used to retrain at tuned round counts.
struct MemberFitInfo {
    std::size_t rounds = 0;
    std::size_t best_round = 0;
    double best_valid_loss = 0.0;
};

struct PrestoFitResult {
    PrestoModel model;
    std::vector<MemberFitInfo> members;
};

namespace detail {

/// Runs job(i) for i in [0, count) on `threads` workers; the first exception
/// (lowest index) is rethrown after all workers finish.
template <typename Job>
void run_indexed(std::size_t count, int threads, Job&& job) {
    std::vector<std::exception_ptr> errors(count);
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::mutex mutex;
        std::size_t next = 0;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, count); ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = 0;
                    {
                        std::lock_guard lock(mutex);
                        if (next >= count) return;
                        i = next++;
                    }
                    try {
                        job(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline GbdtConfig member_gbdt_config(const PrestoConfig& config, int num_classes, std::size_t index) {
    GbdtConfig g = config.gbdt;
    g.num_classes = num_classes;
    g.seed = splitmix64(config.seed + index) ^ 0x5851f42d4c957f2dULL;
    if (config.loss == LossKind::structured) {
        g.structured_partitions = config.partitions.build(num_classes);
    } else {
        g.structured_partitions.reset();
    }
    return g;
}

template <typename Error>
[[noreturn]] void rethrow_tagged(std::size_t index, const Error& e) {
    throw Error("classifier " + std::to_string(index) + ": " + e.what());
}

}  // namespace detail

/// Partition for classifier `index` drawn from its own stream (seed + index).
inline BinPartition draw_partition(const PrestoConfig& config, std::span<const double> y_train, std::size_t index) {
    Rng rng = Rng::stream(config.seed, index);
    return select_intervals(config.interval, y_train, rng);
}

/// Fits m classifiers. Validation targets are labelled with each
/// classifier's partition, values outside it going to the nearest end bin.
/// When `rounds` is given, classifier i trains exactly rounds[i] rounds with
/// no early stopping; when `partitions` is given, those are used verbatim.
inline PrestoFitResult presto_fit_detailed(const FeatureMatrix& x_train, std::span<const double> y_train,
                                           const FeatureMatrix& x_valid, std::span<const double> y_valid,
                                           const PrestoConfig& config,
                                           std::optional<std::vector<std::size_t>> rounds = std::nullopt,
                                           std::optional<std::vector<BinPartition>> partitions = std::nullopt) {
    config.validate();
    if (x_train.rows() != y_train.size()) {
        throw DataError("training features have " + std::to_string(x_train.rows()) + " rows but " +
                        std::to_string(y_train.size()) + " targets");
    }
    if (x_valid.rows() != y_valid.size()) {
        throw DataError("validation features have " + std::to_string(x_valid.rows()) + " rows but " +
                        std::to_string(y_valid.size()) + " targets");
    }
    const auto m = static_cast<std::size_t>(config.num_classifiers);
    if (rounds && rounds->size() != m) {
        throw ConfigError("expected " + std::to_string(m) + " round counts, got " + std::to_string(rounds->size()));
    }
    if (partitions && partitions->size() != m) {
        throw ConfigError("expected " + std::to_string(m) + " partitions, got " +
                          std::to_string(partitions->size()));
    }

    PrestoFitResult result;
    result.model.config = config;
    result.model.members.resize(m);
    result.members.resize(m);

    detail::run_indexed(m, config.threads, [&](std::size_t i) {
        try {
            BinPartition partition = partitions ? (*partitions)[i] : draw_partition(config, y_train, i);
            // Frozen partitions may not cover a refit fold, so clamp in that case.
            const auto labels = partitions ? discretize_clamped(y_train, partition) : discretize(y_train, partition);
            const auto valid_labels = discretize_clamped(y_valid, partition);
            GbdtConfig g = detail::member_gbdt_config(config, static_cast<int>(partition.bin_count()), i);
            const bool priors_only = rounds && (*rounds)[i] == 0;
            if (rounds) {
                g.max_trees = static_cast<int>(std::max<std::size_t>((*rounds)[i], 1));
                g.early_stopping_rounds.reset();
            }
            auto fitted = fit_with_trace(x_train, labels, x_valid, valid_labels, g);
            if (priors_only) {
                fitted.forest = BoostedForest(fitted.forest.num_classes(), fitted.forest.num_features(),
                                              fitted.forest.base_scores(), {});
            }
            MemberFitInfo info;
            info.rounds = fitted.forest.rounds();
            info.best_round = fitted.trace.best_round;
            info.best_valid_loss = fitted.trace.valid_loss.empty()
                                       ? 0.0
                                       : fitted.trace.valid_loss[std::min(fitted.trace.best_round,
                                                                          fitted.trace.valid_loss.size() - 1)];
            result.members[i] = info;
            result.model.members[i] = PrestoMember{std::move(partition), std::move(fitted.forest)};
        } catch (const ConfigError& e) {
            detail::rethrow_tagged(i, e);
        } catch (const DataError& e) {
            detail::rethrow_tagged(i, e);
        } catch (const InvariantError& e) {
            detail::rethrow_tagged(i, e);
        }
    });
    return result;
}

inline PrestoModel presto_fit(const FeatureMatrix& x_train, std::span<const double> y_train,
                              const FeatureMatrix& x_valid, std::span<const double> y_valid,
                              const PrestoConfig& config) {
    return presto_fit_detailed(x_train, y_train, x_valid, y_valid, config).model;
}

inline void check_feature_count(const PrestoModel& model, const FeatureMatrix& x) {
    if (model.members.empty()) {
        throw ConfigError("model has no classifiers");
    }
    const std::size_t expected = model.members.front().forest.num_features();
    if (x.rows() > 0 && x.cols() != expected) {
        throw DataError("input has " + std::to_string(x.cols()) + " features, model expects " +
                        std::to_string(expected));
    }
}

/// Densities of every classifier for every row: result[row][member].
inline std::vector<std::vector<PiecewiseConstantDensity>> member_densities(const PrestoModel& model,
                                                                           const FeatureMatrix& x) {
    check_feature_count(model, x);
    std::vector<std::vector<PiecewiseConstantDensity>> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        out[r].reserve(model.members.size());
        for (const auto& member : model.members) {
            const auto probs = member.forest.predict_proba_row(x.row(r));
            out[r].push_back(make_density(probs, member.partition));
        }
    }
    return out;
}

/// Averaged predicted density for each row.
inline std::vector<PiecewiseConstantDensity> presto_predict(const PrestoModel& model, const FeatureMatrix& x) {
    auto per_member = member_densities(model, x);
    std::vector<PiecewiseConstantDensity> out;
    out.reserve(per_member.size());
    for (const auto& row : per_member) {
        out.push_back(average(row));
    }
    return out;
}

/// Mean of each predicted density.
inline std::vector<double> presto_point_estimate(const PrestoModel& model, const FeatureMatrix& x) {
    std::vector<double> out;
    for (const auto& d : presto_predict(model, x)) {
        out.push_back(d.mean());
    }
    return out;
}

struct PredictionInterval {
    double lo;
    double hi;
};

/// Central interval of the density with the given coverage.
inline PredictionInterval central_interval(const PiecewiseConstantDensity& d, double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw ConfigError("coverage must lie in (0, 1), got " + std::to_string(coverage));
    }
    const double alpha = 1.0 - coverage;
    return {d.quantile(alpha / 2.0), d.quantile(1.0 - alpha / 2.0)};
}

inline std::vector<PredictionInterval> presto_interval(const PrestoModel& model, const FeatureMatrix& x,
                                                       double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw ConfigError("coverage must lie in (0, 1), got " + std::to_string(coverage));
    }
    std::vector<PredictionInterval> out;
    for (const auto& d : presto_predict(model, x)) {
        out.push_back(central_interval(d, coverage));
    }
    return out;
}

}  // namespace presto
