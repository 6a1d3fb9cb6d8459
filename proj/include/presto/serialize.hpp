#pragma once

// JSON persistence for densities, forests, configurations and model bundles.
// Objects read from JSON reject unknown keys and name the offending path.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "presto/density.hpp"
#include "presto/gbdt.hpp"
#include "presto/intervals.hpp"
#include "presto/regressor.hpp"

namespace presto {

using Json = nlohmann::ordered_json;

inline constexpr int kForestFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kConfigSchemaVersion = 1;

/// Reads fields of a JSON object, tracking which keys were consumed so that
/// leftovers can be reported as unknown.
class JsonObjectReader {
public:
    JsonObjectReader(const Json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    bool has(const std::string& key) const { return object_.contains(key) && !object_.at(key).is_null(); }

    const Json& at(const std::string& key) {
        used_.insert(key);
        if (!object_.contains(key)) {
            throw ConfigError(field(key) + ": required field is missing");
        }
        return object_.at(key);
    }

    template <typename T>
    T get(const std::string& key) {
        const Json& value = at(key);
        try {
            return value.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(field(key) + ": has the wrong type");
        }
    }

    template <typename T>
    T get_or(const std::string& key, T fallback) {
        used_.insert(key);
        if (!has(key)) {
            return fallback;
        }
        return get<T>(key);
    }

    template <typename T>
    std::optional<T> get_optional(const std::string& key) {
        used_.insert(key);
        if (!has(key)) {
            return std::nullopt;
        }
        return get<T>(key);
    }

    std::string field(const std::string& key) const { return path_ + "." + key; }

    /// Throws on any key that was never read.
    void finish() const {
        for (const auto& item : object_.items()) {
            if (!used_.count(item.key())) {
                throw ConfigError(field(item.key()) + ": unknown key");
            }
        }
    }

private:
    const Json& object_;
    std::string path_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

inline Json to_json(const PiecewiseConstantDensity& d) {
    return Json{{"edges", d.edges()}, {"heights", d.heights()}};
}

inline PiecewiseConstantDensity density_from_json(const Json& j) {
    JsonObjectReader r(j, "density");
    auto edges = r.get<std::vector<double>>("edges");
    auto heights = r.get<std::vector<double>>("heights");
    r.finish();
    return PiecewiseConstantDensity(BinPartition(std::move(edges)), std::move(heights));
}

// ---------------------------------------------------------------------------
// Forests
// ---------------------------------------------------------------------------

namespace detail {

inline Json tree_node_to_json(const RegressionTree& tree, int index) {
    const auto& n = tree.nodes[static_cast<std::size_t>(index)];
    if (n.is_leaf()) {
        return Json{{"leaf", n.value}};
    }
    return Json{{"feature", n.feature},
                {"threshold", n.threshold},
                {"default_left", n.default_left},
                {"left", tree_node_to_json(tree, n.left)},
                {"right", tree_node_to_json(tree, n.right)}};
}

inline int tree_node_from_json(const Json& j, RegressionTree& tree, std::size_t num_features, int depth) {
    if (depth > 64) {
        throw DataError("tree is nested too deeply");
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    JsonObjectReader r(j, "node");
    if (r.has("leaf")) {
        tree.nodes.back().value = r.get<double>("leaf");
        r.finish();
        return index;
    }
    const int feature = r.get<int>("feature");
    if (feature < 0 || static_cast<std::size_t>(feature) >= num_features) {
        throw DataError("tree node references feature " + std::to_string(feature));
    }
    const double threshold = r.get<double>("threshold");
    const bool default_left = r.get<bool>("default_left");
    const int left = tree_node_from_json(r.at("left"), tree, num_features, depth + 1);
    const int right = tree_node_from_json(r.at("right"), tree, num_features, depth + 1);
    r.finish();
    auto& n = tree.nodes[static_cast<std::size_t>(index)];
    n.feature = feature;
    n.threshold = threshold;
    n.default_left = default_left;
    n.left = left;
    n.right = right;
    return index;
}

}  // namespace detail

inline Json to_json(const BoostedForest& forest) {
    Json trees = Json::array();
    for (const auto& t : forest.trees()) {
        trees.push_back(detail::tree_node_to_json(t, 0));
    }
    return Json{{"format", "presto.forest"},
                {"version", kForestFormatVersion},
                {"num_classes", forest.num_classes()},
                {"num_features", forest.num_features()},
                {"rounds", forest.rounds()},
                {"base_scores", forest.base_scores()},
                {"trees", std::move(trees)}};
}

inline BoostedForest forest_from_json(const Json& j) {
    JsonObjectReader r(j, "forest");
    if (r.get<std::string>("format") != "presto.forest") {
        throw DataError("not a forest document");
    }
    const int version = r.get<int>("version");
    if (version != kForestFormatVersion) {
        throw DataError("unsupported forest format version " + std::to_string(version));
    }
    const int k = r.get<int>("num_classes");
    const auto f = r.get<std::size_t>("num_features");
    const auto rounds = r.get<std::size_t>("rounds");
    auto base = r.get<std::vector<double>>("base_scores");
    std::vector<RegressionTree> trees;
    for (const auto& tj : r.at("trees")) {
        RegressionTree t;
        detail::tree_node_from_json(tj, t, f, 0);
        trees.push_back(std::move(t));
    }
    r.finish();
    if (k < 1 || trees.size() != rounds * static_cast<std::size_t>(k)) {
        throw DataError("forest tree count does not match rounds x classes");
    }
    return BoostedForest(k, f, std::move(base), std::move(trees));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

inline Json to_json(const IntervalMethodConfig& c) {
    Json j{{"method", to_string(c.method)}};
    if (c.method == IntervalMethod::rand_quantile) {
        j["num_quantiles"] = c.num_quantiles;
        j["extend"] = c.extend;
        j["extend_params"] = Json{{"q_min", c.extend_params.q_min},
                                  {"q_max", c.extend_params.q_max},
                                  {"scale", c.extend_params.scale}};
    } else {
        j["grid"] = c.grid;
        if (c.subset_size) {
            j["subset_size"] = *c.subset_size;
        }
    }
    return j;
}

inline IntervalMethodConfig interval_config_from_json(const Json& j, const std::string& path,
                                                      IntervalMethodConfig c = {}) {
    JsonObjectReader r(j, path);
    c.method = interval_method_from_string(r.get_or<std::string>("method", to_string(c.method)));
    c.num_quantiles = r.get_or<int>("num_quantiles", c.num_quantiles);
    c.extend = r.get_or<bool>("extend", c.extend);
    if (r.has("extend_params")) {
        JsonObjectReader e(r.at("extend_params"), r.field("extend_params"));
        c.extend_params.q_min = e.get_or<double>("q_min", c.extend_params.q_min);
        c.extend_params.q_max = e.get_or<double>("q_max", c.extend_params.q_max);
        c.extend_params.scale = e.get_or<double>("scale", c.extend_params.scale);
        e.finish();
    } else {
        r.get_optional<Json>("extend_params");
    }
    c.grid = r.get_or<std::vector<double>>("grid", c.grid);
    if (j.contains("subset_size")) {
        c.subset_size = r.get_optional<std::size_t>("subset_size");
    }
    r.finish();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

inline Json to_json(const GbdtConfig& g) {
    return Json{{"learning_rate", g.learning_rate},
                {"max_depth", g.max_depth},
                {"max_trees", g.max_trees},
                {"early_stopping_rounds", g.early_stopping_rounds ? Json(*g.early_stopping_rounds) : Json(nullptr)},
                {"min_samples_leaf", g.min_samples_leaf},
                {"colsample_per_node", g.colsample_per_node},
                {"lambda", g.lambda},
                {"min_split_gain", g.min_split_gain},
                {"max_bins", g.max_bins},
                {"prior_pseudocount", g.prior_pseudocount},
                {"structured_curvature", to_string(g.structured_curvature)}};
}

inline GbdtConfig gbdt_config_from_json(const Json& j, const std::string& path, GbdtConfig g = {}) {
    JsonObjectReader r(j, path);
    g.learning_rate = r.get_or<double>("learning_rate", g.learning_rate);
    g.max_depth = r.get_or<int>("max_depth", g.max_depth);
    g.max_trees = r.get_or<int>("max_trees", g.max_trees);
    if (j.contains("early_stopping_rounds")) {
        g.early_stopping_rounds = r.get_optional<int>("early_stopping_rounds");
    }
    g.min_samples_leaf = r.get_or<int>("min_samples_leaf", g.min_samples_leaf);
    g.colsample_per_node = r.get_or<double>("colsample_per_node", g.colsample_per_node);
    g.lambda = r.get_or<double>("lambda", g.lambda);
    g.min_split_gain = r.get_or<double>("min_split_gain", g.min_split_gain);
    g.max_bins = r.get_or<int>("max_bins", g.max_bins);
    g.prior_pseudocount = r.get_or<double>("prior_pseudocount", g.prior_pseudocount);
    g.structured_curvature = structured_curvature_from_string(
        r.get_or<std::string>("structured_curvature", to_string(g.structured_curvature)));
    r.finish();
    try {
        GbdtConfig probe = g;
        probe.num_classes = 2;
        probe.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return g;
}

inline Json to_json(const PrestoConfig& c) {
    return Json{{"num_classifiers", c.num_classifiers},
                {"seed", c.seed},
                {"threads", c.threads},
                {"loss", to_string(c.loss)},
                {"partitions",
                 Json{{"singleton_weight", c.partitions.singleton_weight},
                      {"block_size", c.partitions.block_size ? Json(*c.partitions.block_size) : Json(nullptr)},
                      {"singletons_only", c.partitions.singletons_only}}},
                {"interval", to_json(c.interval)},
                {"gbdt", to_json(c.gbdt)}};
}

/// Reads a PrestoConfig, starting from `base` for any field not present.
inline PrestoConfig presto_config_from_json(const Json& j, const std::string& path, PrestoConfig c = {}) {
    JsonObjectReader r(j, path);
    c.num_classifiers = r.get_or<int>("num_classifiers", c.num_classifiers);
    c.seed = r.get_or<std::uint64_t>("seed", c.seed);
    c.threads = r.get_or<int>("threads", c.threads);
    if (r.has("loss")) {
        c.loss = loss_kind_from_string(r.get<std::string>("loss"));
    } else {
        r.get_optional<std::string>("loss");
    }
    if (r.has("partitions")) {
        JsonObjectReader p(r.at("partitions"), r.field("partitions"));
        c.partitions.singleton_weight = p.get_or<double>("singleton_weight", c.partitions.singleton_weight);
        if (r.at("partitions").contains("block_size")) {
            c.partitions.block_size = p.get_optional<int>("block_size");
        }
        c.partitions.singletons_only = p.get_or<bool>("singletons_only", c.partitions.singletons_only);
        p.finish();
    } else {
        r.get_optional<Json>("partitions");
    }
    if (r.has("interval")) {
        c.interval = interval_config_from_json(r.at("interval"), r.field("interval"), c.interval);
    } else {
        r.get_optional<Json>("interval");
    }
    if (r.has("gbdt")) {
        c.gbdt = gbdt_config_from_json(r.at("gbdt"), r.field("gbdt"), c.gbdt);
    } else {
        r.get_optional<Json>("gbdt");
    }
    r.finish();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

inline Json to_json(const PrestoModel& model) {
    Json members = Json::array();
    for (const auto& m : model.members) {
        members.push_back(Json{{"edges", m.partition.edges()}, {"forest", to_json(m.forest)}});
    }
    Json j{{"format", "presto.model"}, {"version", kModelFormatVersion}, {"config", to_json(model.config)}};
    if (!model.feature_names.empty()) {
        j["feature_names"] = model.feature_names;
    }
    if (!model.target_name.empty()) {
        j["target_name"] = model.target_name;
    }
    j["members"] = std::move(members);
    return j;
}

inline PrestoModel model_from_json(const Json& j) {
    JsonObjectReader r(j, "model");
    if (r.get<std::string>("format") != "presto.model") {
        throw DataError("not a model document");
    }
    const int version = r.get<int>("version");
    if (version != kModelFormatVersion) {
        throw DataError("unsupported model format version " + std::to_string(version));
    }
    PrestoModel model;
    model.config = presto_config_from_json(r.at("config"), "model.config");
    model.feature_names = r.get_or<std::vector<std::string>>("feature_names", {});
    model.target_name = r.get_or<std::string>("target_name", "");
    for (const auto& mj : r.at("members")) {
        JsonObjectReader m(mj, "model.members[]");
        BinPartition partition(m.get<std::vector<double>>("edges"));
        BoostedForest forest = forest_from_json(m.at("forest"));
        m.finish();
        if (static_cast<std::size_t>(forest.num_classes()) != partition.bin_count()) {
            throw DataError("model member has " + std::to_string(forest.num_classes()) + " classes for " +
                            std::to_string(partition.bin_count()) + " bins");
        }
        model.members.push_back({std::move(partition), std::move(forest)});
    }
    r.finish();
    if (model.members.empty()) {
        throw DataError("model has no members");
    }
    return model;
}

}  // namespace presto
