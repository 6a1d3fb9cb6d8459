#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "presto/serialize.hpp"

using namespace presto;

namespace {

PrestoModel small_model() {
    Rng rng(3);
    const std::size_t n = 120;
    FeatureMatrix x(n, 2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = i % 7 == 0 ? std::nan("") : rng.uniform();
        y[i] = x(i, 0) + 0.2 * rng.normal();
    }
    PrestoConfig c;
    c.num_classifiers = 2;
    c.interval.num_quantiles = 5;
    c.gbdt.max_trees = 10;
    c.gbdt.max_depth = 3;
    c.gbdt.early_stopping_rounds.reset();
    auto model = presto_fit(x, y, FeatureMatrix(0, 2), {}, c);
    model.feature_names = {"a", "b"};
    model.target_name = "y";
    return model;
}

template <typename F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Serialize, ModelRoundTripIsExact) {
    const auto model = small_model();
    const auto text = to_json(model).dump();
    const auto back = model_from_json(Json::parse(text));
    EXPECT_EQ(to_json(back).dump(), text);
    EXPECT_EQ(back.feature_names, model.feature_names);
    EXPECT_EQ(back.target_name, "y");

    FeatureMatrix probe(3, 2);
    probe(0, 0) = -1.0;
    probe(1, 0) = 0.25;
    probe(1, 1) = std::nan("");
    probe(2, 0) = 2.0;
    const auto a = presto_predict(model, probe);
    const auto b = presto_predict(back, probe);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a[i].edges(), b[i].edges());
        EXPECT_EQ(a[i].heights(), b[i].heights());
    }
}

TEST(Serialize, DensityRoundTrip) {
    const auto d = make_density(std::vector<double>{0.1, 0.6, 0.3}, BinPartition({-1.0, 0.3, 1.0 / 3.0, 9.5}));
    const auto back = density_from_json(Json::parse(to_json(d).dump()));
    EXPECT_EQ(back.edges(), d.edges());
    EXPECT_EQ(back.heights(), d.heights());
}

TEST(Serialize, ConfigRoundTripKeepsEveryField) {
    PrestoConfig c;
    c.num_classifiers = 7;
    c.seed = 123456789012345ULL;
    c.loss = LossKind::standard;
    c.partitions.block_size = 4;
    c.partitions.singleton_weight = 0.25;
    c.interval.method = IntervalMethod::fixed_rss;
    c.interval.grid = {0, 1, 2, 3, 4};
    c.interval.subset_size = 2;
    c.gbdt.learning_rate = 0.07;
    c.gbdt.early_stopping_rounds.reset();
    c.gbdt.structured_curvature = StructuredCurvature::exact;
    const auto j = to_json(c);
    const auto back = presto_config_from_json(Json::parse(j.dump()), "config");
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_FALSE(back.gbdt.early_stopping_rounds.has_value());
    EXPECT_EQ(back.partitions.block_size, 4);
}

TEST(Serialize, PartialConfigKeepsDefaults) {
    const auto c = presto_config_from_json(Json::parse(R"({"num_classifiers": 4, "gbdt": {"max_depth": 2}})"), "config");
    EXPECT_EQ(c.num_classifiers, 4);
    EXPECT_EQ(c.gbdt.max_depth, 2);
    EXPECT_EQ(c.gbdt.learning_rate, PrestoConfig{}.gbdt.learning_rate);
    EXPECT_EQ(c.gbdt.prior_pseudocount, 1.0);
    EXPECT_EQ(c.interval.num_quantiles, IntervalMethodConfig{}.num_quantiles);
}

TEST(Serialize, UnknownKeysAreRejectedWithTheirPath) {
    const auto msg = error_of([] {
        presto_config_from_json(Json::parse(R"({"gbdt": {"max_dept": 3}})"), "config");
    });
    EXPECT_NE(msg.find("config.gbdt.max_dept"), std::string::npos) << msg;
    EXPECT_THROW(presto_config_from_json(Json::parse(R"({"extra": 1})"), "config"), ConfigError);
    EXPECT_THROW(presto_config_from_json(Json::parse(R"({"interval": {"method": "fixed", "grid": [0, 1], "r": 3}})"),
                                         "config"),
                 ConfigError);
}

TEST(Serialize, WrongTypesAndBadValuesAreConfigErrors) {
    EXPECT_THROW(presto_config_from_json(Json::parse(R"({"num_classifiers": "ten"})"), "config"), ConfigError);
    EXPECT_THROW(presto_config_from_json(Json::parse(R"({"num_classifiers": 0})"), "config"), ConfigError);
    EXPECT_THROW(presto_config_from_json(Json::parse(R"({"loss": "hinge"})"), "config"), ConfigError);
    EXPECT_THROW(presto_config_from_json(Json::parse(R"([1, 2])"), "config"), ConfigError);
}

TEST(Serialize, ModelVersionAndShapeAreChecked) {
    auto j = to_json(small_model());
    auto wrong_version = j;
    wrong_version["version"] = 99;
    EXPECT_THROW(model_from_json(wrong_version), DataError);
    auto wrong_format = j;
    wrong_format["format"] = "something.else";
    EXPECT_THROW(model_from_json(wrong_format), DataError);
    auto no_members = j;
    no_members["members"] = Json::array();
    EXPECT_THROW(model_from_json(no_members), DataError);
    auto bad_edges = j;
    bad_edges["members"][0]["edges"] = Json::array({0.0, 1.0});
    EXPECT_THROW(model_from_json(bad_edges), DataError);
    auto bad_forest = j;
    bad_forest["members"][0]["forest"]["version"] = 2;
    EXPECT_THROW(model_from_json(bad_forest), DataError);
}

TEST(Serialize, ForestRoundTrip) {
    const auto model = small_model();
    const auto& forest = model.members[0].forest;
    const auto back = forest_from_json(Json::parse(to_json(forest).dump()));
    EXPECT_EQ(back.rounds(), forest.rounds());
    EXPECT_EQ(back.base_scores(), forest.base_scores());
    const std::vector<double> row{0.3, std::nan("")};
    EXPECT_EQ(back.predict_proba_row(row), forest.predict_proba_row(row));
}
