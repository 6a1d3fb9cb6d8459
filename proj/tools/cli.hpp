#pragma once

// Command-line front end: fit / predict / bench.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 internal invariant violation. PRESTO_OUTPUT_DIR replaces the configured
// output directory; an explicit --output-dir flag still wins over it.

#include <openssl/evp.h>
#include <unistd.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "presto/csv.hpp"
#include "presto/eval.hpp"
#include "presto/regressor.hpp"
#include "presto/serialize.hpp"

#ifndef PRESTO_DEFAULT_DATASETS_CONFIG
#define PRESTO_DEFAULT_DATASETS_CONFIG "configs/datasets.json"
#endif

namespace presto::cli {

namespace fs = std::filesystem;

inline constexpr int kRunConfigSchemaVersion = 1;

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_invariant = 3 };

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Writes to a sibling temp file and renames it over `path`.
inline void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write '" + tmp.string() + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw DataError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw DataError("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

/// Hash git uses for a blob with this content (SHA-1 over "blob <n>\0" + data).
inline std::string git_blob_sha1(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &length) != 1) {
        EVP_MD_CTX_free(ctx);
        throw InvariantError("SHA-1 computation failed");
    }
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

/// Parses a JSON file. Syntax errors are reported with line and column as
/// configuration errors, or as data errors for model files.
inline Json parse_json_file(const fs::path& path, bool is_config) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::string message = path.string() + ": " + e.what();
        if (is_config) throw ConfigError(message);
        throw DataError(message);
    }
}

inline fs::path resolve(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
}

/// --output-dir flag, else PRESTO_OUTPUT_DIR, else the configured value, else ".".
inline fs::path output_dir(const std::optional<std::string>& flag, const std::optional<std::string>& configured) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv("PRESTO_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    if (configured && !configured->empty()) return *configured;
    return ".";
}

/// Shortest text that reads back as the same double.
inline std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
    return std::string(buffer, result.ptr);
}

// ---------------------------------------------------------------------------
// fit configuration
// ---------------------------------------------------------------------------

struct FitRunConfig {
    fs::path train;
    std::optional<fs::path> valid;
    std::string target;
    /// Used to carve a validation fold out of `train` when no file is given.
    double valid_fraction = 0.2;
    /// Retrain on train+valid at the tuned round counts.
    bool refit = true;
    bool freeze_partitions = false;
    std::string model_file = "model.json";
    std::optional<std::string> output_dir;
    PrestoConfig presto;
};

inline FitRunConfig fit_config_from_json(const Json& j, const fs::path& base_dir) {
    JsonObjectReader r(j, "config");
    const int version = r.get<int>("schema_version");
    if (version != kRunConfigSchemaVersion) {
        throw ConfigError("config.schema_version: unsupported value " + std::to_string(version));
    }
    FitRunConfig c;
    {
        JsonObjectReader d(r.at("data"), "config.data");
        c.train = resolve(base_dir, d.get<std::string>("train"));
        if (const auto valid = d.get_optional<std::string>("valid")) {
            c.valid = resolve(base_dir, *valid);
        }
        c.target = d.get<std::string>("target");
        d.finish();
    }
    c.valid_fraction = r.get_or<double>("valid_fraction", c.valid_fraction);
    if (!(c.valid_fraction > 0.0 && c.valid_fraction < 1.0)) {
        throw ConfigError("config.valid_fraction: must lie in (0, 1)");
    }
    c.refit = r.get_or<bool>("refit", c.refit);
    c.freeze_partitions = r.get_or<bool>("freeze_partitions", c.freeze_partitions);
    c.model_file = r.get_or<std::string>("model_file", c.model_file);
    if (c.model_file.empty()) {
        throw ConfigError("config.model_file: must not be empty");
    }
    c.output_dir = r.get_optional<std::string>("output_dir");
    if (r.has("presto")) {
        c.presto = presto_config_from_json(r.at("presto"), "config.presto");
    } else {
        r.get_optional<Json>("presto");
    }
    r.finish();
    return c;
}

inline Json to_json(const FitRunConfig& c) {
    Json data{{"train", c.train.string()}};
    if (c.valid) data["valid"] = c.valid->string();
    data["target"] = c.target;
    Json j{{"schema_version", kRunConfigSchemaVersion},
           {"data", data},
           {"valid_fraction", c.valid_fraction},
           {"refit", c.refit},
           {"freeze_partitions", c.freeze_partitions},
           {"model_file", c.model_file}};
    if (c.output_dir) j["output_dir"] = *c.output_dir;
    j["presto"] = presto::to_json(c.presto);
    return j;
}

// ---------------------------------------------------------------------------
// Dataset table for bench
// ---------------------------------------------------------------------------

struct DatasetEntry {
    std::string id;
    fs::path path;
    std::string target;
    std::optional<std::size_t> rows;
    PrestoConfig presto;
    std::vector<int> depth_grid;
    std::optional<std::size_t> test_tail_rows;
};

inline DatasetEntry dataset_entry(const Json& table, const std::string& id, const fs::path& base_dir) {
    JsonObjectReader r(table, "datasets_config");
    const int version = r.get<int>("schema_version");
    if (version != kRunConfigSchemaVersion) {
        throw ConfigError("datasets_config.schema_version: unsupported value " + std::to_string(version));
    }
    const Json& datasets = r.at("datasets");
    r.finish();
    if (!datasets.is_object() || !datasets.contains(id)) {
        std::string known;
        if (datasets.is_object()) {
            for (const auto& item : datasets.items()) known += (known.empty() ? "" : ", ") + item.key();
        }
        throw ConfigError("unknown dataset '" + id + "' (known: " + known + ")");
    }
    const std::string path = "datasets." + id;
    JsonObjectReader d(datasets.at(id), path);
    DatasetEntry e;
    e.id = id;
    e.path = resolve(base_dir, d.get<std::string>("path"));
    e.target = d.get<std::string>("target");
    e.rows = d.get_optional<std::size_t>("rows");
    if (d.has("presto")) {
        e.presto = presto_config_from_json(d.at("presto"), path + ".presto");
    } else {
        d.get_optional<Json>("presto");
    }
    e.depth_grid = d.get_or<std::vector<int>>("depth_grid", {});
    e.test_tail_rows = d.get_optional<std::size_t>("test_tail_rows");
    d.finish();
    return e;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

inline Json input_record(const fs::path& path, const std::string& content, std::size_t rows) {
    return Json{{"path", path.string()}, {"git_blob_sha1", git_blob_sha1(content)}, {"rows", rows}};
}

inline Dataset parse_dataset(const fs::path& path, const std::string& content, const std::string& target) {
    std::istringstream in(content);
    try {
        return read_csv(in, target);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

inline int cmd_fit(const std::string& config_path, const std::optional<std::string>& output_flag, Streams io) {
    const fs::path cfg_path(config_path);
    const FitRunConfig config =
        fit_config_from_json(parse_json_file(cfg_path, true), cfg_path.parent_path().empty() ? fs::path(".")
                                                                                              : cfg_path.parent_path());
    const std::string train_text = read_file(config.train);
    Dataset train_all = parse_dataset(config.train, train_text, config.target);

    Json inputs{{"train", input_record(config.train, train_text, train_all.rows())}};
    Dataset train, valid;
    if (config.valid) {
        const std::string valid_text = read_file(*config.valid);
        valid = parse_dataset(*config.valid, valid_text, config.target);
        if (valid.feature_names != train_all.feature_names) {
            throw DataError("validation file columns differ from the training file");
        }
        inputs["valid"] = input_record(*config.valid, valid_text, valid.rows());
        train = std::move(train_all);
    } else {
        const std::size_t n = train_all.rows();
        const auto n_valid = static_cast<std::size_t>(std::llround(config.valid_fraction * static_cast<double>(n)));
        if (n_valid == 0 || n_valid >= n) {
            throw DataError(config.train.string() + ": " + std::to_string(n) +
                            " rows are too few to hold out a validation fold");
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng(config.presto.seed ^ 0x243f6a8885a308d3ULL);
        rng.shuffle(order);
        const std::vector<std::size_t> valid_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_valid));
        const std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_valid), order.end());
        train = train_all.subset(train_rows);
        valid = train_all.subset(valid_rows);
    }

    PrestoModel model;
    std::vector<std::size_t> rounds;
    std::vector<MemberFitInfo> info;
    if (config.refit) {
        auto result = fit_and_refit(train, valid, config.presto, config.freeze_partitions);
        model = std::move(result.model);
        rounds = std::move(result.tuned_rounds);
        info = std::move(result.validation);
    } else {
        auto result = presto_fit_detailed(train.x, train.y, valid.x, valid.y, config.presto);
        model = std::move(result.model);
        model.feature_names = train.feature_names;
        model.target_name = train.target_name;
        info = result.members;
        for (const auto& m : info) rounds.push_back(m.rounds);
    }

    const fs::path dir = output_dir(output_flag, config.output_dir);
    const fs::path model_path = dir / config.model_file;
    const std::string model_text = presto::to_json(model).dump() + "\n";
    atomic_write(model_path, model_text);

    Json members = Json::array();
    for (std::size_t i = 0; i < model.members.size(); ++i) {
        members.push_back(Json{{"index", i},
                               {"partition_stream_seed", splitmix64(config.presto.seed + i)},
                               {"forest_seed", detail::member_gbdt_config(config.presto, 2, i).seed},
                               {"bins", model.members[i].partition.bin_count()},
                               {"tuned_rounds", rounds[i]},
                               {"best_valid_loss", info[i].best_valid_loss}});
    }
    Json manifest{{"schema_version", kRunConfigSchemaVersion},
                  {"command", "fit"},
                  {"config", to_json(config)},
                  {"seed", config.presto.seed},
                  {"members", members},
                  {"inputs", inputs},
                  {"model", Json{{"path", model_path.string()}, {"git_blob_sha1", git_blob_sha1(model_text)}}}};
    fs::path manifest_path = model_path;
    manifest_path += ".manifest.json";
    atomic_write(manifest_path, manifest.dump(2) + "\n");
    io.out << "wrote " << model_path.string() << " (" << model.members.size() << " classifiers)\n";
    return exit_ok;
}

/// Reorders input columns to the model's feature order when names are known.
inline FeatureMatrix align_features(const PrestoModel& model, const Dataset& input) {
    const std::size_t expected = model.members.front().forest.num_features();
    if (model.feature_names.empty()) {
        if (input.x.cols() != expected) {
            throw DataError("input has " + std::to_string(input.x.cols()) + " feature columns, model expects " +
                            std::to_string(expected));
        }
        return input.x;
    }
    std::vector<std::size_t> source;
    for (const auto& name : model.feature_names) {
        const auto it = std::find(input.feature_names.begin(), input.feature_names.end(), name);
        if (it == input.feature_names.end()) {
            throw DataError("input is missing feature column '" + name + "'");
        }
        source.push_back(static_cast<std::size_t>(it - input.feature_names.begin()));
    }
    if (input.feature_names.size() != model.feature_names.size()) {
        for (const auto& name : input.feature_names) {
            if (std::find(model.feature_names.begin(), model.feature_names.end(), name) == model.feature_names.end()) {
                throw DataError("input has unexpected column '" + name + "'");
            }
        }
    }
    FeatureMatrix x(input.rows(), source.size());
    for (std::size_t r = 0; r < input.rows(); ++r) {
        for (std::size_t c = 0; c < source.size(); ++c) x(r, c) = input.x(r, source[c]);
    }
    return x;
}

struct PredictOptions {
    std::string model;
    std::string input;
    std::optional<std::string> target;
    bool density = false;
    bool mean = false;
    std::optional<double> interval;
    bool nll = false;
    std::optional<std::string> output;
    std::optional<std::string> output_dir;
};

inline int cmd_predict(const PredictOptions& opt, Streams io) {
    const int modes = int(opt.density) + int(opt.mean) + int(opt.interval.has_value()) + int(opt.nll);
    if (modes != 1) {
        throw ConfigError("choose exactly one of --density, --mean, --interval, --nll");
    }
    if (opt.interval && !(*opt.interval > 0.0 && *opt.interval < 1.0)) {
        throw ConfigError("--interval: level must lie in (0, 1)");
    }
    PrestoModel model;
    {
        const Json j = parse_json_file(opt.model, false);
        try {
            model = model_from_json(j);
        } catch (const ConfigError& e) {
            throw DataError(opt.model + ": " + e.what());
        }
    }
    const std::string target = opt.target.value_or(model.target_name);
    const Dataset input = read_csv_file(opt.input, target, !opt.nll);
    if (opt.nll && !input.has_target()) {
        throw DataError("--nll needs the target column in the input");
    }
    const FeatureMatrix x = align_features(model, input);
    const auto densities = presto_predict(model, x);

    std::ostringstream text;
    if (opt.density) {
        for (const auto& d : densities) text << presto::to_json(d).dump() << '\n';
    } else if (opt.mean) {
        text << "mean\n";
        for (const auto& d : densities) text << number(d.mean()) << '\n';
    } else if (opt.interval) {
        text << "lower,upper\n";
        for (const auto& d : densities) {
            const auto iv = central_interval(d, *opt.interval);
            text << number(iv.lo) << ',' << number(iv.hi) << '\n';
        }
    } else {
        text << "row,nll\n";
        const auto report = nll_eval(densities, input.y);
        for (std::size_t i = 0; i < densities.size(); ++i) {
            text << i << ',' << number(densities[i].nll_or_inf(input.y[i])) << '\n';
        }
        text << "mean," << number(report.mean) << '\n';
    }
    if (opt.output) {
        const fs::path out_path = fs::path(*opt.output).is_absolute()
                                      ? fs::path(*opt.output)
                                      : output_dir(opt.output_dir, std::nullopt) / *opt.output;
        atomic_write(out_path, text.str());
    } else {
        io.out << text.str();
    }
    return exit_ok;
}

struct BenchOptions {
    std::string dataset;
    std::string datasets_config = PRESTO_DEFAULT_DATASETS_CONFIG;
    std::optional<std::string> data;
    std::size_t trials = 20;
    std::string variant = "structured";
    std::uint64_t seed = 0;
    std::optional<int> max_depth;
    std::optional<int> num_classifiers;
    std::optional<int> learning_curve;
    bool compare_variants = false;
    bool freeze_partitions = false;
    bool dump_densities = false;
    bool timing = false;
    int threads = 1;
    int jobs = 1;
    std::optional<std::string> output_dir;
};

inline std::vector<TrialResult> run_trials(const Dataset& data, const TrialSpec& base, std::size_t trials, int jobs) {
    std::vector<TrialResult> results(trials);
    detail::run_indexed(trials, jobs, [&](std::size_t t) { results[t] = run_trial(data, trial_spec(base, t)); });
    return results;
}

inline std::string results_jsonl(const std::vector<TrialResult>& results, bool timing) {
    std::string text;
    for (const auto& r : results) text += to_json(r, timing).dump() + "\n";
    return text;
}

inline std::string summary_csv(const Summary& s) {
    return summary_csv_header(s.coverage_levels) + "\n" + summary_csv_row(s) + "\n";
}

inline int cmd_bench(const BenchOptions& opt, Streams io) {
    if (opt.trials == 0) throw ConfigError("--trials must be >= 1");
    const fs::path table_path(opt.datasets_config);
    const DatasetEntry entry = dataset_entry(parse_json_file(table_path, true), opt.dataset,
                                             table_path.parent_path().empty() ? fs::path(".")
                                                                              : table_path.parent_path());
    const fs::path data_path = opt.data ? fs::path(*opt.data) : entry.path;
    const std::string data_text = read_file(data_path);
    const Dataset data = parse_dataset(data_path, data_text, entry.target);

    TrialSpec base;
    base.dataset_id = entry.id;
    base.seed = opt.seed;
    base.test_tail_rows = entry.test_tail_rows;
    base.freeze_partitions = opt.freeze_partitions;
    base.keep_densities = opt.dump_densities;
    base.config = entry.presto;
    base.config.seed = opt.seed;
    base.config.threads = opt.threads;
    base.config.loss = loss_kind_from_string(opt.variant);
    if (opt.num_classifiers) base.config.num_classifiers = *opt.num_classifiers;
    base.validate();

    const fs::path dir = output_dir(opt.output_dir, std::nullopt);
    Json manifest{{"schema_version", kRunConfigSchemaVersion},
                  {"command", "bench"},
                  {"dataset", entry.id},
                  {"input", input_record(data_path, data_text, data.rows())},
                  {"seed", opt.seed},
                  {"trials", opt.trials},
                  {"freeze_partitions", opt.freeze_partitions}};

    if (opt.max_depth) {
        base.config.gbdt.max_depth = *opt.max_depth;
        base.config.validate();
    } else if (!entry.depth_grid.empty()) {
        const auto tuning = tune_max_depth(data, trial_spec(base, 0), entry.depth_grid);
        base.config.gbdt.max_depth = tuning.best_depth;
        Json rows = Json::array();
        for (std::size_t i = 0; i < tuning.depths.size(); ++i) {
            rows.push_back(Json{{"max_depth", tuning.depths[i]},
                                {"valid_nll", detail::finite_or_string(tuning.valid_nll[i])}});
        }
        manifest["depth_tuning"] = Json{{"grid", rows}, {"best", tuning.best_depth}};
        io.err << entry.id << ": tuned max_depth = " << tuning.best_depth << "\n";
    }
    manifest["config"] = presto::to_json(base.config);

    if (opt.learning_curve) {
        const auto curve = learning_curve(data, trial_spec(base, 0), *opt.learning_curve);
        const fs::path path = dir / ("learning_curve_" + entry.id + "_" + opt.variant + ".csv");
        atomic_write(path, learning_curve_csv(curve));
        io.out << learning_curve_csv(curve);
    } else {
        std::vector<std::string> variants{opt.variant};
        if (opt.compare_variants) variants = {"structured", "standard"};
        std::vector<std::vector<TrialResult>> all;
        for (const auto& v : variants) {
            TrialSpec spec = base;
            spec.config.loss = loss_kind_from_string(v);
            all.push_back(run_trials(data, spec, opt.trials, opt.jobs));
            const Summary s = aggregate(all.back());
            atomic_write(dir / ("results_" + entry.id + "_" + v + ".jsonl"), results_jsonl(all.back(), opt.timing));
            atomic_write(dir / ("summary_" + entry.id + "_" + v + ".csv"), summary_csv(s));
            io.out << summary_csv(s);
        }
        if (opt.compare_variants) {
            const std::string table = comparison_csv({compare_variants(all[0], all[1])});
            atomic_write(dir / ("comparison_" + entry.id + ".csv"), table);
            io.out << table;
        }
    }
    atomic_write(dir / ("bench_" + entry.id + ".manifest.json"), manifest.dump(2) + "\n");
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, Streams io) {
    CLI::App app{"Probabilistic regression from averaged coarse classifiers"};
    app.require_subcommand(1);
    std::optional<std::string> output_flag;

    auto* fit = app.add_subcommand("fit", "train a model from a JSON run config");
    std::string config_path;
    fit->add_option("--config", config_path, "run config (JSON)")->required();
    fit->add_option("--output-dir", output_flag, "output directory");

    auto* predict = app.add_subcommand("predict", "score a CSV with a saved model");
    PredictOptions popt;
    predict->add_option("--model", popt.model, "model file")->required();
    predict->add_option("--input", popt.input, "input CSV")->required();
    predict->add_option("--target", popt.target, "target column name (default: the model's)");
    predict->add_flag("--density", popt.density, "emit {edges, heights} JSON lines");
    predict->add_flag("--mean", popt.mean, "emit density means");
    predict->add_option("--interval", popt.interval, "emit central intervals at this coverage");
    predict->add_flag("--nll", popt.nll, "emit per-row and mean negative log-likelihood");
    predict->add_option("--output", popt.output, "write to this file instead of stdout");
    predict->add_option("--output-dir", popt.output_dir, "directory for a relative --output");

    auto* bench = app.add_subcommand("bench", "run the benchmark protocol on a dataset");
    BenchOptions bopt;
    bench->add_option("--dataset", bopt.dataset, "dataset id from the datasets config")->required();
    bench->add_option("--datasets-config", bopt.datasets_config, "dataset table (JSON)");
    bench->add_option("--data", bopt.data, "CSV path overriding the table entry");
    bench->add_option("--trials", bopt.trials, "number of random splits");
    bench->add_option("--variant", bopt.variant, "structured or standard")
        ->check(CLI::IsMember({"structured", "standard"}));
    bench->add_option("--seed", bopt.seed, "base seed");
    bench->add_option("--max-depth", bopt.max_depth, "skip depth tuning and use this depth");
    bench->add_option("--num-classifiers", bopt.num_classifiers, "override m");
    bench->add_option("--learning-curve", bopt.learning_curve, "NLL for m = 1..N on trial 0");
    bench->add_flag("--compare-variants", bopt.compare_variants, "paired structured vs standard runs");
    bench->add_flag("--freeze-partitions", bopt.freeze_partitions, "reuse validation-stage partitions on refit");
    bench->add_flag("--dump-densities", bopt.dump_densities, "include test densities in the results");
    bench->add_flag("--timing", bopt.timing, "include wall time in the results");
    bench->add_option("--threads", bopt.threads, "workers per fit")->check(CLI::PositiveNumber);
    bench->add_option("--jobs", bopt.jobs, "concurrent trials")->check(CLI::PositiveNumber);
    bench->add_option("--output-dir", bopt.output_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        io.out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        io.out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (*fit) return cmd_fit(config_path, output_flag, io);
        if (*predict) return cmd_predict(popt, io);
        return cmd_bench(bopt, io);
    } catch (const ConfigError& e) {
        io.err << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DataError& e) {
        io.err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const InvariantError& e) {
        io.err << "internal error: " << e.what() << "\n";
        return exit_invariant;
    } catch (const fs::filesystem_error& e) {
        io.err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::exception& e) {
        io.err << "internal error: " << e.what() << "\n";
        return exit_invariant;
    }
}

}  // namespace presto::cli
