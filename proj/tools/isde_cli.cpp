// isde: command line front end.
//
// Exit codes: 0 success, 1 computation error, 2 usage or I/O error.

#include "isde/baselines.hpp"
#include "isde/combinatorics.hpp"
#include "isde/dataset.hpp"
#include "isde/error.hpp"
#include "isde/gauss_experiment.hpp"
#include "isde/manifest.hpp"
#include "isde/partition_space.hpp"
#include "isde/rng.hpp"
#include "isde/scoring.hpp"
#include "isde/solver.hpp"
#include "isde/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;
constexpr const char* kWorkersEnv = "ISDE_WORKERS";

// Thrown for bad flag combinations discovered after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t resolve_workers(const std::optional<std::size_t>& flag) {
    if (flag) {
        if (*flag < 1) {
            throw UsageError("--workers must be at least 1");
        }
        return *flag;
    }
    if (const char* env = std::getenv(kWorkersEnv)) {
        try {
            const long v = std::stol(env);
            if (v >= 1) {
                return static_cast<std::size_t>(v);
            }
        } catch (const std::exception&) {
        }
        throw UsageError(std::string(kWorkersEnv) + " must be a positive integer, got '" + env + "'");
    }
    return 1;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v < 1) {
            throw UsageError("structure must be a comma-separated list of positive integers, got '" + text + "'");
        }
        sizes.push_back(static_cast<std::size_t>(v));
    }
    if (sizes.empty()) {
        throw UsageError("structure must not be empty");
    }
    return sizes;
}

void write_json(const json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) {
        throw isde::IoError("cannot open '" + out + "' for writing");
    }
    f << text;
    if (!f) {
        throw isde::IoError("failed writing '" + out + "'");
    }
}

// Options shared by every command that scores subsets.
struct GridFlags {
    double min = 0.01;
    double max = 1.0;
    std::size_t count = 30;
    std::string scale = "log";
    std::size_t folds = 5;

    void add(CLI::App* app) {
        app->add_option("--grid-min", min, "smallest bandwidth")->capture_default_str();
        app->add_option("--grid-max", max, "largest bandwidth")->capture_default_str();
        app->add_option("--grid-count", count, "number of bandwidths")->capture_default_str();
        app->add_option("--grid-scale", scale, "log or linear spacing")
            ->check(CLI::IsMember({"log", "linear"}))
            ->capture_default_str();
        app->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    }

    [[nodiscard]] isde::ScoringOptions options(std::size_t workers) const {
        if (!(min > 0.0) || !(max >= min) || count < 1) {
            throw UsageError("grid needs 0 < grid-min <= grid-max and grid-count >= 1");
        }
        if (folds < 2) {
            throw UsageError("folds must be at least 2");
        }
        isde::ScoringOptions o;
        o.grid = {min, max, count, scale == "log" ? isde::GridScale::log : isde::GridScale::linear};
        o.folds = folds;
        o.workers = workers;
        return o;
    }

    [[nodiscard]] json to_json() const {
        return {{"grid", {{"min", min}, {"max", max}, {"count", count}, {"scale", scale}}}, {"folds", folds}};
    }
};

struct DataFlags {
    std::string path;
    bool header = false;
    bool rescale = false;

    void add(CLI::App* app, const std::string& name = "--data") {
        app->add_option(name, path, "training CSV")->required();
        app->add_flag("--header", header, "first CSV row holds feature names");
        app->add_flag("--rescale", rescale, "map each feature to [0, 1] using the training data's range");
    }
};

struct SplitFlags {
    std::optional<std::size_t> m;
    std::optional<std::size_t> n;
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--m", m, "estimation rows (default 3000 if N >= 5000, else N/2)");
        app->add_option("--n", n, "scoring rows (default 2000 if N >= 5000, else N - N/2)");
        app->add_option("--seed", seed, "split and cross-validation seed")->capture_default_str();
    }

    [[nodiscard]] isde::SplitSpec resolve(std::size_t rows) const {
        isde::SplitSpec s;
        s.seed = seed;
        const bool large = rows >= 5000;
        s.m = m.value_or(large ? 3000 : rows / 2);
        s.n = n.value_or(large ? 2000 : rows - rows / 2);
        if (s.m < 1 || s.n < 1 || s.m + s.n > rows) {
            throw UsageError("split needs m >= 1, n >= 1 and m + n <= N (N = " + std::to_string(rows) + ")");
        }
        return s;
    }
};

json split_json(const isde::SplitSpec& s) {
    return {{"m", s.m}, {"n", s.n}, {"seed", s.seed}};
}

struct LoadedData {
    isde::Dataset data;
    std::optional<isde::ColumnScaler> scaler;
};

LoadedData load_training(const DataFlags& flags) {
    auto raw = isde::load_csv(flags.path, flags.header);
    if (!flags.rescale) {
        return {std::move(raw), std::nullopt};
    }
    auto scaler = isde::ColumnScaler::fit(raw);
    auto scaled = scaler.apply(raw);
    return {std::move(scaled), std::move(scaler)};
}

std::size_t resolve_k(std::optional<std::size_t> k, std::size_t d) {
    const std::size_t v = k.value_or(d);
    if (v < 1 || v > d) {
        throw UsageError("k must satisfy 1 <= k <= d (d = " + std::to_string(d) + ")");
    }
    if (d > 64) {
        throw UsageError("at most 64 features are supported");
    }
    return v;
}

json partition_json(const isde::Partition& p) {
    return {{"blocks", p.to_lists()}, {"display", p.to_string()}};
}

json solve_json(const isde::SolveResult& r, std::size_t rank) {
    return {{"rank", rank},
            {"partition", partition_json(r.partition)},
            {"objective", r.objective},
            {"nodes_explored", r.nodes_explored},
            {"wall_seconds", r.wall_seconds}};
}

isde::SolverOptions solver_options(const std::string& method) {
    isde::SolverOptions o;
    if (method == "dp") {
        o.method = isde::SolverMethod::dynamic_programming;
    } else if (method == "bnb") {
        o.method = isde::SolverMethod::branch_and_bound;
    }
    return o;
}

// ---- count ----

struct CountCmd {
    std::size_t d = 0;
    std::optional<std::size_t> k;
    std::string out;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("count", "number of candidate subsets and partitions");
        c->add_option("--d", d, "number of features")->required();
        c->add_option("--k", k, "maximum block size (default d)");
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->callback([this] { run(); });
    }

    void run() const {
        if (d < 1) {
            throw UsageError("d must be at least 1");
        }
        const std::size_t kk = k.value_or(d);
        if (kk < 1 || kk > d) {
            throw UsageError("k must satisfy 1 <= k <= d");
        }
        const auto report = isde::count_report(d, kk);
        json j{{"schema_version", 1},
               {"config", {{"d", d}, {"k", kk}}},
               {"subsets", report.n_subsets.str()},
               {"partitions", report.n_partitions.str()}};
        if (kk == 2) {
            j["pair_partitions_closed_form"] = isde::count_pair_partitions(d).str();
        }
        write_json(j, out);
    }
};

// ---- score ----

struct ScoreCmd {
    DataFlags data;
    SplitFlags split;
    GridFlags grid;
    std::optional<std::size_t> k;
    std::string estimator = "kde";
    std::string out;

    void add(CLI::App& root, std::optional<std::size_t>& workers) {
        auto* c = root.add_subcommand("score", "held-out score of every subset of size <= k");
        data.add(c);
        split.add(c);
        grid.add(c);
        c->add_option("--k", k, "maximum block size (default d)");
        c->add_option("--estimator", estimator, "kde or gaussian")
            ->check(CLI::IsMember({"kde", "gaussian"}))
            ->capture_default_str();
        c->add_option("--out", out, "score table JSON path")->required();
        c->callback([this, &workers] { run(resolve_workers(workers)); });
    }

    void run(std::size_t workers) const {
        const auto start = Clock::now();
        const auto loaded = load_training(data);
        const auto& ds = loaded.data;
        const auto kk = resolve_k(k, ds.n_features());
        const auto spec = split.resolve(ds.n_rows());
        const auto opts = grid.options(workers);
        const auto table = estimator == "kde" ? isde::score_all_subsets(ds, kk, spec, opts)
                                              : isde::gaussian_score_all_subsets(ds, kk, spec, workers);
        isde::save_table(out, table);
        json summary{{"schema_version", 1},
                     {"config",
                      {{"data", data.path},
                       {"header", data.header},
                       {"rescale", data.rescale},
                       {"k", kk},
                       {"estimator", estimator},
                       {"split", split_json(spec)},
                       {"workers", workers}}},
                     {"table", out},
                     {"subsets", table.size()},
                     {"elapsed_seconds", seconds_since(start)}};
        summary["config"].update(grid.to_json());
        std::cout << summary.dump(2) << "\n";
    }
};

// ---- solve ----

struct SolveCmd {
    std::string table_path;
    std::size_t k_best = 0;
    std::size_t worst = 0;
    bool brute_force = false;
    std::string method = "auto";
    std::string out;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("solve", "best (or K best / K worst) partitions of a score table");
        c->add_option("--table", table_path, "score table JSON")->required();
        auto* kb = c->add_option("--k-best", k_best, "report the K best partitions");
        auto* w = c->add_option("--worst", worst, "report the K worst partitions");
        kb->excludes(w);
        c->add_flag("--brute-force", brute_force, "enumerate every partition instead of solving");
        c->add_option("--method", method, "auto, dp or bnb")
            ->check(CLI::IsMember({"auto", "dp", "bnb"}))
            ->capture_default_str();
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->callback([this] { run(); });
    }

    void run() const {
        const auto table = isde::load_table(table_path);
        if (!table.is_complete()) {
            throw isde::ComputationError("score table is missing subsets of size <= " + std::to_string(table.k()));
        }
        const auto opts = solver_options(method);
        std::vector<isde::SolveResult> results;
        std::string mode;
        if (brute_force) {
            if (k_best > 0 || worst > 0) {
                throw UsageError("--brute-force reports the single best partition only");
            }
            results.push_back(isde::solve_bruteforce(table));
            mode = "brute_force";
        } else if (k_best > 0) {
            results = isde::solve_kbest(table, k_best, opts);
            mode = "k_best";
        } else if (worst > 0) {
            results = isde::solve_worst(table, worst, opts);
            mode = "worst";
        } else {
            results.push_back(isde::solve_best(table, opts));
            mode = "best";
        }
        json j{{"schema_version", 1},
               {"config",
                {{"table", table_path},
                 {"mode", mode},
                 {"k_best", k_best},
                 {"worst", worst},
                 {"method", method},
                 {"d", table.d()},
                 {"k", table.k()}}},
               {"results", json::array()}};
        for (std::size_t i = 0; i < results.size(); ++i) {
            j["results"].push_back(solve_json(results[i], i + 1));
        }
        write_json(j, out);
    }
};

// ---- fit ----

struct FitCmd {
    DataFlags data;
    SplitFlags split;
    GridFlags grid;
    std::optional<std::size_t> k;
    std::string method = "isde";
    std::string table_path;
    std::string out;

    void add(CLI::App& root, std::optional<std::size_t>& workers) {
        auto* c = root.add_subcommand("fit", "fit a density model and write its manifest");
        data.add(c);
        split.add(c);
        grid.add(c);
        c->add_option("--k", k, "maximum block size (default d; fde uses 2)");
        c->add_option("--method", method, "isde, isde-gauss, fde or cvkde")
            ->check(CLI::IsMember({"isde", "isde-gauss", "fde", "cvkde"}))
            ->capture_default_str();
        c->add_option("--table", table_path, "reuse a score table instead of scoring inline");
        c->add_option("--out", out, "manifest JSON path")->required();
        c->callback([this, &workers] { run(resolve_workers(workers)); });
    }

    [[nodiscard]] isde::SubsetScoreTable obtain_table(const isde::Dataset& ds, std::size_t kk,
                                                      isde::Estimator est, std::size_t workers) const {
        if (!table_path.empty()) {
            auto table = isde::load_table(table_path);
            if (table.d() != ds.n_features()) {
                throw UsageError("score table has d = " + std::to_string(table.d()) + " but the data has " +
                                 std::to_string(ds.n_features()) + " columns");
            }
            if (table.estimator() != est) {
                throw UsageError("score table was built with a different estimator");
            }
            if (table.k() < kk || !table.is_complete()) {
                throw UsageError("score table does not cover every subset of size <= " + std::to_string(kk));
            }
            return table;
        }
        const auto spec = split.resolve(ds.n_rows());
        if (est == isde::Estimator::gaussian) {
            return isde::gaussian_score_all_subsets(ds, kk, spec, workers);
        }
        return isde::score_all_subsets(ds, kk, spec, grid.options(workers));
    }

    void run(std::size_t workers) const {
        const auto start = Clock::now();
        const auto loaded = load_training(data);
        const auto& ds = loaded.data;
        const auto m = isde::parse_method(method);
        const std::size_t d = ds.n_features();
        json config{{"data", data.path},
                    {"header", data.header},
                    {"rescale", data.rescale},
                    {"method", method},
                    {"workers", workers}};
        config.update(grid.to_json());

        isde::ModelManifest manifest;
        json result;
        if (m == isde::Method::cvkde) {
            const auto model = isde::fit_cvkde(ds, grid.options(workers).grid, grid.folds, split.seed);
            manifest = isde::manifest_for_cvkde(d, model.bandwidth());
            config["seed"] = split.seed;
            result["bandwidth"] = model.bandwidth();
        } else if (m == isde::Method::fde) {
            if (d < 2) {
                throw UsageError("fde needs at least two features");
            }
            const auto table = obtain_table(ds, resolve_k(k.value_or(2), d), isde::Estimator::kde, workers);
            const auto estimation = isde::split(ds, table.split()).estimation;
            const auto forest = isde::fit_fde(table, estimation);
            manifest = isde::manifest_for_forest(table, forest);
            config["split"] = split_json(table.split());
            result["edges"] = forest.forest.edges();
        } else {
            const auto est = m == isde::Method::isde ? isde::Estimator::kde : isde::Estimator::gaussian;
            const auto kk = resolve_k(k, d);
            auto table = obtain_table(ds, kk, est, workers);
            const auto best = isde::solve_best(table);
            isde::assert_exact_cover(best.partition, d);
            manifest = isde::manifest_for_partition(table, best.partition, m);
            manifest.k = kk;
            config["k"] = kk;
            config["split"] = split_json(table.split());
            result["partition"] = partition_json(best.partition);
            result["objective"] = best.objective;
        }
        if (!table_path.empty()) {
            config["table"] = table_path;
        }
        manifest.scaler = loaded.scaler;
        manifest.provenance = {{"config", config}};
        isde::save_manifest(out, manifest);
        json summary{{"schema_version", 1},
                     {"config", config},
                     {"manifest", out},
                     {"result", result},
                     {"elapsed_seconds", seconds_since(start)}};
        std::cout << summary.dump(2) << "\n";
    }
};

// ---- validate ----

struct ValidateCmd {
    std::string manifest_path;
    std::string train_path;
    std::vector<std::string> valid_paths;
    bool header = false;
    std::string out;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("validate", "mean validation log-likelihood of a fitted model");
        c->add_option("--manifest", manifest_path, "model manifest JSON")->required();
        c->add_option("--train", train_path, "training CSV the model was fitted on")->required();
        c->add_option("--valid", valid_paths, "validation CSV (repeatable)")->required();
        c->add_flag("--header", header, "CSV files start with a header row");
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->callback([this] { run(); });
    }

    [[nodiscard]] isde::Dataset prepared(const std::string& path, const isde::ModelManifest& manifest) const {
        auto ds = isde::load_csv(path, header);
        if (ds.n_features() != manifest.d) {
            throw UsageError("'" + path + "' has " + std::to_string(ds.n_features()) +
                             " columns but the manifest describes d = " + std::to_string(manifest.d));
        }
        return manifest.scaler ? manifest.scaler->apply(ds) : ds;
    }

    void run() const {
        const auto manifest = isde::load_manifest(manifest_path);
        const auto train = prepared(train_path, manifest);
        const auto log_density = isde::rebuild_log_density(manifest, train);
        json j{{"schema_version", 1},
               {"config",
                {{"manifest", manifest_path},
                 {"train", train_path},
                 {"valid", valid_paths},
                 {"header", header},
                 {"method", isde::method_name(manifest.method)}}},
               {"scores", json::array()}};
        for (const auto& path : valid_paths) {
            const auto valid = prepared(path, manifest);
            j["scores"].push_back(
                {{"file", path}, {"rows", valid.n_rows()}, {"score", isde::validation_score(log_density, valid)}});
        }
        write_json(j, out);
    }
};

// ---- explore ----

struct ExploreCmd {
    std::string table_path;
    std::string manifest_path;
    std::string train_path;
    std::string valid_path;
    bool header = false;
    std::size_t best = 3;
    std::size_t worst = 3;
    std::size_t random = 3;
    std::size_t walks = 5;
    std::size_t length = 40;
    std::string walk_mode = "uniform";
    std::uint64_t seed = 0;
    bool exhaustive = false;
    std::size_t bins = 100;
    std::optional<double> threshold;
    std::string scores_csv;
    std::uint64_t guard = isde::kDefaultPartitionGuard;
    std::string out;

    void add(CLI::App& root) {
        auto* c = root.add_subcommand("explore", "best, worst, random and random-walk partitions of a score table");
        c->alias("analyze");
        c->add_option("--table", table_path, "score table JSON")->required();
        c->add_option("--manifest", manifest_path, "reference model (default: the table's optimum)");
        auto* tr = c->add_option("--train", train_path, "training CSV, enables validation scores");
        auto* va = c->add_option("--valid", valid_path, "validation CSV, enables validation scores");
        tr->needs(va);
        va->needs(tr);
        c->add_flag("--header", header, "CSV files start with a header row");
        c->add_option("--best", best, "number of best partitions")->capture_default_str();
        c->add_option("--worst", worst, "number of worst partitions")->capture_default_str();
        c->add_option("--random", random, "number of random partitions")->capture_default_str();
        c->add_option("--walks", walks, "number of random walks from the reference")->capture_default_str();
        c->add_option("--length", length, "steps per walk")->capture_default_str();
        c->add_option("--walk-mode", walk_mode, "uniform (over neighbors) or type-first")
            ->check(CLI::IsMember({"uniform", "type-first"}))
            ->capture_default_str();
        c->add_option("--seed", seed, "seed for random partitions and walks")->capture_default_str();
        c->add_flag("--exhaustive", exhaustive, "score every partition and report a histogram");
        c->add_option("--bins", bins, "histogram bins")->capture_default_str();
        c->add_option("--threshold", threshold, "count partitions scoring above this value");
        c->add_option("--scores-csv", scores_csv, "stream every partition score to this CSV");
        c->add_option("--guard", guard, "largest partition count allowed in exhaustive mode")->capture_default_str();
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->callback([this] { run(); });
    }

    void run() const {
        const auto table = isde::load_table(table_path);
        if (!table.is_complete()) {
            throw isde::ComputationError("score table is missing subsets of size <= " + std::to_string(table.k()));
        }
        const std::size_t d = table.d();
        const std::size_t k = table.k();

        std::optional<isde::Dataset> estimation;
        std::optional<isde::Dataset> valid;
        std::optional<isde::ColumnScaler> scaler;
        std::optional<isde::Partition> reference;
        if (!manifest_path.empty()) {
            const auto manifest = isde::load_manifest(manifest_path);
            if (!manifest.partition) {
                throw UsageError("manifest does not describe a partition model");
            }
            if (manifest.d != d) {
                throw UsageError("manifest and score table disagree on d");
            }
            reference = manifest.partition;
            scaler = manifest.scaler;
        }
        if (!train_path.empty()) {
            auto load = [&](const std::string& path) {
                auto ds = isde::load_csv(path, header);
                if (ds.n_features() != d) {
                    throw UsageError("'" + path + "' has " + std::to_string(ds.n_features()) +
                                     " columns but the table has d = " + std::to_string(d));
                }
                return scaler ? scaler->apply(ds) : ds;
            };
            estimation = isde::split(load(train_path), table.split()).estimation;
            valid = load(valid_path);
        }
        auto validation = [&](const isde::Partition& p) -> json {
            if (!estimation) {
                return nullptr;
            }
            const auto fit = isde::fit_partition_model(table, *estimation, p);
            return isde::validation_score(
                [&](std::span<const double> x) { return isde::fitted_model_log_density(fit, x); }, *valid);
        };

        const auto optimum = isde::solve_best(table);
        if (!reference) {
            reference = optimum.partition;
        }
        auto row = [&](const std::string& kind, std::size_t index, const isde::Partition& p) {
            return json{{"kind", kind},
                        {"index", index},
                        {"partition", partition_json(p)},
                        {"score", isde::partition_score(table, p)},
                        {"edit_distance", isde::edit_distance(*reference, p)},
                        {"validation_score", validation(p)}};
        };

        json rows = json::array();
        if (best > 0) {
            const auto r = isde::solve_kbest(table, best);
            for (std::size_t i = 0; i < r.size(); ++i) {
                rows.push_back(row("best", i + 1, r[i].partition));
            }
        }
        if (worst > 0) {
            const auto r = isde::solve_worst(table, worst);
            for (std::size_t i = 0; i < r.size(); ++i) {
                rows.push_back(row("worst", i + 1, r[i].partition));
            }
        }
        for (std::size_t i = 0; i < random; ++i) {
            rows.push_back(row("random", i + 1, isde::random_partition(d, k, isde::derive_seed(seed, i))));
        }

        json walk_list = json::array();
        const auto mode = walk_mode == "uniform" ? isde::WalkMode::uniform_neighbor : isde::WalkMode::type_first;
        if (walks > 0 && d >= 2 && k >= 2) {
            for (std::size_t w = 0; w < walks; ++w) {
                const auto walk_seed = isde::derive_seed(isde::derive_seed(seed, 0x57A1), w);
                const auto trace = isde::random_walk(*reference, length, k, walk_seed, mode);
                json steps = json::array();
                for (std::size_t s = 0; s < trace.steps.size(); ++s) {
                    auto r = row("walk", s, trace.steps[s]);
                    r["walk"] = w + 1;
                    steps.push_back(std::move(r));
                }
                walk_list.push_back({{"walk", w + 1}, {"seed", walk_seed}, {"steps", std::move(steps)}});
            }
        }

        json j{{"schema_version", 1},
               {"config",
                {{"table", table_path},
                 {"manifest", manifest_path},
                 {"train", train_path},
                 {"valid", valid_path},
                 {"best", best},
                 {"worst", worst},
                 {"random", random},
                 {"walks", walks},
                 {"length", length},
                 {"walk_mode", walk_mode},
                 {"seed", seed},
                 {"exhaustive", exhaustive},
                 {"d", d},
                 {"k", k}}},
               {"reference", partition_json(*reference)},
               {"partitions", std::move(rows)},
               {"walks", std::move(walk_list)}};
        if (exhaustive) {
            j["exhaustive"] = histogram(table, optimum.objective);
        }
        write_json(j, out);
    }

    [[nodiscard]] json histogram(const isde::SubsetScoreTable& table, double top) const {
        if (bins < 1) {
            throw UsageError("bins must be at least 1");
        }
        const double bottom = isde::solve_worst(table, 1).front().objective;
        const double width = top > bottom ? (top - bottom) / static_cast<double>(bins) : 1.0;
        std::vector<std::uint64_t> counts(bins, 0);
        std::uint64_t total = 0;
        std::uint64_t above = 0;
        std::ofstream csv;
        if (!scores_csv.empty()) {
            csv.open(scores_csv);
            if (!csv) {
                throw isde::IoError("cannot open '" + scores_csv + "' for writing");
            }
            csv << "score\n";
            csv.precision(17);
        }
        isde::enumerate_partitions(
            table.d(), table.k(),
            [&](std::span<const std::uint64_t> blocks) {
                const double s = isde::partition_score(table, blocks);
                auto b = static_cast<std::size_t>(std::floor((s - bottom) / width));
                counts[std::min(b, bins - 1)] += 1;
                ++total;
                if (threshold && s > *threshold) {
                    ++above;
                }
                if (csv.is_open()) {
                    csv << s << '\n';
                }
            },
            guard);
        json edges = json::array();
        for (std::size_t b = 0; b <= bins; ++b) {
            edges.push_back(bottom + width * static_cast<double>(b));
        }
        json h{{"partitions", total}, {"min", bottom}, {"max", top}, {"bin_edges", edges}, {"counts", counts}};
        if (threshold) {
            h["threshold"] = *threshold;
            h["above_threshold"] = above;
        }
        return h;
    }
};

// ---- synth-bench ----

struct SynthCmd {
    std::string structure;
    std::size_t n = 5000;
    std::size_t m_valid = 5000;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::string methods = "isde,fde,cvkde";
    std::size_t k = 0;
    GridFlags grid;
    isde::SynthConfig synth;
    std::string out;
    std::string csv;

    void add(CLI::App& root, std::optional<std::size_t>& workers) {
        auto* c = root.add_subcommand("synth-bench", "benchmark on generated block-structured data");
        c->add_option("--structure", structure, "block sizes, e.g. 2,2,1")->required();
        c->add_option("--n", n, "training rows")->capture_default_str();
        c->add_option("--m-valid", m_valid, "validation rows")->capture_default_str();
        c->add_option("--repeats", repeats, "independent repeats")->capture_default_str();
        c->add_option("--seed", seed, "top-level seed")->capture_default_str();
        c->add_option("--methods", methods, "comma-separated subset of isde,fde,cvkde")->capture_default_str();
        c->add_option("--k", k, "maximum block size for isde (0 means d)")->capture_default_str();
        grid.add(c);
        c->add_option("--ring-inner", synth.ring_inner_radius, "inner ring radius")->capture_default_str();
        c->add_option("--ring-outer", synth.ring_outer_radius, "outer ring radius")->capture_default_str();
        c->add_option("--ring-noise", synth.ring_noise_sd, "ring noise standard deviation")->capture_default_str();
        c->add_option("--xor-noise-variance", synth.xor_noise_variance, "XOR block noise variance")
            ->capture_default_str();
        c->add_option("--mixture-weight", synth.mixture_weight_at_ones, "weight of the N(1, I) component")
            ->capture_default_str();
        c->add_option("--mixture-sd", synth.mixture_sd, "mixture component standard deviation")
            ->capture_default_str();
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->add_option("--csv", csv, "also write per-repeat scores as CSV");
        c->callback([this, &workers] { run(resolve_workers(workers)); });
    }

    void run(std::size_t workers) const {
        const auto start = Clock::now();
        isde::BenchmarkConfig cfg;
        cfg.sizes = parse_sizes(structure);
        cfg.n_train = n;
        cfg.m_valid = m_valid;
        cfg.repeats = repeats;
        cfg.seed = seed;
        cfg.k = k;
        cfg.scoring = grid.options(workers);
        cfg.synth = synth;
        cfg.methods.clear();
        std::stringstream ss(methods);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto m = isde::parse_method(item);
            if (m == isde::Method::isde_gauss) {
                throw UsageError("synth-bench methods are isde, fde and cvkde");
            }
            if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) {
                cfg.methods.push_back(m);
            }
        }
        std::size_t d = 0;
        for (auto s : cfg.sizes) {
            d += s;
        }
        if (k > d) {
            throw UsageError("k must not exceed d");
        }
        if (n < 2 || m_valid < 1 || repeats < 1 || cfg.methods.empty()) {
            throw UsageError("synth-bench needs n >= 2, m-valid >= 1, repeats >= 1 and at least one method");
        }
        const auto report = isde::run_synthetic_benchmark(cfg);
        auto j = isde::benchmark_to_json(report);
        j["config"] = {{"structure", structure}, {"methods", methods}, {"workers", workers}};
        j["elapsed_seconds"] = seconds_since(start);
        if (!csv.empty()) {
            std::ofstream f(csv);
            if (!f) {
                throw isde::IoError("cannot open '" + csv + "' for writing");
            }
            f.precision(17);
            f << "repeat,method,score\n";
            for (std::size_t r = 0; r < report.repeats.size(); ++r) {
                for (const auto& [m, v] : report.repeats[r].scores) {
                    f << r + 1 << ',' << isde::method_name(m) << ',' << v << '\n';
                }
            }
        }
        write_json(j, out);
    }
};

// ---- gauss-exp ----

struct GaussCmd {
    std::string structure;
    double sigma = 0.7;
    std::size_t n = 6000;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::size_t k = 0;
    std::string out;

    void add(CLI::App& root, std::optional<std::size_t>& workers) {
        auto* c = root.add_subcommand("gauss-exp", "block-covariance Gaussian experiment");
        c->add_option("--structure", structure, "block sizes, e.g. 4,4,1")->required();
        c->add_option("--sigma", sigma, "within-block correlation in (0, 1)")->capture_default_str();
        c->add_option("--n", n, "sample size")->capture_default_str();
        c->add_option("--repeats", repeats, "independent repeats")->capture_default_str();
        c->add_option("--seed", seed, "top-level seed")->capture_default_str();
        c->add_option("--k", k, "maximum block size (0 means d)")->capture_default_str();
        c->add_option("--out", out, "output JSON path (default stdout)");
        c->callback([this, &workers] { run(resolve_workers(workers)); });
    }

    void run(std::size_t workers) const {
        const auto start = Clock::now();
        if (!(sigma > 0.0 && sigma < 1.0)) {
            throw UsageError("sigma must lie in (0, 1)");
        }
        isde::GaussExperimentConfig cfg;
        cfg.structure = {parse_sizes(structure), sigma};
        cfg.n_rows = n;
        cfg.repeats = repeats;
        cfg.seed = seed;
        cfg.k = k;
        cfg.workers = workers;
        if (k > cfg.structure.dim()) {
            throw UsageError("k must not exceed d");
        }
        if (n < 2 || repeats < 1) {
            throw UsageError("gauss-exp needs n >= 2 and repeats >= 1");
        }
        auto j = isde::gauss_report_to_json(isde::run_gaussian_experiment(cfg));
        j["config"] = {{"structure", structure}, {"workers", workers}};
        j["elapsed_seconds"] = seconds_since(start);
        write_json(j, out);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Independence structure density estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::size_t> workers;
    app.add_option("--workers", workers,
                                std::string("worker threads for subset scoring (default $") + kWorkersEnv + " or 1)");

    CountCmd count;
    ScoreCmd score;
    SolveCmd solve;
    FitCmd fit;
    ValidateCmd validate;
    ExploreCmd explore;
    SynthCmd synth;
    GaussCmd gauss;
    count.add(app);
    score.add(app, workers);
    solve.add(app);
    fit.add(app, workers);
    validate.add(app);
    explore.add(app);
    synth.add(app, workers);
    gauss.add(app, workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const isde::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
    return 0;
}
