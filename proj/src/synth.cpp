#include "isde/synth.hpp"

#include "isde/baselines.hpp"
#include "isde/rng.hpp"
#include "isde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isde {

Dataset gen_block(std::size_t size, std::size_t n_rows, std::uint64_t seed, const SynthConfig& config) {
    if (size < 1 || n_rows < 1) {
        throw std::invalid_argument("gen_block: need size >= 1 and n_rows >= 1");
    }
    Rng rng(seed);
    const auto s = static_cast<Eigen::Index>(size);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n_rows), s);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        switch (size) {
            case 1:
                x(r, 0) = rng.uniform();
                break;
            case 2: {
                const double radius = rng.bernoulli(0.5) ? config.ring_outer_radius : config.ring_inner_radius;
                const double angle = 2.0 * std::numbers::pi * rng.uniform();
                x(r, 0) = radius * std::cos(angle) + config.ring_noise_sd * rng.normal();
                x(r, 1) = radius * std::sin(angle) + config.ring_noise_sd * rng.normal();
                break;
            }
            case 3: {
                const double y1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
                const double y2 = rng.bernoulli(0.5) ? 1.0 : 0.0;
                const double y3 = std::abs(y1 - y2);
                const double sd = std::sqrt(config.xor_noise_variance);
                x(r, 0) = y1 + sd * rng.normal();
                x(r, 1) = y2 + sd * rng.normal();
                x(r, 2) = y3 + sd * rng.normal();
                break;
            }
            default: {
                const double center = rng.bernoulli(config.mixture_weight_at_ones) ? 1.0 : 0.0;
                for (Eigen::Index c = 0; c < s; ++c) {
                    x(r, c) = center + config.mixture_sd * rng.normal();
                }
                break;
            }
        }
    }
    return Dataset(std::move(x));
}

GeneratedData gen_structure(const StructureSpec& spec, const SynthConfig& config) {
    if (spec.sizes.empty() || spec.n_rows < 1) {
        throw std::invalid_argument("gen_structure: need a nonempty structure and n_rows >= 1");
    }
    std::size_t d = 0;
    for (auto s : spec.sizes) {
        d += s;
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(spec.n_rows), static_cast<Eigen::Index>(d));
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < spec.sizes.size(); ++b) {
        const auto block = gen_block(spec.sizes[b], spec.n_rows, derive_seed(spec.seed, b), config);
        values.middleCols(col, block.values().cols()) = block.values();
        col += block.values().cols();
    }
    return GeneratedData{rescale_unit(Dataset(std::move(values))), Partition::from_sizes(spec.sizes)};
}

namespace {

struct RepeatSeeds {
    std::uint64_t data;
    std::uint64_t split;
    std::uint64_t cvkde;
};

RepeatSeeds seeds_for(std::uint64_t seed, std::size_t repeat) {
    const auto base = derive_seed(seed, repeat);
    return {derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

Dataset pool_rows(const BenchmarkConfig& config, std::size_t repeat, bool train) {
    const auto seeds = seeds_for(config.seed, repeat);
    const auto pool = gen_structure({config.sizes, seeds.data, config.n_train + config.m_valid}, config.synth);
    std::vector<std::size_t> rows;
    const std::size_t start = train ? 0 : config.n_train;
    const std::size_t count = train ? config.n_train : config.m_valid;
    for (std::size_t i = 0; i < count; ++i) {
        rows.push_back(start + i);
    }
    return select_rows(pool.data, rows);
}

bool wants(const BenchmarkConfig& c, Method m) {
    return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace

Dataset benchmark_training_data(const BenchmarkConfig& config, std::size_t repeat) {
    return pool_rows(config, repeat, true);
}

Dataset benchmark_validation_data(const BenchmarkConfig& config, std::size_t repeat) {
    return pool_rows(config, repeat, false);
}

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mean = sample_mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

BenchmarkReport run_synthetic_benchmark(const BenchmarkConfig& config) {
    if (config.sizes.empty() || config.repeats < 1 || config.methods.empty()) {
        throw std::invalid_argument("run_synthetic_benchmark: need a structure, repeats >= 1 and methods");
    }
    for (auto m : config.methods) {
        if (m == Method::isde_gauss) {
            throw std::invalid_argument("run_synthetic_benchmark: methods must be among isde, fde, cvkde");
        }
    }
    if (config.n_train < 2) {
        throw std::invalid_argument("run_synthetic_benchmark: n_train must be >= 2");
    }
    const auto truth = Partition::from_sizes(config.sizes);
    const std::size_t d = truth.n_features();
    const std::size_t k = config.k == 0 ? d : config.k;

    BenchmarkReport report{config, truth, {}, {}};
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto seeds = seeds_for(config.seed, r);
        const auto train = benchmark_training_data(config, r);
        const auto valid = benchmark_validation_data(config, r);
        BenchmarkRepeat rep;
        rep.data_seed = seeds.data;

        if (wants(config, Method::isde) || wants(config, Method::fde)) {
            const SplitSpec split{config.n_train / 2, config.n_train - config.n_train / 2, seeds.split};
            const std::size_t table_k = wants(config, Method::isde) ? k : std::min<std::size_t>(2, d);
            const auto table = score_all_subsets(train, table_k, split, config.scoring);
            const auto estimation = isde::split(train, split).estimation;
            if (wants(config, Method::isde)) {
                const auto best = solve_best(table);
                const auto fit = fit_partition_model(table, estimation, best.partition);
                rep.scores[Method::isde] = validation_score(
                    [&](std::span<const double> x) { return fitted_model_log_density(fit, x); }, valid);
                rep.isde_partition = best.partition;
                rep.exact_recovery = best.partition == truth;
                rep.admissible = is_admissible(best.partition, truth);
                rep.manifests.emplace(Method::isde, manifest_for_partition(table, best.partition));
            }
            if (wants(config, Method::fde)) {
                const auto forest = fit_fde(table, estimation);
                rep.scores[Method::fde] = validation_score(
                    [&](std::span<const double> x) { return forest_log_density(forest, x); }, valid);
                rep.fde_edges = forest.forest.edges().size();
                rep.manifests.emplace(Method::fde, manifest_for_forest(table, forest));
            }
        }
        if (wants(config, Method::cvkde)) {
            const auto model = fit_cvkde(train, config.scoring.grid, config.scoring.folds, seeds.cvkde);
            rep.scores[Method::cvkde] =
                validation_score([&](std::span<const double> x) { return model.log_density(x); }, valid);
            rep.manifests.emplace(Method::cvkde, manifest_for_cvkde(d, model.bandwidth()));
        }
        report.repeats.push_back(std::move(rep));
    }
    for (auto m : config.methods) {
        MethodSummary s{m, 0.0, 0.0, {}};
        for (const auto& rep : report.repeats) {
            s.scores.push_back(rep.scores.at(m));
        }
        s.mean = sample_mean(s.scores);
        s.sd = sample_sd(s.scores);
        report.summary.push_back(std::move(s));
    }
    return report;
}

nlohmann::json benchmark_to_json(const BenchmarkReport& report) {
    const auto& c = report.config;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["structure"] = c.sizes;
    j["n_train"] = c.n_train;
    j["m_valid"] = c.m_valid;
    j["repeats"] = c.repeats;
    j["seed"] = c.seed;
    j["k"] = c.k == 0 ? report.truth.n_features() : c.k;
    j["folds"] = c.scoring.folds;
    j["grid"] = {{"min", c.scoring.grid.min},
                 {"max", c.scoring.grid.max},
                 {"count", c.scoring.grid.count},
                 {"scale", c.scoring.grid.scale == GridScale::log ? "log" : "linear"}};
    j["synth"] = {{"ring_inner_radius", c.synth.ring_inner_radius},
                  {"ring_outer_radius", c.synth.ring_outer_radius},
                  {"ring_noise_sd", c.synth.ring_noise_sd},
                  {"xor_noise_variance", c.synth.xor_noise_variance},
                  {"mixture_weight_at_ones", c.synth.mixture_weight_at_ones},
                  {"mixture_sd", c.synth.mixture_sd}};
    j["truth"] = report.truth.to_lists();
    auto& methods = j["methods"] = nlohmann::json::array();
    for (const auto& s : report.summary) {
        methods.push_back({{"method", method_name(s.method)}, {"mean", s.mean}, {"sd", s.sd}, {"scores", s.scores}});
    }
    auto& reps = j["runs"] = nlohmann::json::array();
    std::size_t exact = 0;
    std::size_t admissible = 0;
    for (const auto& rep : report.repeats) {
        nlohmann::json r;
        r["data_seed"] = rep.data_seed;
        for (const auto& [m, v] : rep.scores) {
            r["scores"][method_name(m)] = v;
        }
        if (rep.isde_partition) {
            r["isde_partition"] = rep.isde_partition->to_lists();
            r["exact_recovery"] = rep.exact_recovery;
            r["admissible"] = rep.admissible;
            exact += rep.exact_recovery ? 1 : 0;
            admissible += rep.admissible ? 1 : 0;
        }
        if (rep.fde_edges) {
            r["fde_edges"] = *rep.fde_edges;
        }
        for (const auto& [m, man] : rep.manifests) {
            r["manifests"][method_name(m)] = manifest_to_json(man);
        }
        reps.push_back(std::move(r));
    }
    if (!report.repeats.empty() && report.repeats.front().isde_partition) {
        j["recovery_rate"] = static_cast<double>(exact) / static_cast<double>(report.repeats.size());
        j["admissible_rate"] = static_cast<double>(admissible) / static_cast<double>(report.repeats.size());
    }
    return j;
}

}  // namespace isde
