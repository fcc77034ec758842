#include "isde/gauss_experiment.hpp"

#include "isde/rng.hpp"
#include "isde/scoring.hpp"
#include "isde/solver.hpp"
#include "isde/synth.hpp"

#include <stdexcept>

namespace isde {

GaussExperimentReport run_gaussian_experiment(const GaussExperimentConfig& config) {
    if (config.structure.sizes.empty() || config.repeats < 1 || config.n_rows < 2) {
        throw std::invalid_argument("run_gaussian_experiment: need a structure, repeats >= 1 and N >= 2");
    }
    const auto truth_cov = build_block_covariance(config.structure);
    const auto truth = config.structure.partition();
    const std::size_t d = config.structure.dim();
    const std::size_t k = config.k == 0 ? d : config.k;

    GaussExperimentReport report{config, truth, {}, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> kl_isde;
    std::vector<double> kl_emp;
    std::size_t exact = 0;
    std::size_t admissible = 0;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto base = derive_seed(config.seed, r);
        const auto data_seed = derive_seed(base, 1);
        const auto data = sample_gaussian(truth_cov, config.n_rows, data_seed);
        const SplitSpec split{config.n_rows / 2, config.n_rows - config.n_rows / 2, derive_seed(base, 2)};
        const auto table = gaussian_score_all_subsets(data, k, split, config.workers);
        const auto best = solve_best(table);

        GaussRepeat rep{data_seed,
                        best.partition,
                        gaussian_kl(truth_cov, blockwise_covariance(data, best.partition)),
                        gaussian_kl(truth_cov, empirical_covariance(data)),
                        best.partition == truth,
                        is_admissible(best.partition, truth)};
        kl_isde.push_back(rep.kl_isde);
        kl_emp.push_back(rep.kl_empirical);
        exact += rep.exact_recovery ? 1 : 0;
        admissible += rep.admissible ? 1 : 0;
        report.repeats.push_back(std::move(rep));
    }
    const auto reps = static_cast<double>(config.repeats);
    report.kl_isde_mean = sample_mean(kl_isde);
    report.kl_isde_sd = sample_sd(kl_isde);
    report.kl_empirical_mean = sample_mean(kl_emp);
    report.kl_empirical_sd = sample_sd(kl_emp);
    report.recovery_rate = static_cast<double>(exact) / reps;
    report.admissible_rate = static_cast<double>(admissible) / reps;
    return report;
}

nlohmann::json gauss_report_to_json(const GaussExperimentReport& report) {
    const auto& c = report.config;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["structure"] = c.structure.sizes;
    j["sigma"] = c.structure.sigma;
    j["n"] = c.n_rows;
    j["repeats"] = c.repeats;
    j["seed"] = c.seed;
    j["k"] = c.k == 0 ? c.structure.dim() : c.k;
    j["truth"] = report.truth.to_lists();
    j["kl_x1000"] = {
        {"isde", {{"mean", 1000.0 * report.kl_isde_mean}, {"sd", 1000.0 * report.kl_isde_sd}}},
        {"empirical", {{"mean", 1000.0 * report.kl_empirical_mean}, {"sd", 1000.0 * report.kl_empirical_sd}}}};
    j["recovery_percent"] = 100.0 * report.recovery_rate;
    j["admissible_percent"] = 100.0 * report.admissible_rate;
    auto& runs = j["runs"] = nlohmann::json::array();
    for (const auto& rep : report.repeats) {
        runs.push_back({{"data_seed", rep.data_seed},
                        {"isde_partition", rep.isde_partition.to_lists()},
                        {"kl_isde", rep.kl_isde},
                        {"kl_empirical", rep.kl_empirical},
                        {"exact_recovery", rep.exact_recovery},
                        {"admissible", rep.admissible}});
    }
    return j;
}

}  // namespace isde
