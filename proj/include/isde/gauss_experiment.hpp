#pragma once

#include "isde/dataset.hpp"
#include "isde/gaussian.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace isde {

struct GaussExperimentConfig {
    BlockStructure structure;
    std::size_t n_rows = 6000;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::size_t k = 0;  // 0 means k = d
    std::size_t workers = 1;
};

struct GaussRepeat {
    std::uint64_t data_seed = 0;
    Partition isde_partition;
    double kl_isde = 0.0;
    double kl_empirical = 0.0;
    bool exact_recovery = false;
    bool admissible = false;
};

struct GaussExperimentReport {
    GaussExperimentConfig config;
    Partition truth;
    std::vector<GaussRepeat> repeats;
    double kl_isde_mean = 0.0;
    double kl_isde_sd = 0.0;
    double kl_empirical_mean = 0.0;
    double kl_empirical_sd = 0.0;
    double recovery_rate = 0.0;
    double admissible_rate = 0.0;
};

// Per repeat r: base = derive_seed(seed, r), sample seed = derive_seed(base, 1),
// split seed = derive_seed(base, 2), m = n = N/2. The ISDE covariance is the
// blockwise second-moment estimate on all N rows over the selected partition.
GaussExperimentReport run_gaussian_experiment(const GaussExperimentConfig& config);

// KL values are reported multiplied by 1000.
nlohmann::json gauss_report_to_json(const GaussExperimentReport& report);

}  // namespace isde
