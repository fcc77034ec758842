#pragma once

#include "isde/dataset.hpp"
#include "isde/manifest.hpp"
#include "isde/scoring.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace isde {

// Generator constants the block families leave open.
struct SynthConfig {
    double ring_inner_radius = 0.5;
    double ring_outer_radius = 1.0;
    double ring_noise_sd = 0.05;
    double xor_noise_variance = 0.08;
    double mixture_weight_at_ones = 0.5;
    double mixture_sd = 1.0;
};

// One independent block of `size` features:
//   1  -> uniform on [0, 1]
//   2  -> two noisy concentric rings, radius chosen with equal odds
//   3  -> (Y1, Y2, |Y1 - Y2|) + Gaussian noise, Y1, Y2 ~ Bernoulli(1/2)
//   4+ -> mixture of N(0, I) and N(1, I)
Dataset gen_block(std::size_t size, std::size_t n_rows, std::uint64_t seed, const SynthConfig& config = {});

struct StructureSpec {
    std::vector<std::size_t> sizes;
    std::uint64_t seed = 0;
    std::size_t n_rows = 0;
};

struct GeneratedData {
    Dataset data;
    Partition truth;
};

// Column-wise concatenation of independent blocks, then featurewise rescaling.
GeneratedData gen_structure(const StructureSpec& spec, const SynthConfig& config = {});

struct BenchmarkConfig {
    std::vector<std::size_t> sizes;
    std::size_t n_train = 5000;
    std::size_t m_valid = 5000;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::vector<Method> methods{Method::isde, Method::fde, Method::cvkde};
    std::size_t k = 0;  // 0 means k = d
    ScoringOptions scoring;
    SynthConfig synth;
};

struct BenchmarkRepeat {
    std::uint64_t data_seed = 0;
    std::map<Method, double> scores;
    std::optional<Partition> isde_partition;
    bool exact_recovery = false;
    bool admissible = false;
    std::optional<std::size_t> fde_edges;
    std::map<Method, ModelManifest> manifests;
};

struct MethodSummary {
    Method method;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1)
    std::vector<double> scores;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    Partition truth;
    std::vector<BenchmarkRepeat> repeats;
    std::vector<MethodSummary> summary;
};

// Seeds per repeat r: base = derive_seed(seed, r), data = derive_seed(base, 1),
// split = derive_seed(base, 2), cvkde folds = derive_seed(base, 3). Train and
// validation rows come from one generated pool of n_train + m_valid rows, so
// both share the same rescaling.
BenchmarkReport run_synthetic_benchmark(const BenchmarkConfig& config);

// Regenerates the training rows of repeat `r` exactly as the benchmark did.
Dataset benchmark_training_data(const BenchmarkConfig& config, std::size_t repeat);
Dataset benchmark_validation_data(const BenchmarkConfig& config, std::size_t repeat);

nlohmann::json benchmark_to_json(const BenchmarkReport& report);

double sample_mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace isde
