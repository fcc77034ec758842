#pragma once

#include "isde/baselines.hpp"
#include "isde/dataset.hpp"
#include "isde/scoring.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isde {

enum class Method { isde, isde_gauss, fde, cvkde };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct BlockBandwidth {
    FeatureSubset subset;
    double bandwidth = kNoBandwidth;
};

// Everything needed to rebuild a fitted density from its training data.
struct ModelManifest {
    Method method = Method::isde;
    std::size_t d = 0;
    std::size_t k = 0;
    std::optional<SplitSpec> split;  // absent for cvkde, which trains on every row
    // isde / isde-gauss
    std::optional<Partition> partition;
    std::vector<BlockBandwidth> blocks;
    // fde
    std::vector<std::pair<int, int>> edges;
    std::vector<double> univariate_bandwidths;
    std::vector<double> bivariate_bandwidths;
    // cvkde
    double bandwidth = kNoBandwidth;
    // optional featurewise rescaling fitted on the training data
    std::optional<ColumnScaler> scaler;
    // free-form provenance (paths, seeds, resolved config)
    nlohmann::json provenance = nlohmann::json::object();
};

ModelManifest manifest_for_partition(const SubsetScoreTable& table, const Partition& partition,
                                     Method method = Method::isde);
ModelManifest manifest_for_forest(const SubsetScoreTable& table, const ForestModel& forest);
ModelManifest manifest_for_cvkde(std::size_t d, double bandwidth);

// Log-density of the model described by `manifest`, rebuilt from `train`
// (already rescaled if the manifest carries a scaler).
LogDensityFn rebuild_log_density(const ModelManifest& manifest, const Dataset& train);

nlohmann::json manifest_to_json(const ModelManifest& manifest);
ModelManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const std::filesystem::path& path, const ModelManifest& manifest);
ModelManifest load_manifest(const std::filesystem::path& path);

}  // namespace isde
