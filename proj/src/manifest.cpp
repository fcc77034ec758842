#include "isde/manifest.hpp"

#include "isde/error.hpp"
#include "isde/gaussian.hpp"

#include <fstream>
#include <memory>
#include <stdexcept>

namespace isde {

const char* method_name(Method m) {
    switch (m) {
        case Method::isde:
            return "isde";
        case Method::isde_gauss:
            return "isde-gauss";
        case Method::fde:
            return "fde";
        case Method::cvkde:
            return "cvkde";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (auto m : {Method::isde, Method::isde_gauss, Method::fde, Method::cvkde}) {
        if (name == method_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown method '" + name + "' (expected isde, isde-gauss, fde or cvkde)");
}

ModelManifest manifest_for_partition(const SubsetScoreTable& table, const Partition& partition, Method method) {
    ModelManifest m;
    m.method = method;
    m.d = table.d();
    m.k = table.k();
    m.split = table.split();
    m.partition = partition;
    for (const auto& block : partition.blocks()) {
        m.blocks.push_back({block, table.at(block).bandwidth});
    }
    return m;
}

ModelManifest manifest_for_forest(const SubsetScoreTable& table, const ForestModel& forest) {
    ModelManifest m;
    m.method = Method::fde;
    m.d = table.d();
    m.k = 2;
    m.split = table.split();
    m.edges = forest.forest.edges();
    for (const auto& u : forest.univariate) {
        m.univariate_bandwidths.push_back(u.bandwidth());
    }
    for (const auto& b : forest.bivariate) {
        m.bivariate_bandwidths.push_back(b.bandwidth());
    }
    return m;
}

ModelManifest manifest_for_cvkde(std::size_t d, double bandwidth) {
    ModelManifest m;
    m.method = Method::cvkde;
    m.d = d;
    m.k = d;
    m.bandwidth = bandwidth;
    return m;
}

LogDensityFn rebuild_log_density(const ModelManifest& manifest, const Dataset& train) {
    if (train.n_features() != manifest.d) {
        throw std::invalid_argument("manifest describes d = " + std::to_string(manifest.d) +
                                    " but the training data has " + std::to_string(train.n_features()) +
                                    " columns");
    }
    if (manifest.method == Method::cvkde) {
        auto model = std::make_shared<KdeModel>(train, manifest.bandwidth);
        return [model](std::span<const double> x) { return model->log_density(x); };
    }
    if (!manifest.split) {
        throw std::invalid_argument("manifest lacks the estimation/scoring split");
    }
    const auto estimation = split(train, *manifest.split).estimation;
    if (manifest.method == Method::fde) {
        if (manifest.univariate_bandwidths.size() != manifest.d ||
            manifest.bivariate_bandwidths.size() != manifest.edges.size()) {
            throw std::invalid_argument("fde manifest: bandwidth lists do not match d / edges");
        }
        auto model = std::make_shared<ForestModel>(ForestModel{Forest(manifest.d, manifest.edges), {}, {}});
        for (std::size_t i = 0; i < manifest.d; ++i) {
            model->univariate.emplace_back(restrict(estimation, FeatureSubset({static_cast<int>(i)})),
                                           manifest.univariate_bandwidths[i]);
        }
        for (std::size_t e = 0; e < manifest.edges.size(); ++e) {
            const auto [a, b] = model->forest.edges()[e];
            model->bivariate.emplace_back(restrict(estimation, FeatureSubset({a, b})),
                                          manifest.bivariate_bandwidths[e]);
        }
        return [model](std::span<const double> x) { return forest_log_density(*model, x); };
    }
    if (!manifest.partition || manifest.blocks.size() != manifest.partition->n_blocks()) {
        throw std::invalid_argument("manifest lacks a partition with one entry per block");
    }
    auto fit = std::make_shared<FittedModel>(FittedModel{*manifest.partition, {}});
    for (const auto& b : manifest.blocks) {
        const auto w = restrict(estimation, b.subset);
        if (manifest.method == Method::isde) {
            fit->blocks.emplace_back(std::in_place_type<KdeModel>, w, b.bandwidth);
        } else {
            fit->blocks.emplace_back(CenteredGaussian::fit(w.values()));
        }
    }
    return [fit](std::span<const double> x) { return fitted_model_log_density(*fit, x); };
}

nlohmann::json manifest_to_json(const ModelManifest& m) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["method"] = method_name(m.method);
    j["d"] = m.d;
    j["k"] = m.k;
    if (m.split) {
        j["split"] = {{"m", m.split->m}, {"n", m.split->n}, {"seed", m.split->seed}};
        j["marginals_fit_on"] = "estimation_sample";
    } else {
        j["marginals_fit_on"] = "all_rows";
    }
    if (m.partition) {
        j["partition"] = m.partition->to_lists();
        auto& blocks = j["blocks"] = nlohmann::json::array();
        for (const auto& b : m.blocks) {
            blocks.push_back({{"subset", b.subset.indices()}, {"bandwidth", b.bandwidth}});
        }
    }
    if (m.method == Method::fde) {
        j["forest"] = {{"edges", m.edges},
                       {"univariate_bandwidths", m.univariate_bandwidths},
                       {"bivariate_bandwidths", m.bivariate_bandwidths}};
    }
    if (m.method == Method::cvkde) {
        j["bandwidth"] = m.bandwidth;
    }
    if (m.scaler) {
        j["rescale"] = {{"min", m.scaler->min}, {"max", m.scaler->max}};
    } else {
        j["rescale"] = nullptr;
    }
    j["provenance"] = m.provenance;
    return j;
}

ModelManifest manifest_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != 1) {
            throw IoError("model manifest: unsupported schema_version " + j.at("schema_version").dump());
        }
        ModelManifest m;
        m.method = parse_method(j.at("method").get<std::string>());
        m.d = j.at("d").get<std::size_t>();
        m.k = j.at("k").get<std::size_t>();
        if (j.contains("split")) {
            const auto& s = j.at("split");
            m.split = SplitSpec{s.at("m").get<std::size_t>(), s.at("n").get<std::size_t>(),
                                s.at("seed").get<std::uint64_t>()};
        }
        if (j.contains("partition")) {
            std::vector<FeatureSubset> blocks;
            for (const auto& b : j.at("partition")) {
                blocks.emplace_back(b.get<std::vector<int>>());
            }
            m.partition = Partition(std::move(blocks));
            for (const auto& b : j.at("blocks")) {
                m.blocks.push_back({FeatureSubset(b.at("subset").get<std::vector<int>>()),
                                    b.at("bandwidth").get<double>()});
            }
        }
        if (j.contains("forest")) {
            const auto& f = j.at("forest");
            m.edges = f.at("edges").get<std::vector<std::pair<int, int>>>();
            m.univariate_bandwidths = f.at("univariate_bandwidths").get<std::vector<double>>();
            m.bivariate_bandwidths = f.at("bivariate_bandwidths").get<std::vector<double>>();
        }
        if (j.contains("bandwidth")) {
            m.bandwidth = j.at("bandwidth").get<double>();
        }
        if (j.contains("rescale") && !j.at("rescale").is_null()) {
            m.scaler = ColumnScaler{j.at("rescale").at("min").get<std::vector<double>>(),
                                    j.at("rescale").at("max").get<std::vector<double>>()};
        }
        if (j.contains("provenance")) {
            m.provenance = j.at("provenance");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model manifest: malformed JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("model manifest: ") + e.what());
    }
}

void save_manifest(const std::filesystem::path& path, const ModelManifest& manifest) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << manifest_to_json(manifest).dump(1) << '\n';
}

ModelManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

}  // namespace isde
