#include "isde/baselines.hpp"

#include "isde/error.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace isde {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

Forest::Forest(std::size_t d, std::vector<std::pair<int, int>> edges) : d_(d), edges_(std::move(edges)) {
    std::vector<std::size_t> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    for (auto& [a, b] : edges_) {
        if (a > b) {
            std::swap(a, b);
        }
        if (a < 0 || a == b || static_cast<std::size_t>(b) >= d) {
            throw std::invalid_argument("Forest: invalid edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        const auto ra = find_root(parent, static_cast<std::size_t>(a));
        const auto rb = find_root(parent, static_cast<std::size_t>(b));
        if (ra == rb) {
            throw std::invalid_argument("Forest: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                        ") closes a cycle");
        }
        parent[std::max(ra, rb)] = std::min(ra, rb);
    }
}

KdeModel fit_cvkde(const Dataset& ds, const BandwidthGrid& grid, std::size_t folds, std::uint64_t seed) {
    const auto cv = select_bandwidth_cv(ds, grid, folds, seed);
    return KdeModel(ds, cv.bandwidth);
}

double edge_weight(const SubsetScoreTable& table, int i, int j) {
    const auto& pair = table.at(FeatureSubset({std::min(i, j), std::max(i, j)}));
    return pair.score - table.at(FeatureSubset({i})).score - table.at(FeatureSubset({j})).score;
}

ForestModel fit_fde(const SubsetScoreTable& table, const Dataset& estimation) {
    const std::size_t d = table.d();
    if (estimation.n_features() != d) {
        throw std::invalid_argument("fit_fde: dataset width differs from table d");
    }
    if (table.estimator() != Estimator::kde) {
        throw std::invalid_argument("fit_fde: needs a KDE score table");
    }
    struct Candidate {
        double weight;
        int a;
        int b;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(d); ++i) {
        for (int j = i + 1; j < static_cast<int>(d); ++j) {
            if (table.find(FeatureSubset({i, j}).mask()) == nullptr) {
                throw std::invalid_argument("fit_fde: score table lacks pair {" + std::to_string(i) + "-" +
                                            std::to_string(j) + "}");
            }
            candidates.push_back({edge_weight(table, i, j), i, j});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });

    std::vector<std::size_t> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::pair<int, int>> edges;
    for (const auto& c : candidates) {
        if (!(c.weight > 0.0)) {
            break;
        }
        const auto ra = find_root(parent, static_cast<std::size_t>(c.a));
        const auto rb = find_root(parent, static_cast<std::size_t>(c.b));
        if (ra == rb) {
            continue;
        }
        parent[std::max(ra, rb)] = std::min(ra, rb);
        edges.emplace_back(c.a, c.b);
    }

    ForestModel model{Forest(d, edges), {}, {}};
    for (int i = 0; i < static_cast<int>(d); ++i) {
        const FeatureSubset s({i});
        model.univariate.emplace_back(restrict(estimation, s), table.at(s).bandwidth);
    }
    for (const auto& [a, b] : model.forest.edges()) {
        const FeatureSubset s({a, b});
        model.bivariate.emplace_back(restrict(estimation, s), table.at(s).bandwidth);
    }
    return model;
}

double forest_log_density(const ForestModel& model, std::span<const double> x) {
    if (x.size() != model.forest.d()) {
        throw std::invalid_argument("forest_log_density: point has dimension " + std::to_string(x.size()) +
                                    ", model has " + std::to_string(model.forest.d()));
    }
    std::vector<double> uni(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        uni[i] = model.univariate[i].log_density(x.subspan(i, 1));
        total += uni[i];
    }
    const auto& edges = model.forest.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [a, b] = edges[e];
        const double pair[2] = {x[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(b)]};
        total += model.bivariate[e].log_density(pair) - uni[static_cast<std::size_t>(a)] -
                 uni[static_cast<std::size_t>(b)];
    }
    return total;
}

FittedModel fit_partition_model(const SubsetScoreTable& table, const Dataset& estimation,
                                const Partition& partition) {
    if (partition.n_features() != table.d() || estimation.n_features() != table.d()) {
        throw std::invalid_argument("fit_partition_model: partition, table and data widths differ");
    }
    FittedModel fit{partition, {}};
    for (const auto& block : partition.blocks()) {
        const auto w = restrict(estimation, block);
        if (table.estimator() == Estimator::kde) {
            fit.blocks.emplace_back(std::in_place_type<KdeModel>, w, table.at(block).bandwidth);
        } else {
            fit.blocks.emplace_back(CenteredGaussian::fit(w.values()));
        }
    }
    return fit;
}

double fitted_model_log_density(const FittedModel& fit, std::span<const double> x) {
    if (x.size() != fit.partition.n_features()) {
        throw std::invalid_argument("fitted_model_log_density: point has dimension " + std::to_string(x.size()) +
                                    ", model has " + std::to_string(fit.partition.n_features()));
    }
    double total = 0.0;
    std::vector<double> sub;
    for (std::size_t b = 0; b < fit.blocks.size(); ++b) {
        sub.clear();
        for (int i : fit.partition.blocks()[b].indices()) {
            sub.push_back(x[static_cast<std::size_t>(i)]);
        }
        total += std::visit([&](const auto& est) { return est.log_density(std::span<const double>(sub)); }, fit.blocks[b]);
    }
    return total;
}

double blockwise_mean_log_density(const FittedModel& fit, const Dataset& points) {
    if (points.n_features() != fit.partition.n_features()) {
        throw std::invalid_argument("blockwise_mean_log_density: dimension mismatch");
    }
    double total = 0.0;
    for (std::size_t b = 0; b < fit.blocks.size(); ++b) {
        const auto z = restrict(points, fit.partition.blocks()[b]);
        total += std::visit([&](const auto& est) { return est.mean_log_density(z.values()); }, fit.blocks[b]);
    }
    return total;
}

double validation_score(const LogDensityFn& log_density, const Dataset& valid) {
    const Eigen::MatrixXd rows = valid.values().transpose();
    double total = 0.0;
    for (Eigen::Index r = 0; r < rows.cols(); ++r) {
        total += log_density(std::span<const double>(rows.col(r).data(), valid.n_features()));
    }
    return total / static_cast<double>(valid.n_rows());
}

}  // namespace isde
