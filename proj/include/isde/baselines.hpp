#pragma once

#include "isde/dataset.hpp"
#include "isde/gaussian.hpp"
#include "isde/kde.hpp"
#include "isde/scoring.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace isde {

// Acyclic set of undirected feature pairs (i < j).
class Forest {
public:
    Forest(std::size_t d, std::vector<std::pair<int, int>> edges);

    [[nodiscard]] std::size_t d() const { return d_; }
    [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }

private:
    std::size_t d_;
    std::vector<std::pair<int, int>> edges_;
};

struct ForestModel {
    Forest forest;
    std::vector<KdeModel> univariate;  // one per feature
    std::vector<KdeModel> bivariate;   // aligned with forest.edges()
};

// Full-dimensional KDE on every row with a cross-validated bandwidth.
KdeModel fit_cvkde(const Dataset& ds, const BandwidthGrid& grid, std::size_t folds, std::uint64_t seed);

// Held-out gain of joining i and j: score({i,j}) - score({i}) - score({j}).
double edge_weight(const SubsetScoreTable& table, int i, int j);

// Kruskal on held-out gains, adding only edges with positive gain. Marginal
// KDEs are rebuilt on `estimation` with the bandwidths stored in the table.
ForestModel fit_fde(const SubsetScoreTable& table, const Dataset& estimation);

double forest_log_density(const ForestModel& model, std::span<const double> x);

using BlockEstimator = std::variant<KdeModel, CenteredGaussian>;

// Product-of-marginals density over a partition.
struct FittedModel {
    Partition partition;
    std::vector<BlockEstimator> blocks;  // aligned with partition.blocks()
};

// Block estimators for `partition` built on `estimation`: KDE blocks reuse the
// table's bandwidths, Gaussian blocks refit the block's second-moment matrix.
FittedModel fit_partition_model(const SubsetScoreTable& table, const Dataset& estimation,
                                const Partition& partition);

double fitted_model_log_density(const FittedModel& fit, std::span<const double> x);
// Sum over blocks of each block's mean log-density on `points`; with the table's
// scoring sample this reproduces partition_score exactly.
double blockwise_mean_log_density(const FittedModel& fit, const Dataset& points);

using LogDensityFn = std::function<double(std::span<const double>)>;

// (1/M) sum_i log f(X_i), accumulated in row order.
double validation_score(const LogDensityFn& log_density, const Dataset& valid);

}  // namespace isde
