#pragma once

#include "isde/dataset.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isde {

enum class GridScale { log, linear };

struct BandwidthGrid {
    double min = 0.01;
    double max = 1.0;
    std::size_t count = 30;
    GridScale scale = GridScale::log;
};

std::vector<double> make_grid(const BandwidthGrid& grid);

// Spherical Gaussian kernel density estimator with one scalar bandwidth.
//
//   f(x) = 1/m' sum_i exp(-|X_i - x|^2 / (2 h^2)) / ((2 pi)^{p/2} h^p)
//
// Evaluated in log space with the log-sum-exp shift, so log_density is finite
// for every finite input.
class KdeModel {
public:
    KdeModel(Eigen::MatrixXd train_points, double bandwidth);
    KdeModel(const Dataset& train, double bandwidth) : KdeModel(train.values(), bandwidth) {}

    [[nodiscard]] double log_density(std::span<const double> x) const;
    [[nodiscard]] double log_density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    // mean of log_density over the rows of eval_points
    [[nodiscard]] double mean_log_density(const Eigen::MatrixXd& eval_points) const;
    [[nodiscard]] double mean_log_density(const Dataset& eval) const { return mean_log_density(eval.values()); }

    [[nodiscard]] double bandwidth() const { return bandwidth_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(train_.cols()); }
    [[nodiscard]] std::size_t n_points() const { return static_cast<std::size_t>(train_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& train_points() const { return train_; }

private:
    Eigen::MatrixXd train_;  // m' x p, column-major
    double bandwidth_;
    double log_norm_;  // -log m' - p/2 log(2 pi) - p log h
};

struct CvResult {
    double bandwidth = 0.0;
    std::vector<double> grid;
    std::vector<double> scores;  // cv score per grid value
};

// V-fold cross-validated bandwidth. Rows are shuffled by `seed` and cut into
// contiguous near-equal folds (the first N mod V folds get one extra row).
// Ties go to the largest bandwidth.
CvResult select_bandwidth_cv(const Eigen::MatrixXd& train, std::span<const double> grid, std::size_t folds,
                             std::uint64_t seed);
CvResult select_bandwidth_cv(const Dataset& train, const BandwidthGrid& grid, std::size_t folds, std::uint64_t seed);

// Fold index of every row for select_bandwidth_cv's assignment.
std::vector<std::size_t> assign_folds(std::size_t n_rows, std::size_t folds, std::uint64_t seed);

// Counters for KDE work performed in this process.
struct KdeStats {
    std::uint64_t models_built = 0;
    std::uint64_t cv_runs = 0;
};
KdeStats kde_stats();

}  // namespace isde
