#pragma once

#include "isde/dataset.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isde {

// Symmetric d x d matrix (symmetry checked to 1e-12 relative to the largest entry).
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Eigen::MatrixXd entries);

    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] bool is_positive_definite() const;

private:
    Eigen::MatrixXd m_;
};

struct BlockStructure {
    std::vector<std::size_t> sizes;
    double sigma = 0.7;

    [[nodiscard]] std::size_t dim() const;
    [[nodiscard]] Partition partition() const;
};

// Block diagonal: ones on the diagonal, sigma inside each block, zero across blocks.
CovarianceMatrix build_block_covariance(const BlockStructure& bs);
// N rows from N(0, cov) as L z with cov = L L^T and z standard normal.
Dataset sample_gaussian(const CovarianceMatrix& cov, std::size_t n_rows, std::uint64_t seed);
// Second-moment matrix (1/N) sum_i X_i X_i^T; no mean subtraction (centered model).
CovarianceMatrix empirical_covariance(const Dataset& ds);
// Second-moment estimate inside each block of P, zero across blocks.
CovarianceMatrix blockwise_covariance(const Dataset& ds, const Partition& partition);

struct KlForms {
    double trace_logdet = 0.0;  // 1/2 (log det S2 - log det S1 + tr(S2^-1 S1) - d)
    double spectrum = 0.0;      // sum over eigenvalues v of (S2^-1 - S1^-1) S1 of (v - log(1+v)) / 2
};

// KL(N(0, sigma1) || N(0, sigma2)) in both closed forms. Throws
// ComputationError if either input is not positive definite or 1 + v <= 0.
KlForms gaussian_kl_forms(const CovarianceMatrix& sigma1, const CovarianceMatrix& sigma2);
// Trace/log-det value after asserting agreement with the spectrum form.
double gaussian_kl(const CovarianceMatrix& sigma1, const CovarianceMatrix& sigma2);

// Centered multivariate normal used as a block estimator.
class CenteredGaussian {
public:
    // Throws ComputationError if cov is not positive definite.
    explicit CenteredGaussian(const Eigen::MatrixXd& cov);
    // Fits the second-moment matrix of `data`. A singular estimate receives a
    // diagonal ridge of 1e-9 * trace / p and `ridged()` reports it.
    static CenteredGaussian fit(const Eigen::MatrixXd& data);

    [[nodiscard]] double log_density(std::span<const double> x) const;
    [[nodiscard]] double mean_log_density(const Eigen::MatrixXd& points) const;
    [[nodiscard]] const Eigen::MatrixXd& covariance() const { return cov_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(cov_.rows()); }
    [[nodiscard]] bool ridged() const { return ridged_; }

private:
    Eigen::MatrixXd cov_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double log_norm_ = 0.0;
    bool ridged_ = false;
};

}  // namespace isde
