#include "isde/gaussian.hpp"

#include "isde/error.hpp"
#include "isde/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isde {

namespace {

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* who) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
        throw ComputationError(std::string(who) + ": matrix is not positive definite");
    }
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw std::invalid_argument("CovarianceMatrix: must be square and nonempty");
    }
    if (!m_.allFinite()) {
        throw std::invalid_argument("CovarianceMatrix: non-finite entry");
    }
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("CovarianceMatrix: not symmetric");
    }
}

bool CovarianceMatrix::is_positive_definite() const {
    Eigen::LLT<Eigen::MatrixXd> llt(m_);
    return llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all();
}

std::size_t BlockStructure::dim() const {
    std::size_t d = 0;
    for (auto s : sizes) {
        d += s;
    }
    return d;
}

Partition BlockStructure::partition() const {
    return Partition::from_sizes(sizes);
}

CovarianceMatrix build_block_covariance(const BlockStructure& bs) {
    if (bs.sizes.empty()) {
        throw std::invalid_argument("build_block_covariance: empty structure");
    }
    if (!(bs.sigma > 0.0 && bs.sigma < 1.0)) {
        throw std::invalid_argument("build_block_covariance: sigma must lie in (0, 1)");
    }
    const auto d = static_cast<Eigen::Index>(bs.dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    Eigen::Index start = 0;
    for (auto s : bs.sizes) {
        if (s == 0) {
            throw std::invalid_argument("build_block_covariance: zero block size");
        }
        const auto n = static_cast<Eigen::Index>(s);
        m.block(start, start, n, n).setConstant(bs.sigma);
        m.block(start, start, n, n).diagonal().setOnes();
        start += n;
    }
    return CovarianceMatrix(std::move(m));
}

Dataset sample_gaussian(const CovarianceMatrix& cov, std::size_t n_rows, std::uint64_t seed) {
    if (n_rows < 1) {
        throw std::invalid_argument("sample_gaussian: need at least one row");
    }
    const auto llt = checked_llt(cov.matrix(), "sample_gaussian");
    const Eigen::MatrixXd lower = llt.matrixL();
    const auto d = static_cast<Eigen::Index>(cov.dim());
    Rng rng(seed);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n_rows), d);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            z(r, c) = rng.normal();
        }
    }
    return Dataset(z * lower.transpose());
}

CovarianceMatrix empirical_covariance(const Dataset& ds) {
    const auto& x = ds.values();
    Eigen::MatrixXd s = (x.transpose() * x) / static_cast<double>(x.rows());
    // exact symmetry regardless of the product kernel's rounding
    s = (0.5 * (s + s.transpose())).eval();
    return CovarianceMatrix(std::move(s));
}

CovarianceMatrix blockwise_covariance(const Dataset& ds, const Partition& partition) {
    if (partition.n_features() != ds.n_features()) {
        throw std::invalid_argument("blockwise_covariance: partition does not match dataset width");
    }
    const auto d = static_cast<Eigen::Index>(ds.n_features());
    const auto full = empirical_covariance(ds).matrix();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (const auto& block : partition.blocks()) {
        for (int i : block.indices()) {
            for (int j : block.indices()) {
                out(i, j) = full(i, j);
            }
        }
    }
    return CovarianceMatrix(std::move(out));
}

KlForms gaussian_kl_forms(const CovarianceMatrix& sigma1, const CovarianceMatrix& sigma2) {
    if (sigma1.dim() != sigma2.dim()) {
        throw std::invalid_argument("gaussian_kl: dimension mismatch");
    }
    const auto llt1 = checked_llt(sigma1.matrix(), "gaussian_kl");
    const auto llt2 = checked_llt(sigma2.matrix(), "gaussian_kl");
    const auto d = static_cast<double>(sigma1.dim());

    const Eigen::MatrixXd ratio = llt2.solve(sigma1.matrix());  // S2^-1 S1
    KlForms out;
    out.trace_logdet = 0.5 * (log_det(llt2) - log_det(llt1) + ratio.trace() - d);

    // A = (S2^-1 - S1^-1) S1 = S2^-1 S1 - I
    const Eigen::MatrixXd a = ratio - Eigen::MatrixXd::Identity(ratio.rows(), ratio.cols());
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw ComputationError("gaussian_kl: eigenvalue computation failed");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const auto ev = solver.eigenvalues()[i];
        if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real()))) {
            throw ComputationError("gaussian_kl: complex eigenvalue in spectrum form");
        }
        const double v = ev.real();
        if (!(1.0 + v > 0.0)) {
            throw ComputationError("gaussian_kl: eigenvalue with 1 + v <= 0");
        }
        total += 0.5 * (v - std::log1p(v));
    }
    out.spectrum = total;
    return out;
}

double gaussian_kl(const CovarianceMatrix& sigma1, const CovarianceMatrix& sigma2) {
    const auto forms = gaussian_kl_forms(sigma1, sigma2);
    if (std::abs(forms.trace_logdet - forms.spectrum) > 1e-8 * (1.0 + std::abs(forms.trace_logdet))) {
        throw ComputationError("gaussian_kl: trace/log-det form " + std::to_string(forms.trace_logdet) +
                               " disagrees with spectrum form " + std::to_string(forms.spectrum));
    }
    return forms.trace_logdet;
}

CenteredGaussian::CenteredGaussian(const Eigen::MatrixXd& cov) : cov_(cov) {
    llt_ = checked_llt(cov_, "CenteredGaussian");
    log_norm_ = -0.5 * log_det(llt_) - 0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
}

CenteredGaussian CenteredGaussian::fit(const Eigen::MatrixXd& data) {
    if (data.rows() < 1 || data.cols() < 1) {
        throw std::invalid_argument("CenteredGaussian::fit: empty data");
    }
    Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(data.rows());
    cov = (0.5 * (cov + cov.transpose())).eval();
    Eigen::LLT<Eigen::MatrixXd> probe(cov);
    // Rounding can let an exactly singular matrix through LLT with a tiny pivot, so
    // pivots are judged relative to the largest variance.
    const double scale = cov.diagonal().maxCoeff();
    if (probe.info() == Eigen::Success && scale > 0.0 &&
        probe.matrixLLT().diagonal().array().square().minCoeff() > 1e-12 * scale) {
        return CenteredGaussian(cov);
    }
    const double trace = cov.trace();
    const double ridge = trace > 0.0 ? 1e-9 * trace / static_cast<double>(cov.rows()) : 1e-9;
    std::cerr << "warning: singular " << cov.rows() << "x" << cov.cols()
              << " second-moment matrix, adding ridge " << ridge << '\n';
    cov.diagonal().array() += ridge;
    CenteredGaussian g(cov);
    g.ridged_ = true;
    return g;
}

double CenteredGaussian::log_density(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("CenteredGaussian::log_density: dimension mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd w = llt_.matrixL().solve(v);
    return log_norm_ - 0.5 * w.squaredNorm();
}

double CenteredGaussian::mean_log_density(const Eigen::MatrixXd& points) const {
    if (points.rows() < 1 || static_cast<std::size_t>(points.cols()) != dim()) {
        throw std::invalid_argument("CenteredGaussian::mean_log_density: bad evaluation matrix");
    }
    const Eigen::MatrixXd w = llt_.matrixL().solve(points.transpose());
    const double quad = w.colwise().squaredNorm().sum();
    return log_norm_ - 0.5 * quad / static_cast<double>(points.rows());
}

}  // namespace isde
