#include "isde/kde.hpp"

#include "isde/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#if defined(ISDE_HAVE_MVEC) && defined(__x86_64__)
#include <immintrin.h>
extern "C" __m512d _ZGVeN8v_exp(__m512d);  // glibc libmvec
#define ISDE_AVX512_EXP 1
#endif

namespace isde {

namespace {

std::atomic<std::uint64_t> g_models_built{0};
std::atomic<std::uint64_t> g_cv_runs{0};

// exp(-60) * 1e6 is far below double rounding of a sum that is >= 1.
constexpr double kDropExponent = 60.0;

double log_normalizer(std::size_t n_points, std::size_t dim, double h) {
    const auto p = static_cast<double>(dim);
    return -std::log(static_cast<double>(n_points)) - 0.5 * p * std::log(2.0 * std::numbers::pi) - p * std::log(h);
}

// Squared distances from x to every row of `points`, written into `out`.
void squared_distances(const Eigen::MatrixXd& points, const double* x, Eigen::ArrayXd& out) {
    out = (points.col(0).array() - x[0]).square();
    for (Eigen::Index c = 1; c < points.cols(); ++c) {
        out += (points.col(c).array() - x[c]).square();
    }
}

double sum_exp_generic(const double* s, Eigen::Index n, double scale) {
    return (Eigen::Map<const Eigen::ArrayXd>(s, n) * scale).exp().sum();
}

#ifdef ISDE_AVX512_EXP
__attribute__((target("avx512f"))) double sum_exp_avx512(const double* s, Eigen::Index n, double scale) {
    const __m512d f = _mm512_set1_pd(scale);
    __m512d acc = _mm512_setzero_pd();
    Eigen::Index i = 0;
    for (; i + 8 <= n; i += 8) {
        acc = _mm512_add_pd(acc, _ZGVeN8v_exp(_mm512_mul_pd(_mm512_loadu_pd(s + i), f)));
    }
    if (i < n) {
        const auto mask = static_cast<__mmask8>((1u << (n - i)) - 1u);
        const __m512d e = _ZGVeN8v_exp(_mm512_mul_pd(_mm512_maskz_loadu_pd(mask, s + i), f));
        acc = _mm512_mask_add_pd(acc, mask, acc, e);
    }
    return _mm512_reduce_add_pd(acc);
}
#endif

// sum_i exp(scale * s[i]); picks the 8-wide path when the CPU has it.
double sum_exp(const double* s, Eigen::Index n, double scale) {
#ifdef ISDE_AVX512_EXP
    static const bool wide = __builtin_cpu_supports("avx512f");
    if (wide) {
        return sum_exp_avx512(s, n, scale);
    }
#endif
    return sum_exp_generic(s, n, scale);
}

}  // namespace

std::vector<double> make_grid(const BandwidthGrid& grid) {
    if (!(grid.min > 0.0) || !(grid.max >= grid.min) || grid.count < 1 || !std::isfinite(grid.max)) {
        throw std::invalid_argument("make_grid: need 0 < min <= max and count >= 1");
    }
    std::vector<double> out(grid.count);
    if (grid.count == 1) {
        out[0] = grid.min;
        return out;
    }
    const double steps = static_cast<double>(grid.count - 1);
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = static_cast<double>(i) / steps;
        out[i] = grid.scale == GridScale::log ? grid.min * std::pow(grid.max / grid.min, t)
                                              : grid.min + (grid.max - grid.min) * t;
    }
    out.front() = grid.min;
    out.back() = grid.max;
    return out;
}

KdeModel::KdeModel(Eigen::MatrixXd train_points, double bandwidth)
    : train_(std::move(train_points)), bandwidth_(bandwidth) {
    if (train_.rows() < 1 || train_.cols() < 1) {
        throw std::invalid_argument("KdeModel: empty training set");
    }
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
        throw std::invalid_argument("KdeModel: bandwidth must be positive and finite");
    }
    log_norm_ = log_normalizer(n_points(), dim(), bandwidth_);
    g_models_built.fetch_add(1, std::memory_order_relaxed);
}

double KdeModel::log_density(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("KdeModel::log_density: point has dimension " + std::to_string(x.size()) +
                                    ", model has " + std::to_string(dim()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("KdeModel::log_density: non-finite coordinate");
        }
    }
    Eigen::ArrayXd dist;
    squared_distances(train_, x.data(), dist);
    const double a = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    const double dmin = dist.minCoeff();
    const double sum = ((dist - dmin) * (-a)).exp().sum();
    return std::log(sum) - dmin * a + log_norm_;
}

double KdeModel::log_density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const Eigen::RowVectorXd copy = x;
    return log_density(std::span<const double>(copy.data(), static_cast<std::size_t>(copy.size())));
}

double KdeModel::mean_log_density(const Eigen::MatrixXd& eval_points) const {
    if (eval_points.rows() < 1) {
        throw std::invalid_argument("KdeModel::mean_log_density: no evaluation points");
    }
    if (static_cast<std::size_t>(eval_points.cols()) != dim()) {
        throw std::invalid_argument("KdeModel::mean_log_density: dimension mismatch");
    }
    const Eigen::MatrixXd rows = eval_points.transpose();  // one point per column
    double total = 0.0;
    for (Eigen::Index r = 0; r < rows.cols(); ++r) {
        total += log_density(std::span<const double>(rows.col(r).data(), dim()));
    }
    return total / static_cast<double>(eval_points.rows());
}

std::vector<std::size_t> assign_folds(std::size_t n_rows, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) {
        throw std::invalid_argument("select_bandwidth_cv: need at least 2 folds");
    }
    if (n_rows < folds) {
        throw std::invalid_argument("select_bandwidth_cv: " + std::to_string(n_rows) + " rows for " +
                                    std::to_string(folds) + " folds");
    }
    Rng rng(seed);
    const auto perm = permutation(n_rows, rng);
    std::vector<std::size_t> fold_of(n_rows);
    const std::size_t base = n_rows / folds;
    const std::size_t extra = n_rows % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            fold_of[perm[pos++]] = f;
        }
    }
    return fold_of;
}

CvResult select_bandwidth_cv(const Eigen::MatrixXd& train, std::span<const double> grid, std::size_t folds,
                             std::uint64_t seed) {
    if (grid.empty()) {
        throw std::invalid_argument("select_bandwidth_cv: empty bandwidth grid");
    }
    for (double h : grid) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw std::invalid_argument("select_bandwidth_cv: bandwidths must be positive and finite");
        }
    }
    const auto n_rows = static_cast<std::size_t>(train.rows());
    const auto fold_of = assign_folds(n_rows, folds, seed);
    g_cv_runs.fetch_add(1, std::memory_order_relaxed);

    const std::size_t n_grid = grid.size();
    std::vector<double> neg_a(n_grid);
    for (std::size_t j = 0; j < n_grid; ++j) {
        neg_a[j] = -1.0 / (2.0 * grid[j] * grid[j]);
    }
    std::vector<std::size_t> by_width(n_grid);
    std::iota(by_width.begin(), by_width.end(), std::size_t{0});
    std::stable_sort(by_width.begin(), by_width.end(),
                     [&](std::size_t x, std::size_t y) { return grid[x] > grid[y]; });
    std::vector<double> cv(n_grid, 0.0);
    const Eigen::MatrixXd by_row = train.transpose();  // point per column

    Eigen::ArrayXd dist;
    Eigen::ArrayXd shifted;
    std::vector<double> fold_sum(n_grid);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> fit_rows;
        std::vector<Eigen::Index> held_rows;
        for (std::size_t r = 0; r < n_rows; ++r) {
            (fold_of[r] == f ? held_rows : fit_rows).push_back(static_cast<Eigen::Index>(r));
        }
        const Eigen::MatrixXd fit = train(fit_rows, Eigen::all);
        std::fill(fold_sum.begin(), fold_sum.end(), 0.0);
        for (auto r : held_rows) {
            squared_distances(fit, by_row.col(r).data(), dist);
            const double dmin = dist.minCoeff();
            shifted = dist - dmin;
            // Bandwidths from widest to narrowest; terms whose exponent falls below -kDropExponent
            // cannot move the sum (which is at least 1) and are dropped for the rest of the sweep.
            Eigen::Index active = shifted.size();
            for (auto j : by_width) {
                const double limit = kDropExponent / -neg_a[j];
                Eigen::Index kept = 0;
                for (Eigen::Index i = 0; i < active; ++i) {
                    const double v = shifted[i];
                    shifted[kept] = v;
                    kept += v <= limit ? 1 : 0;
                }
                active = kept;
                const double s = sum_exp(shifted.data(), active, neg_a[j]);
                fold_sum[j] += std::log(s) + dmin * neg_a[j];
            }
        }
        for (std::size_t j = 0; j < n_grid; ++j) {
            const double norm = log_normalizer(fit_rows.size(), static_cast<std::size_t>(train.cols()), grid[j]);
            cv[j] += fold_sum[j] / static_cast<double>(held_rows.size()) + norm;
        }
    }
    CvResult out;
    out.grid.assign(grid.begin(), grid.end());
    out.scores.resize(n_grid);
    std::size_t best = 0;
    for (std::size_t j = 0; j < n_grid; ++j) {
        out.scores[j] = cv[j] / static_cast<double>(folds);
        if (j == 0 || out.scores[j] > out.scores[best] ||
            (out.scores[j] == out.scores[best] && grid[j] >= grid[best])) {
            best = j;
        }
    }
    out.bandwidth = grid[best];
    return out;
}

CvResult select_bandwidth_cv(const Dataset& train, const BandwidthGrid& grid, std::size_t folds,
                             std::uint64_t seed) {
    const auto values = make_grid(grid);
    return select_bandwidth_cv(train.values(), values, folds, seed);
}

KdeStats kde_stats() {
    return KdeStats{g_models_built.load(), g_cv_runs.load()};
}

}  // namespace isde
