#pragma once

#include "isde/combinatorics.hpp"
#include "isde/dataset.hpp"
#include "isde/rng.hpp"
#include "isde/scoring.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <string>

namespace testing_support {

inline std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "isde_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline std::filesystem::path write_text(const std::string& name, const std::string& text) {
    const auto p = temp_path(name);
    std::ofstream(p) << text;
    return p;
}

inline isde::Dataset random_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    isde::Rng rng(seed);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.normal();
        }
    }
    return isde::Dataset(std::move(m));
}

// Score table with random entries; `quantize` > 0 rounds scores to multiples
// of 1/quantize so ties actually occur.
inline isde::SubsetScoreTable random_table(std::size_t d, std::size_t k, std::uint64_t seed, int quantize = 0) {
    isde::Rng rng(seed);
    isde::SubsetScoreTable t(d, k, isde::SplitSpec{1, 1, 0}, isde::Estimator::kde);
    isde::for_each_subset_mask(d, k, [&](std::uint64_t mask) {
        double s = 4.0 * rng.uniform() - 2.0;
        if (quantize > 0) {
            s = std::round(s * quantize) / quantize;
        }
        t.insert({isde::FeatureSubset::from_mask(mask), 0.1, s});
    });
    return t;
}

// Every partition of {0..d-1} with blocks of size <= k, built from restricted
// growth strings (independent of the library's enumerator).
inline std::vector<isde::Partition> oracle_partitions(std::size_t d, std::size_t k) {
    std::vector<isde::Partition> out;
    std::vector<int> label(d, 0);
    auto rec = [&](auto&& self, std::size_t i, int blocks) -> void {
        if (i == d) {
            std::vector<std::vector<int>> groups(static_cast<std::size_t>(blocks));
            for (std::size_t f = 0; f < d; ++f) {
                groups[static_cast<std::size_t>(label[f])].push_back(static_cast<int>(f));
            }
            std::vector<isde::FeatureSubset> fs;
            for (auto& g : groups) {
                if (g.size() > k) {
                    return;
                }
                fs.emplace_back(std::move(g));
            }
            out.emplace_back(std::move(fs));
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            label[i] = b;
            self(self, i + 1, b == blocks ? blocks + 1 : blocks);
        }
    };
    rec(rec, 0, 0);
    return out;
}

// log of the SGKDE at x, coded with plain loops and a max shift.
inline double oracle_log_kde(const Eigen::MatrixXd& train, const double* x, double h) {
    const auto p = static_cast<double>(train.cols());
    std::vector<double> e(static_cast<std::size_t>(train.rows()));
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        double d2 = 0.0;
        for (Eigen::Index c = 0; c < train.cols(); ++c) {
            const double diff = train(i, c) - x[c];
            d2 += diff * diff;
        }
        e[static_cast<std::size_t>(i)] = -d2 / (2.0 * h * h);
        top = std::max(top, e[static_cast<std::size_t>(i)]);
    }
    double s = 0.0;
    for (double v : e) {
        s += std::exp(v - top);
    }
    return top + std::log(s) - std::log(static_cast<double>(train.rows())) -
           0.5 * p * std::log(2.0 * std::numbers::pi) - p * std::log(h);
}

// V-fold CV scores by explicit loops over held-out rows; folds are contiguous
// chunks of a seeded permutation, the first N mod V chunks one row longer.
inline std::vector<double> oracle_cv_scores(const Eigen::MatrixXd& train, const std::vector<double>& grid,
                                            std::size_t folds, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(train.rows());
    isde::Rng rng(seed);
    const auto perm = isde::permutation(n, rng);
    std::vector<std::size_t> fold(n);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            fold[perm[pos++]] = f;
        }
    }
    std::vector<double> scores;
    for (double h : grid) {
        double total = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> fit;
            for (std::size_t r = 0; r < n; ++r) {
                if (fold[r] != f) {
                    fit.push_back(static_cast<Eigen::Index>(r));
                }
            }
            const Eigen::MatrixXd fit_m = train(fit, Eigen::all);
            double s = 0.0;
            std::size_t held = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (fold[r] == f) {
                    const Eigen::RowVectorXd row = train.row(static_cast<Eigen::Index>(r));
                    s += oracle_log_kde(fit_m, row.data(), h);
                    ++held;
                }
            }
            total += s / static_cast<double>(held);
        }
        scores.push_back(total / static_cast<double>(folds));
    }
    return scores;
}

// Largest bandwidth among those with the highest CV score.
inline double oracle_best_bandwidth(const std::vector<double>& grid, const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (scores[j] > scores[best] || (scores[j] == scores[best] && grid[j] >= grid[best])) {
            best = j;
        }
    }
    return grid[best];
}

}  // namespace testing_support
