#include "isde/kde.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace isde;
using testing_support::random_dataset;

namespace {

// Direct SGKDE formula without the log-sum-exp transform.
double direct_density(const Eigen::MatrixXd& train, const std::vector<double>& x, double h) {
    const auto p = static_cast<double>(train.cols());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
        double d2 = 0.0;
        for (Eigen::Index c = 0; c < train.cols(); ++c) {
            const double diff = train(i, c) - x[static_cast<std::size_t>(c)];
            d2 += diff * diff;
        }
        sum += std::exp(-d2 / (2.0 * h * h));
    }
    return sum / static_cast<double>(train.rows()) / (std::pow(2.0 * std::numbers::pi, p / 2.0) * std::pow(h, p));
}

}  // namespace

TEST_CASE("make_grid") {
    const auto g = make_grid({0.01, 1.0, 3, GridScale::log});
    REQUIRE(g.size() == 3);
    CHECK(g[0] == 0.01);
    CHECK(g[1] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(g[2] == 1.0);
    const auto grid = make_grid({});
    CHECK(grid.size() == 30);
    CHECK(grid.front() == 0.01);
    CHECK(grid.back() == 1.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(grid[i] / grid[i - 1] == doctest::Approx(std::pow(100.0, 1.0 / 29.0)).epsilon(1e-12));
    }
    const auto flat = make_grid({1.0, 1.0, 5, GridScale::linear});
    CHECK(flat == std::vector<double>(5, 1.0));
    const auto lin = make_grid({0.0 + 1.0, 3.0, 3, GridScale::linear});
    CHECK(lin == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("log_density small cases") {
    Eigen::MatrixXd one(1, 1);
    one(0, 0) = 0.3;
    const KdeModel single(one, 1.0);
    const double x = 0.3;
    CHECK(single.log_density(std::span<const double>(&x, 1)) == doctest::Approx(-0.9189385332046727).epsilon(1e-15));

    Eigen::MatrixXd pm(2, 1);
    pm << -0.7, 0.7;
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = 0.7;
    const double zero = 0.0;
    CHECK(KdeModel(pm, 0.4).log_density(std::span<const double>(&zero, 1)) ==
          doctest::Approx(KdeModel(a, 0.4).log_density(std::span<const double>(&zero, 1))).epsilon(1e-14));
}

TEST_CASE("log_density agrees with the direct formula") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto train = random_dataset(5, 2, seed).values();
        Rng rng(seed + 100);
        const std::vector<double> x{rng.normal(), rng.normal()};
        const double h = 0.3 + rng.uniform();
        const KdeModel model(train, h);
        const double direct = direct_density(train, x, h);
        REQUIRE(direct > 1e-200);
        CHECK(std::abs(model.log_density(std::span<const double>(x)) - std::log(direct)) < 1e-12);
    }
}

TEST_CASE("log_density is finite far from the data and in high dimension") {
    const auto train = random_dataset(10, 13, 2).values();
    const KdeModel model(train, 0.01);
    std::vector<double> far(13, 50.0);
    CHECK(std::isfinite(model.log_density(std::span<const double>(far))));
}

TEST_CASE("mean_log_density equals the mean of pointwise values") {
    const auto train = random_dataset(40, 3, 1).values();
    const auto eval = random_dataset(15, 3, 2).values();
    const KdeModel model(train, 0.5);
    double s = 0.0;
    for (Eigen::Index r = 0; r < eval.rows(); ++r) {
        const Eigen::RowVectorXd row = eval.row(r);
        s += model.log_density(row);
    }
    CHECK(model.mean_log_density(eval) == doctest::Approx(s / 15.0).epsilon(1e-12));
    const Eigen::MatrixXd first = eval.topRows(1);
    const Eigen::RowVectorXd row0 = eval.row(0);
    CHECK(model.mean_log_density(first) == model.log_density(row0));
    const Eigen::MatrixXd reversed = eval.colwise().reverse();
    CHECK(model.mean_log_density(reversed) == doctest::Approx(model.mean_log_density(eval)).epsilon(1e-13));
}

TEST_CASE("translation invariance") {
    const auto train = random_dataset(30, 2, 3).values();
    const Eigen::RowVector2d shift(3.5, -1.25);
    const Eigen::MatrixXd moved = train.rowwise() + shift;
    const Eigen::RowVector2d x(0.2, 0.1);
    const Eigen::RowVector2d xm = x + shift;
    CHECK(std::abs(KdeModel(train, 0.3).log_density(x) - KdeModel(moved, 0.3).log_density(xm)) < 1e-10);
}

TEST_CASE("density integrates to one") {
    const auto train = random_dataset(5, 1, 4).values();
    const KdeModel model(train, 0.2);
    // composite Simpson over [-12, 12]
    const int n = 24000;
    const double lo = -12.0;
    const double hi = 12.0;
    const double step = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * step;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        s += w * std::exp(model.log_density(std::span<const double>(&x, 1)));
    }
    CHECK(std::abs(s * step / 3.0 - 1.0) < 1e-6);
}

TEST_CASE("large-bandwidth limit") {
    Rng rng(5);
    Eigen::MatrixXd train(20, 2);
    for (Eigen::Index r = 0; r < 20; ++r) {
        train(r, 0) = rng.uniform();
        train(r, 1) = rng.uniform();
    }
    const double h = 1e3;
    const Eigen::RowVector2d x(0.5, 0.5);
    const double limit = -std::log(2.0 * std::numbers::pi) - 2.0 * std::log(h);
    CHECK(std::abs(KdeModel(train, h).log_density(x) - limit) < 1e-3);
}

TEST_CASE("KdeModel rejects bad input") {
    const auto train = random_dataset(5, 2, 1).values();
    CHECK_THROWS(KdeModel(train, 0.0));
    CHECK_THROWS(KdeModel(Eigen::MatrixXd(0, 2), 1.0));
    const KdeModel model(train, 1.0);
    const std::vector<double> wrong{1.0};
    CHECK_THROWS((void)model.log_density(std::span<const double>(wrong)));
    const std::vector<double> inf{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS((void)model.log_density(std::span<const double>(inf)));
}

TEST_CASE("cross-validation matches the double-loop oracle") {
    const auto data = random_dataset(500, 1, 17).values();
    const auto grid = make_grid({});
    const auto cv = select_bandwidth_cv(data, grid, 5, 99);
    const auto oracle = testing_support::oracle_cv_scores(data, grid, 5, 99);
    REQUIRE(cv.scores.size() == oracle.size());
    for (std::size_t j = 0; j < oracle.size(); ++j) {
        CHECK(cv.scores[j] == doctest::Approx(oracle[j]).epsilon(1e-10));
    }
    CHECK(cv.bandwidth == testing_support::oracle_best_bandwidth(grid, oracle));
}

TEST_CASE("cross-validation edge cases") {
    const auto data = random_dataset(20, 2, 1).values();
    const std::vector<double> single{0.37};
    CHECK(select_bandwidth_cv(data, single, 5, 0).bandwidth == 0.37);
    const std::vector<double> dup{0.37, 0.37};
    const auto r = select_bandwidth_cv(data, dup, 5, 0);
    CHECK(r.bandwidth == 0.37);
    CHECK(r.scores[0] == r.scores[1]);
    const std::vector<double> empty;
    CHECK_THROWS(select_bandwidth_cv(data, empty, 5, 0));
    CHECK_THROWS(select_bandwidth_cv(data.topRows(3), single, 5, 0));
    const auto a = select_bandwidth_cv(data, make_grid({}), 5, 4);
    const auto b = select_bandwidth_cv(data, make_grid({}), 5, 4);
    CHECK(a.scores == b.scores);
}

TEST_CASE("fold sizes differ by at most one") {
    const auto folds = assign_folds(23, 5, 3);
    std::vector<int> counts(5, 0);
    for (auto f : folds) {
        ++counts[f];
    }
    CHECK(counts == std::vector<int>{5, 5, 5, 4, 4});
}
