#include "isde/error.hpp"
#include "isde/manifest.hpp"
#include "isde/solver.hpp"
#include "isde/synth.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace isde;

namespace {

struct Fixture {
    Dataset train = gen_structure({{2, 1}, 3, 300}).data;
    Dataset valid = gen_structure({{2, 1}, 4, 100}).data;
    ScoringOptions opts = [] {
        ScoringOptions o;
        o.grid = {0.02, 1.0, 8, GridScale::log};
        return o;
    }();
    SplitSpec spec{150, 150, 12};
};

double replay(const ModelManifest& m, const Dataset& train, const Dataset& valid) {
    const auto path = testing_support::temp_path("manifest.json");
    save_manifest(path, m);
    const auto back = load_manifest(path);
    return validation_score(rebuild_log_density(back, train), valid);
}

}  // namespace

TEST_CASE("method names round trip") {
    for (auto m : {Method::isde, Method::isde_gauss, Method::fde, Method::cvkde}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("gmm"), std::invalid_argument);
}

TEST_CASE("isde manifest replays exactly") {
    Fixture f;
    const auto table = score_all_subsets(f.train, 3, f.spec, f.opts);
    const auto best = solve_best(table);
    const auto fit = fit_partition_model(table, split(f.train, f.spec).estimation, best.partition);
    const double direct =
        validation_score([&](std::span<const double> x) { return fitted_model_log_density(fit, x); }, f.valid);
    const auto m = manifest_for_partition(table, best.partition);
    CHECK(m.partition == best.partition);
    CHECK(m.blocks.size() == best.partition.n_blocks());
    CHECK(replay(m, f.train, f.valid) == direct);
}

TEST_CASE("isde-gauss manifest replays exactly") {
    Fixture f;
    const auto table = gaussian_score_all_subsets(f.train, 3, f.spec);
    const auto best = solve_best(table);
    const auto fit = fit_partition_model(table, split(f.train, f.spec).estimation, best.partition);
    const double direct =
        validation_score([&](std::span<const double> x) { return fitted_model_log_density(fit, x); }, f.valid);
    CHECK(replay(manifest_for_partition(table, best.partition, Method::isde_gauss), f.train, f.valid) == direct);
}

TEST_CASE("fde manifest replays exactly") {
    Fixture f;
    const auto table = score_all_subsets(f.train, 2, f.spec, f.opts);
    const auto forest = fit_fde(table, split(f.train, f.spec).estimation);
    const double direct =
        validation_score([&](std::span<const double> x) { return forest_log_density(forest, x); }, f.valid);
    CHECK(replay(manifest_for_forest(table, forest), f.train, f.valid) == direct);
}

TEST_CASE("cvkde manifest replays exactly") {
    Fixture f;
    const auto model = fit_cvkde(f.train, f.opts.grid, 5, 1);
    const double direct = validation_score([&](std::span<const double> x) { return model.log_density(x); }, f.valid);
    CHECK(replay(manifest_for_cvkde(3, model.bandwidth()), f.train, f.valid) == direct);
}

TEST_CASE("manifest JSON carries the rescaling and rejects bad input") {
    Fixture f;
    auto m = manifest_for_cvkde(3, 0.1);
    m.scaler = ColumnScaler::fit(f.train);
    const auto j = manifest_to_json(m);
    CHECK(j.at("schema_version") == 1);
    const auto back = manifest_from_json(j);
    REQUIRE(back.scaler.has_value());
    CHECK(back.scaler->min == m.scaler->min);
    CHECK(back.scaler->max == m.scaler->max);

    auto wrong = j;
    wrong["schema_version"] = 99;
    CHECK_THROWS_AS(manifest_from_json(wrong), IoError);
    auto broken = j;
    broken.erase("method");
    CHECK_THROWS_AS(manifest_from_json(broken), IoError);
    CHECK_THROWS_AS(load_manifest("/no/such/manifest.json"), IoError);

    // width mismatch between manifest and data
    CHECK_THROWS_AS(rebuild_log_density(m, testing_support::random_dataset(10, 2, 1)), std::invalid_argument);
}
