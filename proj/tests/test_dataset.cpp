#include "isde/dataset.hpp"
#include "isde/error.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace isde;
using testing_support::random_dataset;
using testing_support::write_text;

TEST_CASE("load_csv reads a header and values") {
    const auto p = write_text("basic.csv", "a,b\n0.1,0.2\n0.3,0.4\n");
    const auto ds = load_csv(p, true);
    CHECK(ds.n_rows() == 2);
    CHECK(ds.n_features() == 2);
    CHECK(ds.feature_names() == std::vector<std::string>{"a", "b"});
    CHECK(ds.values()(1, 0) == 0.3);
    CHECK(ds.values()(0, 1) == 0.2);
}

TEST_CASE("load_csv without header and with CRLF, blank lines, signs") {
    const auto p = write_text("crlf.csv", "1,-2.5e1\r\n\r\n+3,4\r\n");
    const auto ds = load_csv(p, false);
    CHECK(ds.n_rows() == 2);
    CHECK_FALSE(ds.has_feature_names());
    CHECK(ds.values()(0, 1) == -25.0);
    CHECK(ds.values()(1, 0) == 3.0);
}

TEST_CASE("load_csv error paths") {
    SUBCASE("non-numeric cell names row and column") {
        const auto p = write_text("bad.csv", "0.1,x\n");
        try {
            load_csv(p, false);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 1, column 2") != std::string::npos);
        }
    }
    SUBCASE("ragged rows") {
        const auto p = write_text("ragged.csv", "1,2\n3\n");
        CHECK_THROWS_AS(load_csv(p, false), IoError);
    }
    SUBCASE("nan rejected") {
        const auto p = write_text("nan.csv", "1,nan\n");
        CHECK_THROWS_AS(load_csv(p, false), IoError);
    }
    SUBCASE("empty file") {
        const auto p = write_text("empty.csv", "");
        CHECK_THROWS_AS(load_csv(p, false), IoError);
    }
    SUBCASE("header only") {
        const auto p = write_text("hdr.csv", "a,b\n");
        CHECK_THROWS_AS(load_csv(p, true), IoError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv("/definitely/not/here.csv", false), IoError);
    }
    SUBCASE("duplicate header names") {
        const auto p = write_text("dup.csv", "a,a\n1,2\n");
        CHECK_THROWS_AS(load_csv(p, true), IoError);
    }
}

TEST_CASE("write_csv round trips exactly") {
    const auto ds = random_dataset(7, 3, 5);
    const auto p = testing_support::temp_path("roundtrip.csv");
    write_csv(p, ds);
    const auto back = load_csv(p, false);
    CHECK(back.values() == ds.values());
}

TEST_CASE("Dataset invariants") {
    CHECK_THROWS_AS(Dataset(Eigen::MatrixXd(0, 2)), std::invalid_argument);
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Dataset{m}, std::invalid_argument);
    m(0, 0) = 1.0;
    CHECK_THROWS_AS(Dataset(m, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("rescale_unit") {
    Eigen::MatrixXd m(3, 3);
    m << 2, 5, 0, 4, 5, 0.5, 6, 5, 1;
    const auto r = rescale_unit(Dataset(m));
    CHECK(r.values()(0, 0) == 0.0);
    CHECK(r.values()(1, 0) == 0.5);
    CHECK(r.values()(2, 0) == 1.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(r.values()(i, 1) == 0.0);  // constant column
        CHECK(r.values()(i, 2) == m(i, 2));  // already in [0, 1]
    }
    const auto rr = rescale_unit(r);
    CHECK(rr.values() == r.values());

    const auto big = rescale_unit(random_dataset(100, 4, 9));
    CHECK(big.values().minCoeff() == 0.0);
    CHECK(big.values().maxCoeff() == 1.0);
}

TEST_CASE("ColumnScaler fitted on one set maps another with the same map") {
    const auto a = random_dataset(20, 2, 1);
    const auto b = random_dataset(5, 2, 2);
    const auto scaler = ColumnScaler::fit(a);
    CHECK(scaler.apply(a).values() == rescale_unit(a).values());
    const auto mapped = scaler.apply(b);
    for (Eigen::Index c = 0; c < 2; ++c) {
        const double lo = a.values().col(c).minCoeff();
        const double hi = a.values().col(c).maxCoeff();
        for (Eigen::Index r = 0; r < 5; ++r) {
            CHECK(mapped.values()(r, c) == doctest::Approx((b.values()(r, c) - lo) / (hi - lo)).epsilon(1e-14));
        }
    }
}

TEST_CASE("split is disjoint, sized and deterministic") {
    Eigen::MatrixXd m(10, 1);
    for (int i = 0; i < 10; ++i) {
        m(i, 0) = i;
    }
    const Dataset ds(m);
    const auto s1 = split(ds, {5, 5, 42});
    const auto s2 = split(ds, {5, 5, 42});
    CHECK(s1.estimation.values() == s2.estimation.values());
    CHECK(s1.scoring.values() == s2.scoring.values());
    std::set<double> rows;
    for (int i = 0; i < 5; ++i) {
        rows.insert(s1.estimation.values()(i, 0));
        rows.insert(s1.scoring.values()(i, 0));
    }
    CHECK(rows.size() == 10);
    const auto s3 = split(ds, {5, 5, 43});
    CHECK(s3.estimation.values() != s1.estimation.values());

    CHECK_THROWS_AS(split(ds, {6, 5, 0}), std::invalid_argument);
    CHECK_THROWS_AS(split(ds, {0, 5, 0}), std::invalid_argument);

    const auto big = random_dataset(5000, 2, 3);
    const auto s = split(big, {3000, 2000, 1});
    CHECK(s.estimation.n_rows() == 3000);
    CHECK(s.scoring.n_rows() == 2000);
}

TEST_CASE("split follows the exposed permutation") {
    const auto ds = random_dataset(12, 2, 4);
    const auto perm = split_permutation(12, 77);
    const auto s = split(ds, {4, 3, 77});
    for (int i = 0; i < 4; ++i) {
        CHECK(s.estimation.values().row(i) == ds.values().row(static_cast<Eigen::Index>(perm[i])));
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(s.scoring.values().row(i) == ds.values().row(static_cast<Eigen::Index>(perm[4 + i])));
    }
}

TEST_CASE("restrict projects columns and commutes with split") {
    const auto ds = random_dataset(30, 3, 6);
    const auto r = restrict(ds, FeatureSubset({0, 2}));
    CHECK(r.n_features() == 2);
    CHECK(r.values().col(0) == ds.values().col(0));
    CHECK(r.values().col(1) == ds.values().col(2));
    CHECK(restrict(ds, FeatureSubset({0, 1, 2})).values() == ds.values());
    CHECK(restrict(r, FeatureSubset({0, 1})).values() == r.values());
    CHECK_THROWS_AS(restrict(ds, FeatureSubset({3})), std::out_of_range);

    const SplitSpec spec{10, 15, 8};
    CHECK(restrict(split(ds, spec).estimation, FeatureSubset({1})).values() ==
          split(restrict(ds, FeatureSubset({1})), spec).estimation.values());
}

TEST_CASE("FeatureSubset") {
    const FeatureSubset s({0, 2, 5});
    CHECK(s.mask() == 0b100101u);
    CHECK(FeatureSubset::from_mask(0b100101u) == s);
    CHECK(s.key() == "0-2-5");
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(1));
    CHECK_THROWS_AS(FeatureSubset({}), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSubset({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSubset({2, 1}), std::invalid_argument);
}

TEST_CASE("Partition canonical form") {
    const Partition a({FeatureSubset({2, 3}), FeatureSubset({0, 1})});
    const Partition b({FeatureSubset({0, 1}), FeatureSubset({2, 3})});
    CHECK(a == b);
    CHECK(a.blocks().front() == FeatureSubset({0, 1}));
    CHECK(a.to_string() == "{{1,2},{3,4}}");
    CHECK(a.labels() == std::vector<std::size_t>{0, 0, 1, 1});
    CHECK(Partition::from_sizes(std::vector<std::size_t>{2, 2, 1}) ==
          Partition({FeatureSubset({0, 1}), FeatureSubset({2, 3}), FeatureSubset({4})}));
    CHECK(Partition::singletons(3).n_blocks() == 3);
    CHECK(Partition::single_block(3).max_block_size() == 3);
    CHECK_THROWS_AS(Partition({FeatureSubset({0, 1}), FeatureSubset({1, 2})}), std::invalid_argument);
    CHECK_THROWS_AS(Partition({FeatureSubset({0}), FeatureSubset({2})}), std::invalid_argument);
    // lexicographic order of canonical forms: {{0},{1}} < {{0,1}}
    CHECK(Partition::singletons(2) < Partition::single_block(2));
}

TEST_CASE("is_admissible") {
    const auto truth = Partition::from_sizes(std::vector<std::size_t>{2, 2});
    CHECK(is_admissible(truth, truth));
    CHECK(is_admissible(Partition::single_block(4), truth));
    CHECK_FALSE(is_admissible(Partition::singletons(4), truth));
    CHECK_FALSE(is_admissible(Partition({FeatureSubset({0, 2}), FeatureSubset({1, 3})}), truth));
}
