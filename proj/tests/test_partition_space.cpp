#include "isde/combinatorics.hpp"
#include "isde/partition_space.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <map>
#include <queue>
#include <random>
#include <set>

using namespace isde;
using testing_support::oracle_partitions;

namespace {

// All partitions one split or merge away, with no block-size limit, by labels.
std::vector<Partition> oracle_moves(const Partition& p) {
    std::vector<Partition> out;
    const auto& b = p.blocks();
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = i + 1; j < b.size(); ++j) {
            std::vector<FeatureSubset> next;
            std::vector<int> merged = b[i].indices();
            merged.insert(merged.end(), b[j].indices().begin(), b[j].indices().end());
            std::sort(merged.begin(), merged.end());
            next.emplace_back(merged);
            for (std::size_t l = 0; l < b.size(); ++l) {
                if (l != i && l != j) {
                    next.push_back(b[l]);
                }
            }
            out.emplace_back(std::move(next));
        }
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& idx = b[i].indices();
        const std::size_t s = idx.size();
        for (std::uint64_t m = 1; m + 1 < (1ull << s); ++m) {
            std::vector<int> left;
            std::vector<int> right;
            for (std::size_t e = 0; e < s; ++e) {
                ((m >> e) & 1 ? left : right).push_back(idx[e]);
            }
            std::vector<FeatureSubset> next{FeatureSubset(left), FeatureSubset(right)};
            for (std::size_t l = 0; l < b.size(); ++l) {
                if (l != i) {
                    next.push_back(b[l]);
                }
            }
            out.emplace_back(std::move(next));
        }
    }
    return out;
}

std::map<Partition, std::size_t> bfs_from(const Partition& start) {
    std::map<Partition, std::size_t> dist{{start, 0}};
    std::queue<Partition> q;
    q.push(start);
    while (!q.empty()) {
        const auto cur = q.front();
        q.pop();
        for (auto& n : oracle_moves(cur)) {
            if (!dist.contains(n)) {
                dist.emplace(n, dist.at(cur) + 1);
                q.push(std::move(n));
            }
        }
    }
    return dist;
}

Partition parts(std::initializer_list<std::vector<int>> blocks) {
    std::vector<FeatureSubset> fs;
    for (const auto& b : blocks) {
        fs.emplace_back(b);
    }
    return Partition(std::move(fs));
}

}  // namespace

TEST_CASE("edit distance examples") {
    const auto p = parts({{0, 1}, {2, 3}});
    CHECK(edit_distance(p, p) == 0);
    CHECK(edit_distance(parts({{0}, {1}}), parts({{0, 1}})) == 1);
    CHECK(edit_distance(p, parts({{0, 2}, {1, 3}})) == 2);
    CHECK_THROWS(edit_distance(Partition::singletons(3), Partition::singletons(4)));
}

TEST_CASE("edit distance equals BFS shortest paths for d <= 5") {
    for (std::size_t d = 1; d <= 5; ++d) {
        const auto all = oracle_partitions(d, d);
        for (const auto& a : all) {
            const auto dist = bfs_from(a);
            REQUIRE(dist.size() == all.size());
            for (const auto& b : all) {
                REQUIRE(edit_distance(a, b) == dist.at(b));
            }
        }
    }
}

TEST_CASE("walk neighbors") {
    const auto n1 = walk_neighbors(Partition::singletons(3), 2);
    CHECK(n1.size() == 3);
    for (const auto& n : n1) {
        CHECK(n.n_blocks() == 2);
    }
    const auto n2 = walk_neighbors(Partition::single_block(3), 3);
    const std::set<Partition> got(n2.begin(), n2.end());
    const std::set<Partition> expect{parts({{0}, {1, 2}}), parts({{1}, {0, 2}}), parts({{2}, {0, 1}})};
    CHECK(got == expect);

    for (std::size_t d = 1; d <= 5; ++d) {
        for (std::size_t k = 1; k <= d; ++k) {
            const auto all = oracle_partitions(d, k);
            for (const auto& p : all) {
                const auto nb = walk_neighbors(p, k);
                const std::set<Partition> nbs(nb.begin(), nb.end());
                REQUIRE(nbs.size() == nb.size());
                std::set<Partition> oracle;
                for (const auto& q : all) {
                    if (edit_distance(p, q) == 1) {
                        oracle.insert(q);
                    }
                }
                CHECK(nbs == oracle);
                CHECK_FALSE(nbs.contains(p));
            }
        }
    }
}

TEST_CASE("random_partition stays in the family and matches a direct simulation") {
    CHECK(random_partition(5, 1, 3) == Partition::singletons(5));
    bool saw_single = false;
    std::map<std::size_t, double> lib;
    std::map<std::size_t, double> sim;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto p = random_partition(6, 3, static_cast<std::uint64_t>(i));
        REQUIRE(p.max_block_size() <= 3);
        for (const auto& b : p.blocks()) {
            lib[b.size()] += 1.0 / draws;
        }
        saw_single = saw_single || random_partition(3, 3, static_cast<std::uint64_t>(i)).n_blocks() == 1;
    }
    CHECK(saw_single);
    std::mt19937 gen(1);
    std::uniform_int_distribution<int> size(1, 3);
    for (int i = 0; i < draws; ++i) {
        int left = 6;
        while (left > 0) {
            const int s = std::min(size(gen), left);
            sim[static_cast<std::size_t>(s)] += 1.0 / draws;
            left -= s;
        }
    }
    for (std::size_t s = 1; s <= 3; ++s) {
        CHECK(std::abs(lib[s] - sim[s]) < 0.05);
    }
}

TEST_CASE("random walks") {
    const auto start = Partition::from_sizes(std::vector<std::size_t>{2, 2, 1});
    const auto zero = random_walk(start, 0, 3, 1);
    CHECK(zero.steps.size() == 1);
    CHECK(zero.steps.front() == start);
    for (auto mode : {WalkMode::uniform_neighbor, WalkMode::type_first}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto w = random_walk(start, 40, 3, seed, mode);
            REQUIRE(w.steps.size() == 41);
            for (std::size_t i = 1; i < w.steps.size(); ++i) {
                CHECK(edit_distance(w.steps[i - 1], w.steps[i]) == 1);
                CHECK(w.steps[i].max_block_size() <= 3);
            }
            const auto again = random_walk(start, 40, 3, seed, mode);
            CHECK(again.steps == w.steps);
        }
    }
    CHECK_THROWS(random_walk(Partition::singletons(1), 3, 1, 0));
}

TEST_CASE("edit_profile") {
    const auto ref = Partition::from_sizes(std::vector<std::size_t>{3, 2});
    const auto one = edit_profile(ref, {ref});
    REQUIRE(one.size() == 1);
    CHECK(one[0].distance == 0);
    const auto walk = random_walk(ref, 30, 5, 11);
    const auto prof = edit_profile(ref, walk.steps);
    for (std::size_t i = 1; i < prof.size(); ++i) {
        const auto a = static_cast<long>(prof[i - 1].distance);
        const auto b = static_cast<long>(prof[i].distance);
        CHECK(std::abs(a - b) <= 1);
        CHECK(prof[i].candidate == walk.steps[i]);
    }
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = random_partition(13, 5, s);
        const auto q = random_partition(13, 5, s + 1000);
        CHECK(edit_distance(p, q) <= 24);
    }
}
