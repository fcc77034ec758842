#include "isde/combinatorics.hpp"
#include "isde/error.hpp"

#include <doctest.h>

#include <bit>
#include <set>

using namespace isde;

namespace {

// Bell numbers from the Bell triangle, independent of the library recurrence.
std::vector<BigInt> bell_triangle(std::size_t n) {
    std::vector<BigInt> bell{1};
    std::vector<BigInt> row{1};
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<BigInt> next{row.back()};
        for (const auto& v : row) {
            next.push_back(next.back() + v);
        }
        bell.push_back(next.front());
        row = std::move(next);
    }
    return bell;
}

// Counts partitions with blocks of size <= k by walking restricted growth strings.
std::uint64_t rgs_count(std::size_t d, std::size_t k) {
    std::vector<int> label(d, 0);
    std::uint64_t count = 0;
    auto rec = [&](auto&& self, std::size_t i, int blocks) -> void {
        if (i == d) {
            std::vector<std::size_t> sizes(static_cast<std::size_t>(blocks), 0);
            for (auto l : label) {
                if (++sizes[static_cast<std::size_t>(l)] > k) {
                    return;
                }
            }
            ++count;
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            label[i] = b;
            self(self, i + 1, b == blocks ? blocks + 1 : blocks);
        }
    };
    rec(rec, 0, 0);
    return count;
}

}  // namespace

TEST_CASE("count_subsets") {
    CHECK(count_subsets(20, 3) == 1350);
    CHECK(count_subsets(15, 15) == 32767);
    CHECK(count_subsets(1, 1) == 1);
    CHECK(count_subsets(13, 5) == 2379);
    for (std::size_t d = 1; d <= 30; ++d) {
        CHECK(count_subsets(d, d) == (BigInt(1) << d) - 1);
    }
    for (std::size_t d = 1; d <= 12; ++d) {
        for (std::size_t k = 1; k <= d; ++k) {
            std::uint64_t n = 0;
            for (std::uint64_t m = 1; m < (1ull << d); ++m) {
                n += static_cast<std::size_t>(std::popcount(m)) <= k ? 1 : 0;
            }
            CHECK(count_subsets(d, k) == n);
        }
    }
    CHECK_THROWS_AS(count_subsets(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(count_subsets(3, 0), std::invalid_argument);
}

TEST_CASE("count_partitions matches Bell numbers and a growth-string oracle") {
    const auto bell = bell_triangle(20);
    for (std::size_t d = 1; d <= 20; ++d) {
        CHECK(count_partitions(d, d) == bell[d]);
    }
    CHECK(count_partitions(12, 12) == 4213597);
    CHECK(count_partitions(15, 15) == BigInt("1382958545"));
    CHECK(count_partitions(13, 5) == 25719630);
    CHECK(count_partitions(3, 1) == 1);
    CHECK(count_partitions(32, 3) > BigInt("10000000000000000000"));
    for (std::size_t d = 1; d <= 9; ++d) {
        for (std::size_t k = 1; k <= d; ++k) {
            CHECK(count_partitions(d, k) == rgs_count(d, k));
        }
    }
}

TEST_CASE("count_pair_partitions agrees with the recurrence") {
    CHECK(count_pair_partitions(1) == 1);
    CHECK(count_pair_partitions(4) == 10);
    for (std::size_t d = 2; d <= 16; ++d) {
        CHECK(count_pair_partitions(d) == count_partitions(d, 2));
    }
    // leading digits of the large entries: 2.4e10 at d = 20
    const auto v = count_pair_partitions(20);
    CHECK(v > BigInt("23500000000"));
    CHECK(v < BigInt("24500000000"));
}

TEST_CASE("enumerate_subsets order and length") {
    const auto s = enumerate_subsets(3, 2);
    REQUIRE(s.size() == 6);
    const std::vector<std::vector<int>> expect{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}};
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].indices() == expect[i]);
    }
    CHECK(enumerate_subsets(2, 1).size() == 2);
    CHECK(enumerate_subsets(20, 3).size() == 1350);
}

TEST_CASE("enumerate_partitions visits each partition once in increasing order") {
    for (std::size_t d = 1; d <= 8; ++d) {
        for (std::size_t k = 1; k <= d; ++k) {
            std::vector<Partition> seen;
            enumerate_partitions(d, k, [&](std::span<const std::uint64_t> blocks) {
                seen.push_back(Partition::from_masks(blocks));
            });
            CHECK(seen.size() == count_partitions(d, k));
            for (std::size_t i = 1; i < seen.size(); ++i) {
                REQUIRE(seen[i - 1] < seen[i]);
            }
            for (const auto& p : seen) {
                CHECK(p.max_block_size() <= k);
            }
        }
    }
    CHECK(all_partitions(3, 3).size() == 5);
    CHECK(all_partitions(4, 2).size() == 10);
    CHECK_THROWS_AS(enumerate_partitions(
                        13, 5, [](std::span<const std::uint64_t>) {}, 1000),
                    ComputationError);
}

TEST_CASE("count_report") {
    const auto r = count_report(13, 5);
    CHECK(r.n_subsets == 2379);
    CHECK(r.n_partitions == 25719630);
}
