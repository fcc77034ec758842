#pragma once

#include "isde/dataset.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace isde {

using BigInt = boost::multiprecision::cpp_int;

struct CountReport {
    std::size_t d = 0;
    std::size_t k = 0;
    BigInt n_subsets;
    BigInt n_partitions;
};

BigInt binomial(std::size_t n, std::size_t r);

// Number of subsets of {0..d-1} with 1 <= |S| <= k.
BigInt count_subsets(std::size_t d, std::size_t k);
// Number of partitions of {0..d-1} whose blocks all have size <= k.
BigInt count_partitions(std::size_t d, std::size_t k);
// Partitions into blocks of size 1 or 2, summed over the number of pairs.
BigInt count_pair_partitions(std::size_t d);
CountReport count_report(std::size_t d, std::size_t k);

// Subsets ordered by cardinality, then lexicographically.
std::vector<FeatureSubset> enumerate_subsets(std::size_t d, std::size_t k);
void for_each_subset_mask(std::size_t d, std::size_t k, const std::function<void(std::uint64_t)>& visit);

inline constexpr std::uint64_t kDefaultPartitionGuard = 100'000'000;

// Visits every partition in Part_d^k exactly once, as canonical block masks,
// in increasing lexicographic order of the canonical form. Throws
// ComputationError when count_partitions(d, k) exceeds `guard`.
void enumerate_partitions(std::size_t d, std::size_t k,
                          const std::function<void(std::span<const std::uint64_t>)>& visit,
                          std::uint64_t guard = kDefaultPartitionGuard);
std::vector<Partition> all_partitions(std::size_t d, std::size_t k, std::uint64_t guard = 1'000'000);

// Calls `visit(block)` for every block that contains the lowest set bit of
// `remaining`, is a subset of `remaining`, and has at most k elements, in
// lexicographic order of the block's sorted index list.
template <typename Visit>
void for_each_lowest_block(std::uint64_t remaining, std::size_t k, Visit&& visit) {
    const std::uint64_t low = remaining & (~remaining + 1);
    std::uint64_t pool[64];
    int n_pool = 0;
    for (std::uint64_t rest = remaining ^ low; rest != 0; rest &= rest - 1) {
        pool[n_pool++] = rest & (~rest + 1);
    }
    // iterative DFS: stack of (block, next pool position)
    struct Frame {
        std::uint64_t block;
        int next;
        std::size_t size;
    };
    Frame stack[65];
    int top = 0;
    stack[0] = {low, 0, 1};
    visit(low);
    while (top >= 0) {
        Frame& f = stack[top];
        if (f.size >= k || f.next >= n_pool) {
            --top;
            continue;
        }
        const std::uint64_t child = f.block | pool[f.next];
        const int child_next = f.next + 1;
        const std::size_t child_size = f.size + 1;
        ++f.next;
        visit(child);
        stack[++top] = {child, child_next, child_size};
    }
}

}  // namespace isde
