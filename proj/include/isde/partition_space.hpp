#pragma once

#include "isde/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace isde {

// Minimal number of block splits and merges turning P into Q:
// |P| + |Q| - 2 * (number of blocks of the join of P and Q).
// Intermediate partitions are not constrained in block size.
std::size_t edit_distance(const Partition& p, const Partition& q);

// Uniform random permutation of the features cut into consecutive groups whose
// sizes are drawn uniformly from {1..k}; the last group takes the remainder.
Partition random_partition(std::size_t d, std::size_t k, std::uint64_t seed);

// Every partition of Part_d^k at edit distance 1: merges of two blocks whose
// union has at most k features, then every split of a block into two nonempty
// parts. Merges come first (block pairs in order), then splits block by block.
std::vector<Partition> walk_neighbors(const Partition& p, std::size_t k);

enum class WalkMode {
    uniform_neighbor,  // uniform over walk_neighbors
    type_first,        // choose merge or split with equal odds, then uniform within the type
};

struct WalkTrace {
    std::vector<Partition> steps;  // length + 1 entries, starting partition first
    std::uint64_t seed = 0;
    std::size_t k = 0;
};

WalkTrace random_walk(const Partition& start, std::size_t length, std::size_t k, std::uint64_t seed,
                      WalkMode mode = WalkMode::uniform_neighbor);

struct EditProfileRow {
    Partition candidate;
    std::size_t distance = 0;
};

std::vector<EditProfileRow> edit_profile(const Partition& reference, const std::vector<Partition>& candidates);

}  // namespace isde
