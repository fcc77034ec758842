#pragma once

#include "isde/dataset.hpp"
#include "isde/scoring.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace isde {

enum class SolveStatus { optimal, infeasible };

struct SolveResult {
    Partition partition;
    double objective = 0.0;  // partition_score(table, partition), bit for bit
    SolveStatus status = SolveStatus::optimal;
    std::uint64_t nodes_explored = 0;
    double wall_seconds = 0.0;
};

enum class SolverMethod { automatic, dynamic_programming, branch_and_bound };

struct SolverOptions {
    SolverMethod method = SolverMethod::automatic;
    // automatic picks DP when d <= dp_max_features and the estimated number of
    // transitions (times K for K-best) stays under dp_work_limit
    std::size_t dp_max_features = 22;
    double dp_work_limit = 2e8;
    // DP K-best stores K entries per state; above this many entries B&B is used
    std::size_t dp_kbest_max_entries = std::size_t{1} << 23;
};

// Exact maximizer of partition_score over Part_d^k (the weighted exact-cover
// problem over the table's subsets). Among equal objectives the
// lexicographically smallest canonical partition wins.
SolveResult solve_best(const SubsetScoreTable& table, const SolverOptions& options = {});

// Evaluates every partition of Part_d^k; first in enumeration order wins ties
// (enumeration order is lexicographic, so the tie rule matches solve_best).
SolveResult solve_bruteforce(const SubsetScoreTable& table, std::uint64_t guard = 100'000'000);

// The K distinct partitions with the largest objectives, in non-increasing order.
std::vector<SolveResult> solve_kbest(const SubsetScoreTable& table, std::size_t k_best,
                                     const SolverOptions& options = {});
// The K partitions with the smallest objectives, in non-decreasing order.
std::vector<SolveResult> solve_worst(const SubsetScoreTable& table, std::size_t k_best,
                                     const SolverOptions& options = {});

// Throws std::logic_error unless the blocks are disjoint and cover {0..d-1}.
void assert_exact_cover(const Partition& partition, std::size_t d);

}  // namespace isde
