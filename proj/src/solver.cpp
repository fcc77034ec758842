#include "isde/solver.hpp"

#include "isde/combinatorics.hpp"
#include "isde/error.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace isde {

namespace {

using Clock = std::chrono::steady_clock;

// Lexicographic order of the sorted index lists of two blocks.
bool block_less(std::uint64_t a, std::uint64_t b) {
    while (a != 0 && b != 0) {
        const int x = std::countr_zero(a);
        const int y = std::countr_zero(b);
        if (x != y) {
            return x < y;
        }
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;
}

bool sequence_less(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), block_less);
}

struct Candidate {
    std::uint64_t mask;
    double score;
};

// Table scores (optionally negated) in the layouts the solvers need.
class CoverScores {
public:
    CoverScores(const SubsetScoreTable& table, double sign, bool dense)
        : d_(table.d()), k_(table.k()), by_low_(table.d()), amort_(table.d(), -std::numeric_limits<double>::infinity()) {
        if (dense) {
            dense_.assign(std::size_t{1} << d_, std::numeric_limits<double>::quiet_NaN());
        }
        for (const auto& e : table.entries()) {
            const auto m = e.subset.mask();
            const double s = sign * e.score;
            if (dense) {
                dense_[m] = s;
                continue;  // the dense lookup is all the DP and enumeration need
            }
            by_low_[static_cast<std::size_t>(e.subset.front())].push_back({m, s});
            const double share = s / static_cast<double>(e.subset.size());
            for (int i : e.subset.indices()) {
                amort_[static_cast<std::size_t>(i)] = std::max(amort_[static_cast<std::size_t>(i)], share);
            }
        }
        for (auto& list : by_low_) {
            std::sort(list.begin(), list.end(), [](const Candidate& a, const Candidate& b) {
                if (a.score != b.score) {
                    return a.score > b.score;
                }
                return block_less(a.mask, b.mask);
            });
        }
    }

    [[nodiscard]] std::size_t d() const { return d_; }
    [[nodiscard]] std::size_t k() const { return k_; }
    [[nodiscard]] std::uint64_t full() const { return d_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d_) - 1; }
    [[nodiscard]] double dense(std::uint64_t mask) const { return dense_[mask]; }
    [[nodiscard]] const std::vector<Candidate>& candidates(int low) const {
        return by_low_[static_cast<std::size_t>(low)];
    }
    [[nodiscard]] double amortized_bound(std::uint64_t remaining) const {
        double b = 0.0;
        for (; remaining != 0; remaining &= remaining - 1) {
            b += amort_[static_cast<std::size_t>(std::countr_zero(remaining))];
        }
        return b;
    }

private:
    std::size_t d_;
    std::size_t k_;
    std::vector<double> dense_;
    std::vector<std::vector<Candidate>> by_low_;
    std::vector<double> amort_;  // max over S containing j of score(S) / |S|
};

// Same blocks as for_each_lowest_block, in no particular order. When the size
// cap cannot bind, plain submask enumeration avoids the DFS bookkeeping.
template <typename Visit>
void for_each_block_unordered(std::uint64_t remaining, std::size_t k, Visit&& visit) {
    const std::uint64_t low = remaining & (~remaining + 1);
    const std::uint64_t rest = remaining ^ low;
    if (static_cast<std::size_t>(std::popcount(rest)) >= k) {
        for_each_lowest_block(remaining, k, visit);
        return;
    }
    std::uint64_t sub = rest;
    while (true) {
        visit(low | sub);
        if (sub == 0) {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

struct RawSolution {
    double value;
    std::vector<std::uint64_t> blocks;  // canonical order
};

bool better(const RawSolution& a, const RawSolution& b) {
    if (a.value != b.value) {
        return a.value > b.value;
    }
    return sequence_less(a.blocks, b.blocks);
}

// ---------------------------------------------------------------------------
// Forward dynamic programming over covered-feature masks. A state is the set
// of features covered by a prefix of canonical blocks; the next block always
// contains the lowest uncovered feature. Each state keeps its K best prefix
// sums, accumulated left to right exactly as partition_score does, so the
// final values are bit-identical to the recomputed objectives.
class KBestDp {
public:
    KBestDp(const CoverScores& scores, std::size_t k_best)
        : sc_(scores), k_best_(k_best), n_states_(std::size_t{1} << scores.d()),
          entries_(n_states_ * k_best), count_(n_states_, 0) {}

    std::vector<RawSolution> run(std::uint64_t& transitions) {
        entries_[0] = {0.0, 0, 0};
        count_[0] = 1;
        const std::uint64_t full = sc_.full();
        for (std::uint64_t covered = 0; covered < full; ++covered) {
            const std::size_t n = count_[covered];
            if (n == 0) {
                continue;
            }
            if (k_best_ == 1) {
                relax_best(covered, transitions);
                continue;
            }
            const Entry* from = &entries_[covered * k_best_];
            for_each_block_unordered(full & ~covered, sc_.k(), [&](std::uint64_t block) {
                const double s = sc_.dense(block);
                const std::uint64_t target = covered | block;
                for (std::size_t r = 0; r < n; ++r) {
                    ++transitions;
                    if (!offer(target, Entry{from[r].value + s, static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(r)})) {
                        break;
                    }
                }
            });
        }
        std::vector<RawSolution> out;
        for (std::size_t r = 0; r < count_[full]; ++r) {
            out.push_back({entries_[full * k_best_ + r].value, prefix(full, r)});
        }
        return out;
    }

private:
    struct Entry {
        double value;
        std::uint32_t block;
        std::uint32_t pred_rank;
    };

    std::vector<std::uint64_t> prefix(std::uint64_t state, std::size_t rank) const {
        std::vector<std::uint64_t> blocks;
        while (state != 0) {
            const Entry& e = entries_[state * k_best_ + rank];
            blocks.push_back(e.block);
            state ^= e.block;
            rank = e.pred_rank;
        }
        std::reverse(blocks.begin(), blocks.end());
        return blocks;
    }

    // Strict total order on prefixes of one state: value descending, then
    // canonical block sequence ascending.
    bool precedes(std::uint64_t state, const Entry& a, const Entry& b) const {
        if (a.value != b.value) {
            return a.value > b.value;
        }
        return tie_precedes(state, a, b);
    }

    [[gnu::noinline]] bool tie_precedes(std::uint64_t state, const Entry& a, const Entry& b) const {
        auto pa = prefix(state ^ a.block, a.pred_rank);
        pa.push_back(a.block);
        auto pb = prefix(state ^ b.block, b.pred_rank);
        pb.push_back(b.block);
        return sequence_less(pa, pb);
    }

    // K = 1 needs no list handling; ties still go through the canonical order.
    void relax_best(std::uint64_t covered, std::uint64_t& transitions) {
        const double base = entries_[covered].value;
        for_each_block_unordered(sc_.full() & ~covered, sc_.k(), [&](std::uint64_t block) {
            ++transitions;
            const std::uint64_t target = covered | block;
            const Entry cand{base + sc_.dense(block), static_cast<std::uint32_t>(block), 0};
            Entry& cur = entries_[target];
            if (count_[target] == 0 || cand.value > cur.value) {
                cur = cand;
                count_[target] = 1;
            } else if (cand.value == cur.value && tie_precedes(target, cand, cur)) {
                cur = cand;
            }
        });
    }

    // Inserts into the bounded sorted list; false when the candidate did not make it.
    bool offer(std::uint64_t state, const Entry& cand) {
        Entry* list = &entries_[state * k_best_];
        std::size_t n = count_[state];
        if (n == k_best_ && !precedes(state, cand, list[n - 1])) {
            return false;
        }
        if (k_best_ == 1) {
            list[0] = cand;
            count_[state] = 1;
            return true;
        }
        std::size_t pos = n == k_best_ ? n - 1 : n;
        while (pos > 0 && precedes(state, cand, list[pos - 1])) {
            list[pos] = list[pos - 1];
            --pos;
        }
        list[pos] = cand;
        if (n < k_best_) {
            ++count_[state];
        }
        return true;
    }

    const CoverScores& sc_;
    std::size_t k_best_;
    std::size_t n_states_;
    std::vector<Entry> entries_;
    std::vector<std::uint32_t> count_;
};

// ---------------------------------------------------------------------------
// Depth-first branch and bound, branching on the block that holds the lowest
// uncovered feature. Upper bound for the uncovered set U is
// sum_{j in U} max_{S containing j} score(S)/|S|.
class KBestBranchAndBound {
public:
    KBestBranchAndBound(const CoverScores& scores, std::size_t k_best) : sc_(scores), k_best_(k_best) {
        slack_ = 1e-9 * (1.0 + std::abs(sc_.amortized_bound(sc_.full())));
        for (std::uint64_t rest = sc_.full(); rest != 0; rest &= rest - 1) {
            slack_ += 1e-9 * std::abs(sc_.amortized_bound(rest & (~rest + 1)));
        }
    }

    std::vector<RawSolution> run(std::uint64_t& nodes) {
        blocks_.clear();
        dfs(sc_.full(), 0.0);
        nodes = nodes_;
        return std::move(best_);
    }

private:
    void dfs(std::uint64_t remaining, double value) {
        ++nodes_;
        if (remaining == 0) {
            offer(value);
            return;
        }
        const int low = std::countr_zero(remaining);
        for (const auto& c : sc_.candidates(low)) {
            if ((c.mask & ~remaining) != 0) {
                continue;
            }
            const double child = value + c.score;
            const std::uint64_t rest = remaining & ~c.mask;
            if (best_.size() == k_best_ && child + sc_.amortized_bound(rest) + slack_ < best_.back().value) {
                continue;
            }
            blocks_.push_back(c.mask);
            dfs(rest, child);
            blocks_.pop_back();
        }
    }

    void offer(double value) {
        RawSolution cand{value, blocks_};
        if (best_.size() == k_best_ && !better(cand, best_.back())) {
            return;
        }
        const auto pos = std::upper_bound(best_.begin(), best_.end(), cand,
                                          [](const RawSolution& a, const RawSolution& b) { return better(a, b); });
        best_.insert(pos, std::move(cand));
        if (best_.size() > k_best_) {
            best_.pop_back();
        }
    }

    const CoverScores& sc_;
    std::size_t k_best_;
    double slack_ = 0.0;
    std::vector<std::uint64_t> blocks_;
    std::vector<RawSolution> best_;
    std::uint64_t nodes_ = 0;
};

void require_complete(const SubsetScoreTable& table, const char* who) {
    if (!table.is_complete()) {
        throw std::invalid_argument(std::string(who) + ": score table is incomplete (" +
                                    std::to_string(table.size()) + " of " +
                                    count_subsets(table.d(), table.k()).str() + " subsets)");
    }
}

double dp_work_estimate(std::size_t d, std::size_t k) {
    // sum over uncovered-set sizes r of C(d, r) * #blocks containing a fixed element
    double total = 0.0;
    for (std::size_t r = 1; r <= d; ++r) {
        double blocks = 0.0;
        for (std::size_t i = 0; i < std::min(k, r); ++i) {
            blocks += binomial(r - 1, i).convert_to<double>();
        }
        total += binomial(d, r).convert_to<double>() * blocks;
    }
    return total;
}

bool use_dp(const SubsetScoreTable& table, std::size_t k_best, const SolverOptions& options) {
    switch (options.method) {
        case SolverMethod::dynamic_programming:
            if (table.d() > 30) {
                throw std::invalid_argument("solver: dynamic programming needs d <= 30");
            }
            return true;
        case SolverMethod::branch_and_bound:
            return false;
        case SolverMethod::automatic:
            break;
    }
    if (table.d() > options.dp_max_features) {
        return false;
    }
    if ((std::size_t{1} << table.d()) * k_best > options.dp_kbest_max_entries) {
        return false;
    }
    return dp_work_estimate(table.d(), table.k()) * static_cast<double>(k_best) <= options.dp_work_limit;
}

std::vector<SolveResult> solve_ranked(const SubsetScoreTable& table, std::size_t k_best, double sign,
                                      const SolverOptions& options, const char* who) {
    require_complete(table, who);
    if (k_best < 1) {
        throw std::invalid_argument(std::string(who) + ": K must be >= 1");
    }
    if (BigInt(k_best) > count_partitions(table.d(), table.k())) {
        throw std::invalid_argument(std::string(who) + ": K = " + std::to_string(k_best) + " exceeds |Part_d^k| = " +
                                    count_partitions(table.d(), table.k()).str());
    }
    const auto start = Clock::now();
    const bool dp = use_dp(table, k_best, options);
    const CoverScores scores(table, sign, dp);
    std::uint64_t nodes = 0;
    auto raw = dp ? KBestDp(scores, k_best).run(nodes) : KBestBranchAndBound(scores, k_best).run(nodes);
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();

    std::vector<SolveResult> out;
    out.reserve(raw.size());
    for (const auto& r : raw) {
        auto partition = Partition::from_masks(r.blocks);
        assert_exact_cover(partition, table.d());
        const double objective = partition_score(table, partition);
        out.push_back(SolveResult{std::move(partition), objective, SolveStatus::optimal, nodes, elapsed});
    }
    if (out.size() != k_best) {
        throw ComputationError(std::string(who) + ": solver returned " + std::to_string(out.size()) + " of " +
                               std::to_string(k_best) + " partitions");
    }
    return out;
}

}  // namespace

void assert_exact_cover(const Partition& partition, std::size_t d) {
    if (partition.n_features() != d) {
        throw std::logic_error("exact cover violated: partition covers " + std::to_string(partition.n_features()) +
                               " features, expected " + std::to_string(d));
    }
    std::vector<int> hits(d, 0);
    for (const auto& b : partition.blocks()) {
        for (int i : b.indices()) {
            if (static_cast<std::size_t>(i) >= d || ++hits[static_cast<std::size_t>(i)] > 1) {
                throw std::logic_error("exact cover violated at feature " + std::to_string(i));
            }
        }
    }
    if (std::find(hits.begin(), hits.end(), 0) != hits.end()) {
        throw std::logic_error("exact cover violated: uncovered feature");
    }
}

SolveResult solve_best(const SubsetScoreTable& table, const SolverOptions& options) {
    return std::move(solve_ranked(table, 1, 1.0, options, "solve_best").front());
}

std::vector<SolveResult> solve_kbest(const SubsetScoreTable& table, std::size_t k_best,
                                     const SolverOptions& options) {
    return solve_ranked(table, k_best, 1.0, options, "solve_kbest");
}

std::vector<SolveResult> solve_worst(const SubsetScoreTable& table, std::size_t k_best,
                                     const SolverOptions& options) {
    return solve_ranked(table, k_best, -1.0, options, "solve_worst");
}

SolveResult solve_bruteforce(const SubsetScoreTable& table, std::uint64_t guard) {
    require_complete(table, "solve_bruteforce");
    const auto start = Clock::now();
    const bool dense = table.d() <= 24;
    const CoverScores scores(table, 1.0, dense);
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<std::uint64_t> best_blocks;
    std::uint64_t evaluated = 0;
    enumerate_partitions(
        table.d(), table.k(),
        [&](std::span<const std::uint64_t> blocks) {
            ++evaluated;
            double value = 0.0;
            if (dense) {
                for (auto m : blocks) {
                    value += scores.dense(m);
                }
            } else {
                value = partition_score(table, blocks);
            }
            if (value > best_value) {
                best_value = value;
                best_blocks.assign(blocks.begin(), blocks.end());
            }
        },
        guard);
    auto partition = Partition::from_masks(best_blocks);
    assert_exact_cover(partition, table.d());
    const double objective = partition_score(table, partition);
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return SolveResult{std::move(partition), objective, SolveStatus::optimal, evaluated, elapsed};
}

}  // namespace isde
