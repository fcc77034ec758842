#include "isde/partition_space.hpp"

#include "isde/error.hpp"
#include "isde/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace isde {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<FeatureSubset> without(const std::vector<FeatureSubset>& blocks, std::size_t a, std::size_t b) {
    std::vector<FeatureSubset> out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i != a && i != b) {
            out.push_back(blocks[i]);
        }
    }
    return out;
}

std::vector<Partition> merges(const Partition& p, std::size_t k) {
    std::vector<Partition> out;
    const auto& blocks = p.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            if (blocks[i].size() + blocks[j].size() > k) {
                continue;
            }
            std::vector<int> merged = blocks[i].indices();
            merged.insert(merged.end(), blocks[j].indices().begin(), blocks[j].indices().end());
            std::sort(merged.begin(), merged.end());
            auto rest = without(blocks, i, j);
            rest.emplace_back(std::move(merged));
            out.emplace_back(std::move(rest));
        }
    }
    return out;
}

std::vector<Partition> splits(const Partition& p) {
    std::vector<Partition> out;
    const auto& blocks = p.blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& idx = blocks[b].indices();
        const std::size_t s = idx.size();
        if (s < 2) {
            continue;
        }
        if (s > 31) {
            throw std::invalid_argument("walk_neighbors: block too large to enumerate its splits");
        }
        // `with_first` selects which of idx[1..s-1] stay with idx[0]; all ones is no split
        const std::uint64_t n_choices = (std::uint64_t{1} << (s - 1)) - 1;
        for (std::uint64_t with_first = 0; with_first < n_choices; ++with_first) {
            std::vector<int> a{idx[0]};
            std::vector<int> c;
            for (std::size_t i = 1; i < s; ++i) {
                ((with_first >> (i - 1)) & 1U ? a : c).push_back(idx[i]);
            }
            auto rest = without(blocks, b, b);
            rest.emplace_back(std::move(a));
            rest.emplace_back(std::move(c));
            out.emplace_back(std::move(rest));
        }
    }
    return out;
}

void check_same_ground_set(const Partition& p, const Partition& q, const char* who) {
    if (p.n_features() != q.n_features()) {
        throw std::invalid_argument(std::string(who) + ": partitions over different feature sets (" +
                                    std::to_string(p.n_features()) + " vs " + std::to_string(q.n_features()) + ")");
    }
}

}  // namespace

std::size_t edit_distance(const Partition& p, const Partition& q) {
    check_same_ground_set(p, q, "edit_distance");
    DisjointSets sets(p.n_features());
    std::size_t components = p.n_features();
    for (const auto* part : {&p, &q}) {
        for (const auto& block : part->blocks()) {
            for (std::size_t i = 1; i < block.size(); ++i) {
                if (sets.unite(static_cast<std::size_t>(block.indices()[0]),
                               static_cast<std::size_t>(block.indices()[i]))) {
                    --components;
                }
            }
        }
    }
    return p.n_blocks() + q.n_blocks() - 2 * components;
}

Partition random_partition(std::size_t d, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > d) {
        throw std::invalid_argument("random_partition: need 1 <= k <= d");
    }
    Rng rng(seed);
    const auto perm = permutation(d, rng);
    std::vector<FeatureSubset> blocks;
    std::size_t pos = 0;
    while (pos < d) {
        const std::size_t size = std::min<std::size_t>(1 + rng.below(k), d - pos);
        std::vector<int> idx;
        for (std::size_t i = 0; i < size; ++i) {
            idx.push_back(static_cast<int>(perm[pos + i]));
        }
        std::sort(idx.begin(), idx.end());
        blocks.emplace_back(std::move(idx));
        pos += size;
    }
    return Partition(std::move(blocks));
}

std::vector<Partition> walk_neighbors(const Partition& p, std::size_t k) {
    auto out = merges(p, k);
    auto s = splits(p);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return out;
}

WalkTrace random_walk(const Partition& start, std::size_t length, std::size_t k, std::uint64_t seed,
                      WalkMode mode) {
    if (k < 1 || start.max_block_size() > k) {
        throw std::invalid_argument("random_walk: starting partition has a block larger than k");
    }
    Rng rng(seed);
    WalkTrace trace{{start}, seed, k};
    trace.steps.reserve(length + 1);
    for (std::size_t step = 0; step < length; ++step) {
        const auto& current = trace.steps.back();
        auto merge_moves = merges(current, k);
        auto split_moves = splits(current);
        if (merge_moves.empty() && split_moves.empty()) {
            throw ComputationError("random_walk: partition " + current.to_string() + " has no neighbors");
        }
        std::vector<Partition>* pool = nullptr;
        if (mode == WalkMode::uniform_neighbor) {
            merge_moves.insert(merge_moves.end(), std::make_move_iterator(split_moves.begin()),
                               std::make_move_iterator(split_moves.end()));
            pool = &merge_moves;
        } else if (merge_moves.empty()) {
            pool = &split_moves;
        } else if (split_moves.empty()) {
            pool = &merge_moves;
        } else {
            pool = rng.below(2) == 0 ? &merge_moves : &split_moves;
        }
        auto next = (*pool)[rng.below(pool->size())];
        trace.steps.push_back(std::move(next));
    }
    return trace;
}

std::vector<EditProfileRow> edit_profile(const Partition& reference, const std::vector<Partition>& candidates) {
    std::vector<EditProfileRow> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        check_same_ground_set(reference, c, "edit_profile");
        out.push_back({c, edit_distance(reference, c)});
    }
    return out;
}

}  // namespace isde
