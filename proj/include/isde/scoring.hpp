#pragma once

#include "isde/dataset.hpp"
#include "isde/kde.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace isde {

enum class Estimator { kde, gaussian };

// Bandwidth stored for entries produced by the centered Gaussian estimator.
inline constexpr double kNoBandwidth = 0.0;

struct ScoreEntry {
    FeatureSubset subset;
    double bandwidth = kNoBandwidth;
    double score = 0.0;  // mean held-out log-density over the scoring sample
};

// Held-out scores for feature subsets. Entries are keyed by subset alone, so a
// table built for k can be extended to k' > k without touching what it holds.
class SubsetScoreTable {
public:
    SubsetScoreTable(std::size_t d, std::size_t k, SplitSpec split, Estimator estimator);

    void insert(ScoreEntry entry);
    // Raises the declared maximum block size; existing entries are kept.
    void set_k(std::size_t k);

    [[nodiscard]] const ScoreEntry* find(std::uint64_t mask) const;
    [[nodiscard]] const ScoreEntry& at(const FeatureSubset& subset) const;
    [[nodiscard]] const std::vector<ScoreEntry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::size_t d() const { return d_; }
    [[nodiscard]] std::size_t k() const { return k_; }
    [[nodiscard]] const SplitSpec& split() const { return split_; }
    [[nodiscard]] Estimator estimator() const { return estimator_; }
    // Holds every subset of size <= k.
    [[nodiscard]] bool is_complete() const;

    // provenance, written to JSON when present
    std::optional<BandwidthGrid> grid;
    std::size_t folds = 0;

private:
    std::size_t d_;
    std::size_t k_;
    SplitSpec split_;
    Estimator estimator_;
    std::vector<ScoreEntry> entries_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct ScoringOptions {
    BandwidthGrid grid;
    std::size_t folds = 5;
    std::size_t workers = 1;
};

// Seed of the cross-validation fold assignment used when scoring under `split`.
std::uint64_t cv_seed_for(const SplitSpec& split);

// Bandwidth by CV on the estimation columns of `subset`, then the mean
// log-density of the scoring rows. Never reads `scoring` during selection.
ScoreEntry score_subset(const Dataset& estimation, const Dataset& scoring, const FeatureSubset& subset,
                        const ScoringOptions& options, std::uint64_t cv_seed);
ScoreEntry gaussian_score_subset(const Dataset& estimation, const Dataset& scoring, const FeatureSubset& subset);

SubsetScoreTable score_all_subsets(const Dataset& ds, std::size_t k, const SplitSpec& split,
                                   const ScoringOptions& options);
SubsetScoreTable gaussian_score_all_subsets(const Dataset& ds, std::size_t k, const SplitSpec& split,
                                            std::size_t workers = 1);
// Adds the missing subsets of size <= new_k to a table, reusing existing entries.
void extend_table(SubsetScoreTable& table, const Dataset& ds, std::size_t new_k, const ScoringOptions& options);

// Sum of block scores, accumulated left to right in canonical block order.
double partition_score(const SubsetScoreTable& table, const Partition& partition);
double partition_score(const SubsetScoreTable& table, std::span<const std::uint64_t> block_masks);

nlohmann::json table_to_json(const SubsetScoreTable& table);
SubsetScoreTable table_from_json(const nlohmann::json& j);
void save_table(const std::filesystem::path& path, const SubsetScoreTable& table);
SubsetScoreTable load_table(const std::filesystem::path& path);

}  // namespace isde
