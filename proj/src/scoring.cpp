#include "isde/scoring.hpp"

#include "isde/combinatorics.hpp"
#include "isde/error.hpp"
#include "isde/gaussian.hpp"
#include "isde/parallel.hpp"
#include "isde/rng.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace isde {

SubsetScoreTable::SubsetScoreTable(std::size_t d, std::size_t k, SplitSpec split, Estimator estimator)
    : d_(d), k_(k), split_(split), estimator_(estimator) {
    if (d < 1 || d > 64) {
        throw std::invalid_argument("SubsetScoreTable: need 1 <= d <= 64");
    }
    if (k < 1 || k > d) {
        throw std::invalid_argument("SubsetScoreTable: need 1 <= k <= d");
    }
}

void SubsetScoreTable::insert(ScoreEntry entry) {
    if (static_cast<std::size_t>(entry.subset.back()) >= d_) {
        throw std::invalid_argument("SubsetScoreTable::insert: subset " + entry.subset.key() + " outside d");
    }
    if (entry.subset.size() > k_) {
        throw std::invalid_argument("SubsetScoreTable::insert: subset " + entry.subset.key() + " larger than k");
    }
    if (!std::isfinite(entry.score)) {
        throw ComputationError("SubsetScoreTable::insert: non-finite score for subset " + entry.subset.key());
    }
    const auto mask = entry.subset.mask();
    if (index_.contains(mask)) {
        throw std::invalid_argument("SubsetScoreTable::insert: duplicate subset " + entry.subset.key());
    }
    index_.emplace(mask, entries_.size());
    entries_.push_back(std::move(entry));
}

void SubsetScoreTable::set_k(std::size_t k) {
    if (k < k_ || k > d_) {
        throw std::invalid_argument("SubsetScoreTable::set_k: k can only grow up to d");
    }
    k_ = k;
}

const ScoreEntry* SubsetScoreTable::find(std::uint64_t mask) const {
    const auto it = index_.find(mask);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const ScoreEntry& SubsetScoreTable::at(const FeatureSubset& subset) const {
    const auto* e = find(subset.mask());
    if (e == nullptr) {
        throw std::out_of_range("score table has no entry for subset " + subset.key());
    }
    return *e;
}

bool SubsetScoreTable::is_complete() const {
    return BigInt(entries_.size()) == count_subsets(d_, k_);
}

std::uint64_t cv_seed_for(const SplitSpec& split) {
    return derive_seed(split.seed, 0xCF);
}

ScoreEntry score_subset(const Dataset& estimation, const Dataset& scoring, const FeatureSubset& subset,
                        const ScoringOptions& options, std::uint64_t cv_seed) {
    const auto w = restrict(estimation, subset);
    const auto cv = select_bandwidth_cv(w, options.grid, options.folds, cv_seed);
    const KdeModel model(w, cv.bandwidth);
    return ScoreEntry{subset, cv.bandwidth, model.mean_log_density(restrict(scoring, subset))};
}

ScoreEntry gaussian_score_subset(const Dataset& estimation, const Dataset& scoring, const FeatureSubset& subset) {
    const auto g = CenteredGaussian::fit(restrict(estimation, subset).values());
    return ScoreEntry{subset, kNoBandwidth, g.mean_log_density(restrict(scoring, subset).values())};
}

namespace {

template <typename ScoreFn>
void fill_table(SubsetScoreTable& table, const std::vector<FeatureSubset>& subsets, std::size_t workers,
                ScoreFn&& score) {
    std::vector<std::optional<ScoreEntry>> results(subsets.size());
    parallel_for(subsets.size(), workers, [&](std::size_t i) {
        try {
            results[i] = score(subsets[i]);
        } catch (const std::exception& e) {
            throw ComputationError("scoring subset {" + subsets[i].key() + "} failed: " + e.what());
        }
    });
    for (auto& r : results) {
        table.insert(std::move(*r));
    }
}

std::vector<FeatureSubset> missing_subsets(const SubsetScoreTable& table, std::size_t k) {
    std::vector<FeatureSubset> out;
    for_each_subset_mask(table.d(), k, [&](std::uint64_t m) {
        if (table.find(m) == nullptr) {
            out.push_back(FeatureSubset::from_mask(m));
        }
    });
    return out;
}

}  // namespace

SubsetScoreTable score_all_subsets(const Dataset& ds, std::size_t k, const SplitSpec& split,
                                   const ScoringOptions& options) {
    SubsetScoreTable table(ds.n_features(), k, split, Estimator::kde);
    table.grid = options.grid;
    table.folds = options.folds;
    extend_table(table, ds, k, options);
    return table;
}

void extend_table(SubsetScoreTable& table, const Dataset& ds, std::size_t new_k, const ScoringOptions& options) {
    if (ds.n_features() != table.d()) {
        throw std::invalid_argument("extend_table: dataset width differs from table d");
    }
    if (table.estimator() != Estimator::kde) {
        throw std::invalid_argument("extend_table: only KDE tables can be extended");
    }
    table.set_k(new_k);
    const auto parts = split(ds, table.split());
    const auto seed = cv_seed_for(table.split());
    fill_table(table, missing_subsets(table, new_k), options.workers, [&](const FeatureSubset& s) {
        return score_subset(parts.estimation, parts.scoring, s, options, seed);
    });
}

SubsetScoreTable gaussian_score_all_subsets(const Dataset& ds, std::size_t k, const SplitSpec& split,
                                            std::size_t workers) {
    SubsetScoreTable table(ds.n_features(), k, split, Estimator::gaussian);
    const auto parts = isde::split(ds, split);
    fill_table(table, missing_subsets(table, k), workers, [&](const FeatureSubset& s) {
        return gaussian_score_subset(parts.estimation, parts.scoring, s);
    });
    return table;
}

double partition_score(const SubsetScoreTable& table, std::span<const std::uint64_t> block_masks) {
    double total = 0.0;
    for (auto m : block_masks) {
        const auto* e = table.find(m);
        if (e == nullptr) {
            throw std::out_of_range("partition_score: block {" + FeatureSubset::from_mask(m).key() +
                                    "} missing from score table");
        }
        total += e->score;
    }
    return total;
}

double partition_score(const SubsetScoreTable& table, const Partition& partition) {
    if (partition.n_features() != table.d()) {
        throw std::invalid_argument("partition_score: partition has " + std::to_string(partition.n_features()) +
                                    " features, table has " + std::to_string(table.d()));
    }
    double total = 0.0;
    for (const auto& block : partition.blocks()) {
        total += table.at(block).score;
    }
    return total;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

constexpr int kSchemaVersion = 1;

const char* estimator_name(Estimator e) {
    return e == Estimator::kde ? "kde" : "gaussian";
}

}  // namespace

nlohmann::json table_to_json(const SubsetScoreTable& table) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["d"] = table.d();
    j["k"] = table.k();
    j["estimator"] = estimator_name(table.estimator());
    j["complete"] = table.is_complete();
    j["split"] = {{"m", table.split().m}, {"n", table.split().n}, {"seed", table.split().seed}};
    if (table.grid) {
        j["grid"] = {{"min", table.grid->min},
                     {"max", table.grid->max},
                     {"count", table.grid->count},
                     {"scale", table.grid->scale == GridScale::log ? "log" : "linear"}};
        j["folds"] = table.folds;
    }
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : table.entries()) {
        entries.push_back({{"subset", e.subset.indices()},
                           {"key", e.subset.key()},
                           {"bandwidth", e.bandwidth},
                           {"score", e.score}});
    }
    return j;
}

SubsetScoreTable table_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw IoError("score table: unsupported schema_version " + j.at("schema_version").dump());
        }
        const auto est = j.at("estimator").get<std::string>();
        if (est != "kde" && est != "gaussian") {
            throw IoError("score table: unknown estimator '" + est + "'");
        }
        const auto& s = j.at("split");
        SplitSpec split{s.at("m").get<std::size_t>(), s.at("n").get<std::size_t>(), s.at("seed").get<std::uint64_t>()};
        SubsetScoreTable table(j.at("d").get<std::size_t>(), j.at("k").get<std::size_t>(), split,
                               est == "kde" ? Estimator::kde : Estimator::gaussian);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            table.grid = BandwidthGrid{g.at("min").get<double>(), g.at("max").get<double>(),
                                       g.at("count").get<std::size_t>(),
                                       g.at("scale").get<std::string>() == "log" ? GridScale::log : GridScale::linear};
            table.folds = j.value("folds", std::size_t{0});
        }
        for (const auto& e : j.at("entries")) {
            table.insert(ScoreEntry{FeatureSubset(e.at("subset").get<std::vector<int>>()),
                                    e.at("bandwidth").get<double>(), e.at("score").get<double>()});
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("score table: malformed JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("score table: ") + e.what());
    }
}

void save_table(const std::filesystem::path& path, const SubsetScoreTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << table_to_json(table).dump(1) << '\n';
}

SubsetScoreTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return table_from_json(j);
}

}  // namespace isde
