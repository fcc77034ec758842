#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace isde {

// Rows are observations, columns are features. Feature indices are 0-based
// everywhere in the library; reports print them 1-based.
class Dataset {
public:
    using Matrix = Eigen::MatrixXd;

    explicit Dataset(Matrix values, std::vector<std::string> feature_names = {});

    [[nodiscard]] std::size_t n_rows() const { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t n_features() const { return static_cast<std::size_t>(values_.cols()); }
    [[nodiscard]] const Matrix& values() const { return values_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const { return names_; }
    [[nodiscard]] bool has_feature_names() const { return !names_.empty(); }

private:
    Matrix values_;
    std::vector<std::string> names_;
};

// Nonempty, strictly increasing set of feature indices.
class FeatureSubset {
public:
    explicit FeatureSubset(std::vector<int> indices);
    static FeatureSubset from_mask(std::uint64_t mask);

    [[nodiscard]] const std::vector<int>& indices() const { return indices_; }
    [[nodiscard]] std::size_t size() const { return indices_.size(); }
    [[nodiscard]] int front() const { return indices_.front(); }
    [[nodiscard]] int back() const { return indices_.back(); }
    [[nodiscard]] bool contains(int feature) const;
    // Requires every index < 64.
    [[nodiscard]] std::uint64_t mask() const;
    // "0-2-5"
    [[nodiscard]] std::string key() const;

    friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;
    friend auto operator<=>(const FeatureSubset& a, const FeatureSubset& b) { return a.indices_ <=> b.indices_; }

private:
    std::vector<int> indices_;
};

// Partition of {0, ..., d-1}. Always held in canonical form: each block sorted,
// blocks ordered by their smallest element. Ordering of partitions is the
// lexicographic order of that canonical form.
class Partition {
public:
    explicit Partition(std::vector<FeatureSubset> blocks);
    static Partition from_masks(std::span<const std::uint64_t> masks);
    static Partition singletons(std::size_t d);
    static Partition single_block(std::size_t d);
    // Consecutive blocks of the given sizes: [0..s1-1], [s1..s1+s2-1], ...
    static Partition from_sizes(std::span<const std::size_t> sizes);

    [[nodiscard]] const std::vector<FeatureSubset>& blocks() const { return blocks_; }
    [[nodiscard]] std::size_t n_blocks() const { return blocks_.size(); }
    [[nodiscard]] std::size_t n_features() const { return n_features_; }
    [[nodiscard]] std::size_t max_block_size() const;
    // block index holding each feature
    [[nodiscard]] std::vector<std::size_t> labels() const;
    // "{{1,2},{3}}" with 1-based feature numbers
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::vector<std::vector<int>> to_lists() const;

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition& a, const Partition& b) { return a.blocks_ <=> b.blocks_; }

private:
    std::vector<FeatureSubset> blocks_;
    std::size_t n_features_ = 0;
};

// True when every block of `truth` is contained in some block of `candidate`.
bool is_admissible(const Partition& candidate, const Partition& truth);

struct SplitSpec {
    std::size_t m = 0;  // estimation rows
    std::size_t n = 0;  // scoring rows
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset estimation;  // first m rows of the permutation
    Dataset scoring;     // next n rows
};

Dataset load_csv(const std::filesystem::path& path, bool has_header);
void write_csv(const std::filesystem::path& path, const Dataset& ds);

// Featurewise (x - min) / (max - min); constant columns become 0.
Dataset rescale_unit(const Dataset& ds);

// Per-column affine map fitted on one dataset and applied to others.
struct ColumnScaler {
    std::vector<double> min;
    std::vector<double> max;

    static ColumnScaler fit(const Dataset& ds);
    [[nodiscard]] Dataset apply(const Dataset& ds) const;
};

// Row order of the seeded permutation used by split(); exposed for replay.
std::vector<std::size_t> split_permutation(std::size_t n_rows, std::uint64_t seed);
SplitResult split(const Dataset& ds, const SplitSpec& spec);

Dataset restrict(const Dataset& ds, const FeatureSubset& subset);
Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows);

}  // namespace isde
