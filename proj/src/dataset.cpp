#include "isde/dataset.hpp"

#include "isde/error.hpp"
#include "isde/rng.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace isde {

Dataset::Dataset(Matrix values, std::vector<std::string> feature_names)
    : values_(std::move(values)), names_(std::move(feature_names)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw std::invalid_argument("Dataset: need at least one row and one column");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("Dataset: all entries must be finite");
    }
    if (!names_.empty()) {
        if (names_.size() != n_features()) {
            throw std::invalid_argument("Dataset: feature_names length differs from column count");
        }
        std::set<std::string> seen(names_.begin(), names_.end());
        if (seen.size() != names_.size()) {
            throw std::invalid_argument("Dataset: duplicate feature names");
        }
    }
}

// ---------------------------------------------------------------------------
// FeatureSubset / Partition

FeatureSubset::FeatureSubset(std::vector<int> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) {
        throw std::invalid_argument("FeatureSubset: empty");
    }
    if (indices_.front() < 0) {
        throw std::invalid_argument("FeatureSubset: negative index");
    }
    for (std::size_t i = 1; i < indices_.size(); ++i) {
        if (indices_[i] <= indices_[i - 1]) {
            throw std::invalid_argument("FeatureSubset: indices must be strictly increasing");
        }
    }
}

FeatureSubset FeatureSubset::from_mask(std::uint64_t mask) {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(std::popcount(mask)));
    while (mask != 0) {
        idx.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return FeatureSubset(std::move(idx));
}

bool FeatureSubset::contains(int feature) const {
    return std::binary_search(indices_.begin(), indices_.end(), feature);
}

std::uint64_t FeatureSubset::mask() const {
    if (indices_.back() >= 64) {
        throw std::invalid_argument("FeatureSubset::mask: index beyond 63");
    }
    std::uint64_t m = 0;
    for (int i : indices_) {
        m |= std::uint64_t{1} << i;
    }
    return m;
}

std::string FeatureSubset::key() const {
    std::string out;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (i > 0) {
            out += '-';
        }
        out += std::to_string(indices_[i]);
    }
    return out;
}

Partition::Partition(std::vector<FeatureSubset> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) {
        throw std::invalid_argument("Partition: no blocks");
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](const FeatureSubset& a, const FeatureSubset& b) { return a.front() < b.front(); });
    std::size_t total = 0;
    int max_index = 0;
    for (const auto& b : blocks_) {
        total += b.size();
        max_index = std::max(max_index, b.back());
    }
    std::vector<char> seen(static_cast<std::size_t>(max_index) + 1, 0);
    for (const auto& b : blocks_) {
        for (int i : b.indices()) {
            if (seen[static_cast<std::size_t>(i)] != 0) {
                throw std::invalid_argument("Partition: blocks overlap on feature " + std::to_string(i));
            }
            seen[static_cast<std::size_t>(i)] = 1;
        }
    }
    if (total != static_cast<std::size_t>(max_index) + 1) {
        throw std::invalid_argument("Partition: blocks do not cover {0, ..., d-1}");
    }
    n_features_ = total;
}

Partition Partition::from_masks(std::span<const std::uint64_t> masks) {
    std::vector<FeatureSubset> blocks;
    blocks.reserve(masks.size());
    for (auto m : masks) {
        blocks.push_back(FeatureSubset::from_mask(m));
    }
    return Partition(std::move(blocks));
}

Partition Partition::singletons(std::size_t d) {
    std::vector<FeatureSubset> blocks;
    for (std::size_t i = 0; i < d; ++i) {
        blocks.emplace_back(std::vector<int>{static_cast<int>(i)});
    }
    return Partition(std::move(blocks));
}

Partition Partition::single_block(std::size_t d) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    return Partition({FeatureSubset(std::move(idx))});
}

Partition Partition::from_sizes(std::span<const std::size_t> sizes) {
    std::vector<FeatureSubset> blocks;
    int next = 0;
    for (auto s : sizes) {
        if (s == 0) {
            throw std::invalid_argument("Partition::from_sizes: zero block size");
        }
        std::vector<int> idx(s);
        std::iota(idx.begin(), idx.end(), next);
        next += static_cast<int>(s);
        blocks.emplace_back(std::move(idx));
    }
    return Partition(std::move(blocks));
}

std::size_t Partition::max_block_size() const {
    std::size_t m = 0;
    for (const auto& b : blocks_) {
        m = std::max(m, b.size());
    }
    return m;
}

std::vector<std::size_t> Partition::labels() const {
    std::vector<std::size_t> out(n_features_);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        for (int i : blocks_[b].indices()) {
            out[static_cast<std::size_t>(i)] = b;
        }
    }
    return out;
}

std::string Partition::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (b > 0) {
            os << ',';
        }
        os << '{';
        const auto& idx = blocks_[b].indices();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i > 0) {
                os << ',';
            }
            os << idx[i] + 1;
        }
        os << '}';
    }
    os << '}';
    return os.str();
}

std::vector<std::vector<int>> Partition::to_lists() const {
    std::vector<std::vector<int>> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        out.push_back(b.indices());
    }
    return out;
}

bool is_admissible(const Partition& candidate, const Partition& truth) {
    if (candidate.n_features() != truth.n_features()) {
        throw std::invalid_argument("is_admissible: partitions over different feature sets");
    }
    const auto labels = candidate.labels();
    for (const auto& block : truth.blocks()) {
        const auto target = labels[static_cast<std::size_t>(block.front())];
        for (int i : block.indices()) {
            if (labels[static_cast<std::size_t>(i)] != target) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::vector<std::string> names;
    std::vector<double> cells;
    std::size_t width = 0;
    std::size_t data_row = 0;
    std::string line;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        const auto trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto fields = split_fields(trimmed);
        if (header_pending) {
            for (auto f : fields) {
                names.emplace_back(trim(f));
            }
            width = names.size();
            header_pending = false;
            continue;
        }
        ++data_row;
        if (width == 0) {
            width = fields.size();
        } else if (fields.size() != width) {
            throw IoError(path.string() + ": row " + std::to_string(data_row) + " has " +
                          std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto f = trim(fields[c]);
            double v = 0.0;
            const auto* first = f.data();
            const auto* last = f.data() + f.size();
            if (!f.empty() && *first == '+') {
                ++first;
            }
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (f.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw IoError(path.string() + ": non-numeric or non-finite value '" + std::string(f) +
                              "' at row " + std::to_string(data_row) + ", column " + std::to_string(c + 1));
            }
            cells.push_back(v);
        }
    }
    if (data_row == 0) {
        throw IoError(path.string() + ": no data rows");
    }
    Dataset::Matrix values(static_cast<Eigen::Index>(data_row), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < data_row; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * width + c];
        }
    }
    try {
        return Dataset(std::move(values), std::move(names));
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    if (ds.has_feature_names()) {
        for (std::size_t c = 0; c < ds.n_features(); ++c) {
            out << (c > 0 ? "," : "") << ds.feature_names()[c];
        }
        out << '\n';
    }
    char buf[32];
    const auto& v = ds.values();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), v(r, c));
            if (c > 0) {
                out << ',';
            }
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Transformations

ColumnScaler ColumnScaler::fit(const Dataset& ds) {
    ColumnScaler s;
    const auto& v = ds.values();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        s.min.push_back(v.col(c).minCoeff());
        s.max.push_back(v.col(c).maxCoeff());
    }
    return s;
}

Dataset ColumnScaler::apply(const Dataset& ds) const {
    if (min.size() != ds.n_features()) {
        throw std::invalid_argument("ColumnScaler::apply: column count mismatch");
    }
    Dataset::Matrix v = ds.values();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const double lo = min[static_cast<std::size_t>(c)];
        const double range = max[static_cast<std::size_t>(c)] - lo;
        if (range > 0.0) {
            v.col(c) = (v.col(c).array() - lo) / range;
        } else {
            v.col(c).setZero();
        }
    }
    return Dataset(std::move(v), ds.feature_names());
}

Dataset rescale_unit(const Dataset& ds) {
    return ColumnScaler::fit(ds).apply(ds);
}

std::vector<std::size_t> split_permutation(std::size_t n_rows, std::uint64_t seed) {
    Rng rng(seed);
    return permutation(n_rows, rng);
}

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
    if (spec.m < 1 || spec.n < 1 || spec.m + spec.n > ds.n_rows()) {
        throw std::invalid_argument("split: need m >= 1, n >= 1 and m + n <= N (m=" + std::to_string(spec.m) +
                                    ", n=" + std::to_string(spec.n) + ", N=" + std::to_string(ds.n_rows()) + ")");
    }
    const auto perm = split_permutation(ds.n_rows(), spec.seed);
    const std::span<const std::size_t> all(perm);
    return SplitResult{select_rows(ds, all.subspan(0, spec.m)), select_rows(ds, all.subspan(spec.m, spec.n))};
}

Dataset restrict(const Dataset& ds, const FeatureSubset& subset) {
    if (static_cast<std::size_t>(subset.back()) >= ds.n_features()) {
        throw std::out_of_range("restrict: feature index " + std::to_string(subset.back()) + " out of range");
    }
    const auto& idx = subset.indices();
    Dataset::Matrix v(ds.values().rows(), static_cast<Eigen::Index>(idx.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        v.col(static_cast<Eigen::Index>(j)) = ds.values().col(idx[j]);
        if (ds.has_feature_names()) {
            names.push_back(ds.feature_names()[static_cast<std::size_t>(idx[j])]);
        }
    }
    return Dataset(std::move(v), std::move(names));
}

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset::Matrix v(static_cast<Eigen::Index>(rows.size()), ds.values().cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= ds.n_rows()) {
            throw std::out_of_range("select_rows: row index out of range");
        }
        v.row(static_cast<Eigen::Index>(r)) = ds.values().row(static_cast<Eigen::Index>(rows[r]));
    }
    return Dataset(std::move(v), ds.feature_names());
}

}  // namespace isde
