#include "isde/combinatorics.hpp"

#include "isde/error.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace isde {

namespace {

void check_dk(std::size_t d, std::size_t k, const char* who) {
    if (k < 1 || k > d) {
        throw std::invalid_argument(std::string(who) + ": need 1 <= k <= d (d=" + std::to_string(d) +
                                    ", k=" + std::to_string(k) + ")");
    }
}

void check_mask_width(std::size_t d, const char* who) {
    if (d > 64) {
        throw std::invalid_argument(std::string(who) + ": d > 64 is not supported");
    }
}

}  // namespace

BigInt binomial(std::size_t n, std::size_t r) {
    if (r > n) {
        return 0;
    }
    r = std::min(r, n - r);
    BigInt out = 1;
    for (std::size_t i = 1; i <= r; ++i) {
        out *= n - r + i;
        out /= i;
    }
    return out;
}

BigInt count_subsets(std::size_t d, std::size_t k) {
    check_dk(d, k, "count_subsets");
    BigInt total = 0;
    for (std::size_t i = 1; i <= k; ++i) {
        total += binomial(d, i);
    }
    return total;
}

BigInt count_partitions(std::size_t d, std::size_t k) {
    check_dk(d, k, "count_partitions");
    // B(n) = sum_{j=1}^{min(k,n)} C(n-1, j-1) B(n-j): the lowest remaining
    // feature goes into a block of size j.
    std::vector<BigInt> b(d + 1);
    b[0] = 1;
    for (std::size_t n = 1; n <= d; ++n) {
        BigInt acc = 0;
        for (std::size_t j = 1; j <= std::min(k, n); ++j) {
            acc += binomial(n - 1, j - 1) * b[n - j];
        }
        b[n] = acc;
    }
    return b[d];
}

BigInt count_pair_partitions(std::size_t d) {
    if (d < 1) {
        throw std::invalid_argument("count_pair_partitions: d must be >= 1");
    }
    BigInt total = 0;
    BigInt ordered = 1;    // prod_{j<i} C(d-2j, 2)
    BigInt factorial = 1;  // i!
    for (std::size_t i = 0; i <= d / 2; ++i) {
        if (i > 0) {
            ordered *= binomial(d - 2 * (i - 1), 2);
            factorial *= i;
        }
        total += ordered / factorial;
    }
    return total;
}

CountReport count_report(std::size_t d, std::size_t k) {
    return CountReport{d, k, count_subsets(d, k), count_partitions(d, k)};
}

void for_each_subset_mask(std::size_t d, std::size_t k, const std::function<void(std::uint64_t)>& visit) {
    check_dk(d, k, "enumerate_subsets");
    check_mask_width(d, "enumerate_subsets");
    // lexicographic combinations of each size
    for (std::size_t size = 1; size <= k; ++size) {
        std::vector<int> idx(size);
        for (std::size_t i = 0; i < size; ++i) {
            idx[i] = static_cast<int>(i);
        }
        while (true) {
            std::uint64_t m = 0;
            for (int i : idx) {
                m |= std::uint64_t{1} << i;
            }
            visit(m);
            std::size_t pos = size;
            while (pos > 0 && idx[pos - 1] == static_cast<int>(d - size + pos - 1)) {
                --pos;
            }
            if (pos == 0) {
                break;
            }
            ++idx[pos - 1];
            for (std::size_t j = pos; j < size; ++j) {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

std::vector<FeatureSubset> enumerate_subsets(std::size_t d, std::size_t k) {
    std::vector<FeatureSubset> out;
    for_each_subset_mask(d, k, [&](std::uint64_t m) { out.push_back(FeatureSubset::from_mask(m)); });
    return out;
}

namespace {

struct PartitionWalker {
    std::size_t k;
    const std::function<void(std::span<const std::uint64_t>)>& visit;
    std::vector<std::uint64_t> blocks;

    void run(std::uint64_t remaining) {
        if (remaining == 0) {
            visit(blocks);
            return;
        }
        for_each_lowest_block(remaining, k, [&](std::uint64_t block) {
            blocks.push_back(block);
            run(remaining & ~block);
            blocks.pop_back();
        });
    }
};

}  // namespace

void enumerate_partitions(std::size_t d, std::size_t k,
                          const std::function<void(std::span<const std::uint64_t>)>& visit, std::uint64_t guard) {
    check_dk(d, k, "enumerate_partitions");
    check_mask_width(d, "enumerate_partitions");
    if (count_partitions(d, k) > guard) {
        throw ComputationError("enumerate_partitions: |Part_" + std::to_string(d) + "^" + std::to_string(k) +
                               "| = " + count_partitions(d, k).str() + " exceeds the guard of " +
                               std::to_string(guard));
    }
    PartitionWalker walker{k, visit, {}};
    walker.blocks.reserve(d);
    const std::uint64_t full = d == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1;
    walker.run(full);
}

std::vector<Partition> all_partitions(std::size_t d, std::size_t k, std::uint64_t guard) {
    std::vector<Partition> out;
    enumerate_partitions(
        d, k, [&](std::span<const std::uint64_t> masks) { out.push_back(Partition::from_masks(masks)); }, guard);
    return out;
}

}  // namespace isde
