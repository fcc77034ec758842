#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace isde {

// Deterministic random source shared by every component.
//
// The engine is MT19937-64 (std::mt19937_64, whose output sequence is fixed
// by the C++ standard). Distributions are implemented here rather than taken
// from <random> because the standard distributions are implementation-defined:
//   uniform()  = (next() >> 11) * 2^-53, a double in [0, 1)
//   below(n)   = rejection sampling on next() against the largest multiple of n
//   normal()   = Box-Muller cosine branch, one draw of u1 in (0,1] and u2 in [0,1)
//   permutation(n) = Fisher-Yates from the top: for i = n-1..1 swap(i, below(i+1))
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    std::uint64_t below(std::uint64_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

// SplitMix64 finalizer over (seed, stream); used to derive independent
// per-component seeds from a single top-level seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace isde
