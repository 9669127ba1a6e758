#pragma once

// Portable random helpers. Every stochastic stage draws from mt19937_64 through
// these so that results do not depend on the standard library's distributions.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ctrex {

/// Box-Muller draw on 53-bit uniforms.
double standard_normal(std::mt19937_64& rng);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng);

/// Independent child seed for stream `index` of a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace ctrex
