#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mfsp {

using Rng = std::mt19937_64;

/// Seed for sub-stream `stream` of a run seeded with `seed`. Distinct (stream, index)
/// pairs give statistically independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace mfsp
