#pragma once

#include <cstdint>
#include <random>

#include "blockswap/tensor.hpp"

namespace blockswap {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent per-index streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// i.i.d. N(0, 2/fan_in) draws.
Tensor kaiming_init(const Shape& shape, std::int64_t fan_in, Rng& rng);

}  // namespace blockswap
