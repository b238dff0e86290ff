#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "usd/text.hpp"

namespace usd {

using Rng = std::mt19937_64;

/// Seed for a named substream of a global seed, optionally indexed (round,
/// fold, ...). Every consumer of randomness derives its own substream so that
/// partial reruns reproduce the same draws.
inline std::uint64_t substream_seed(std::uint64_t global_seed, std::string_view name,
                                    std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = text::fnv1a(name, text::fnv1a(std::to_string(global_seed)));
  for (std::uint64_t idx : indices) {
    h = text::fnv1a(std::to_string(idx), h ^ 0x9E3779B97F4A7C15ULL);
  }
  return h;
}

inline Rng substream(std::uint64_t global_seed, std::string_view name,
                     std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(substream_seed(global_seed, name, indices));
}

}  // namespace usd
