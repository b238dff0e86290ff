#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation and a
// plain serial reference used by the tests and the benchmark.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "usd/similarity.hpp"

namespace usd::kernels {

/// Usage-by-sense scoring problem in compressed row form: usage u is compared
/// with senses candidates[offsets[u] .. offsets[u+1]).
struct ScoringProblem {
  std::size_t dim = 0;
  std::vector<float> usages;  // n_usages x dim, row-major
  std::vector<float> senses;  // n_senses x dim, row-major
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> candidates;

  std::size_t n_usages() const { return offsets.size() - 1; }
  std::size_t n_senses() const { return dim == 0 ? 0 : senses.size() / dim; }
  std::span<const float> usage(std::size_t u) const { return {usages.data() + u * dim, dim}; }
  std::span<const float> sense(std::size_t s) const { return {senses.data() + s * dim, dim}; }
};

/// Similarity of every (usage, candidate sense) pair, aligned with
/// `problem.candidates`. Vectors are prepared once and pairs become dot
/// products, parallel over usages.
std::vector<double> pair_similarities(const ScoringProblem& problem, Similarity kind);

/// Reference: calls cosine()/spearman() on every pair.
std::vector<double> pair_similarities_serial(const ScoringProblem& problem, Similarity kind);

struct Confusion {
  std::size_t tp = 0;  // predicted unassigned, label unassigned
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Confusion counts of the rule "unassigned iff similarity < t" at every
/// threshold in `grid` (positive class: label 1). Sort once, then a binary
/// search per grid point, parallel over the grid.
std::vector<Confusion> sweep_confusions(std::span<const double> similarities, std::span<const std::uint8_t> labels,
                                        std::span<const double> grid);

/// Reference: a full pass over the records for every grid point.
std::vector<Confusion> sweep_confusions_serial(std::span<const double> similarities,
                                               std::span<const std::uint8_t> labels, std::span<const double> grid);

}  // namespace usd::kernels
