#include "usd/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace usd::kernels {

namespace {

void check(const ScoringProblem& p) {
  if (p.offsets.empty() || p.offsets.front() != 0 || p.offsets.back() != p.candidates.size()) {
    throw std::invalid_argument("malformed scoring problem offsets");
  }
  if (p.dim == 0 ? (!p.usages.empty() || !p.senses.empty())
                 : (p.usages.size() != p.n_usages() * p.dim || p.senses.size() % p.dim != 0)) {
    throw std::invalid_argument("scoring problem vectors do not match dim");
  }
  for (std::size_t s : p.candidates) {
    if (s >= p.n_senses()) throw std::invalid_argument("candidate sense index out of range");
  }
}

std::vector<double> prepare_rows(std::span<const float> data, std::size_t dim, std::size_t rows, Similarity kind) {
  std::vector<double> out(rows * dim);
  const auto n = static_cast<std::ptrdiff_t>(rows);
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      const auto prepared = prepare(kind, data.subspan(static_cast<std::size_t>(r) * dim, dim));
      std::copy(prepared.begin(), prepared.end(), out.begin() + r * static_cast<std::ptrdiff_t>(dim));
    } catch (const SimilarityError&) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    throw SimilarityError(kind == Similarity::cos ? "cosine of a zero vector is undefined"
                                                  : "spearman of a constant vector is undefined");
  }
  return out;
}

}  // namespace

std::vector<double> pair_similarities(const ScoringProblem& problem, Similarity kind) {
  check(problem);
  const std::size_t dim = problem.dim;
  std::vector<double> out(problem.candidates.size());
  if (out.empty()) return out;
  // Only rows that take part in at least one pair are prepared.
  std::vector<char> used(problem.n_usages(), 0);
  for (std::size_t u = 0; u < problem.n_usages(); ++u) used[u] = problem.offsets[u + 1] > problem.offsets[u];
  std::vector<float> active_usages;
  std::vector<std::size_t> row_of(problem.n_usages(), 0);
  for (std::size_t u = 0, k = 0; u < problem.n_usages(); ++u) {
    if (!used[u]) continue;
    row_of[u] = k++;
    const auto v = problem.usage(u);
    active_usages.insert(active_usages.end(), v.begin(), v.end());
  }
  std::vector<char> sense_used(problem.n_senses(), 0);
  for (std::size_t s : problem.candidates) sense_used[s] = 1;
  std::vector<float> active_senses;
  std::vector<std::size_t> sense_row(problem.n_senses(), 0);
  for (std::size_t s = 0, k = 0; s < problem.n_senses(); ++s) {
    if (!sense_used[s]) continue;
    sense_row[s] = k++;
    const auto v = problem.sense(s);
    active_senses.insert(active_senses.end(), v.begin(), v.end());
  }
  const auto pu = prepare_rows(active_usages, dim, active_usages.size() / dim, kind);
  const auto ps = prepare_rows(active_senses, dim, active_senses.size() / dim, kind);

  const auto n = static_cast<std::ptrdiff_t>(problem.n_usages());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t u = 0; u < n; ++u) {
    const double* a = pu.data() + row_of[u] * dim;
    for (std::size_t k = problem.offsets[u]; k < problem.offsets[u + 1]; ++k) {
      const double* b = ps.data() + sense_row[problem.candidates[k]] * dim;
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += a[i] * b[i];
      out[k] = std::clamp(dot, -1.0, 1.0);
    }
  }
  return out;
}

std::vector<double> pair_similarities_serial(const ScoringProblem& problem, Similarity kind) {
  check(problem);
  std::vector<double> out(problem.candidates.size());
  for (std::size_t u = 0; u < problem.n_usages(); ++u) {
    for (std::size_t k = problem.offsets[u]; k < problem.offsets[u + 1]; ++k) {
      out[k] = similarity(kind, problem.usage(u), problem.sense(problem.candidates[k]));
    }
  }
  return out;
}

std::vector<Confusion> sweep_confusions(std::span<const double> similarities, std::span<const std::uint8_t> labels,
                                        std::span<const double> grid) {
  if (similarities.size() != labels.size()) throw std::invalid_argument("similarities/labels size mismatch");
  const std::size_t n = similarities.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return similarities[a] < similarities[b]; });
  std::vector<double> sorted(n);
  // positives_below[k] = number of label-1 records among the k smallest.
  std::vector<std::size_t> positives_below(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = similarities[order[k]];
    positives_below[k + 1] = positives_below[k] + (labels[order[k]] != 0);
  }
  const std::size_t positives = positives_below[n];

  std::vector<Confusion> out(grid.size());
  const auto g = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < g; ++i) {
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), grid[i]) - sorted.begin());
    Confusion c;
    c.tp = positives_below[below];
    c.fp = below - c.tp;
    c.fn = positives - c.tp;
    c.tn = n - below - c.fn;
    out[i] = c;
  }
  return out;
}

std::vector<Confusion> sweep_confusions_serial(std::span<const double> similarities,
                                               std::span<const std::uint8_t> labels, std::span<const double> grid) {
  if (similarities.size() != labels.size()) throw std::invalid_argument("similarities/labels size mismatch");
  std::vector<Confusion> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Confusion c;
    for (std::size_t k = 0; k < similarities.size(); ++k) {
      const bool predicted_unassigned = similarities[k] < grid[i];
      const bool unassigned = labels[k] != 0;
      if (predicted_unassigned && unassigned) ++c.tp;
      else if (predicted_unassigned) ++c.fp;
      else if (unassigned) ++c.fn;
      else ++c.tn;
    }
    out[i] = c;
  }
  return out;
}

}  // namespace usd::kernels
