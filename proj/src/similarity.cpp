#include "usd/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace usd {

std::string_view to_string(Similarity s) { return s == Similarity::cos ? "COS" : "SPR"; }

Similarity similarity_from_string(std::string_view s) {
  if (s == "COS" || s == "cos") return Similarity::cos;
  if (s == "SPR" || s == "spr") return Similarity::spr;
  throw std::invalid_argument("unknown similarity: " + std::string(s));
}

namespace {

void check_dims(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw SimilarityError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw SimilarityError("cosine of a zero vector is undefined");
  return clamp_unit(dot / (std::sqrt(na) * std::sqrt(nb)));
}

std::vector<double> average_ranks(std::span<const float> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const float> a, std::span<const float> b) {
  check_dims(a, b);
  if (a.size() < 2) throw SimilarityError("spearman needs at least two dimensions");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double x = ra[i] - ma, y = rb[i] - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  if (saa == 0.0 || sbb == 0.0) throw SimilarityError("spearman of a constant vector is undefined");
  return clamp_unit(sab / std::sqrt(saa * sbb));
}

double similarity(Similarity kind, std::span<const float> a, std::span<const float> b) {
  return kind == Similarity::cos ? cosine(a, b) : spearman(a, b);
}

std::vector<double> prepare(Similarity kind, std::span<const float> v) {
  std::vector<double> out;
  if (kind == Similarity::cos) {
    out.assign(v.begin(), v.end());
  } else {
    if (v.size() < 2) throw SimilarityError("spearman needs at least two dimensions");
    out = average_ranks(v);
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
    for (auto& x : out) x -= mean;
  }
  double norm = 0.0;
  for (double x : out) norm += x * x;
  if (norm == 0.0) {
    throw SimilarityError(kind == Similarity::cos ? "cosine of a zero vector is undefined"
                                                  : "spearman of a constant vector is undefined");
  }
  norm = std::sqrt(norm);
  for (auto& x : out) x /= norm;
  return out;
}

}  // namespace usd
