#pragma once

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace usd {

enum class Similarity { cos, spr };

std::string_view to_string(Similarity s);
Similarity similarity_from_string(std::string_view s);

class SimilarityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// dot(a, b) / (|a| |b|), accumulated in double. Throws SimilarityError for
/// mismatched dimensions or an all-zero argument.
double cosine(std::span<const float> a, std::span<const float> b);

/// Fractional ranks (1-based, ties share their average rank).
std::vector<double> average_ranks(std::span<const float> v);

/// Spearman's rho as the Pearson correlation of average ranks. Throws
/// SimilarityError for dim < 2, mismatched dimensions or a constant argument.
double spearman(std::span<const float> a, std::span<const float> b);

double similarity(Similarity kind, std::span<const float> a, std::span<const float> b);

/// Maps a vector to a unit vector such that the chosen similarity of two
/// vectors equals the dot product of their prepared forms: the normalized
/// vector for cosine, the centered and normalized rank vector for Spearman.
std::vector<double> prepare(Similarity kind, std::span<const float> v);

}  // namespace usd
