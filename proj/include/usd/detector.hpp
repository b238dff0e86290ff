#pragma once

// Unknown-sense detection: nearest sense by similarity, thresholding into
// assigned/unassigned, and selection of review candidates.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usd/corpus.hpp"
#include "usd/inventory.hpp"
#include "usd/representation.hpp"
#include "usd/similarity.hpp"

namespace usd::detect {

enum class Label : int { assigned = 0, unassigned = 1 };

struct PredictionRecord {
  std::string usage_id;
  std::string headword;
  std::optional<std::string> nearest_sense_id;
  double nearest_similarity = -1.0;
  Label label = Label::unassigned;
  // No complete sense exists for the headword under the active mode.
  bool unrepresentable = false;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// Sense vectors of one headword, keyed (and therefore ordered) by sense id.
using SenseVectors = std::map<std::string, repr::EmbeddingVector, std::less<>>;

struct Nearest {
  std::string sense_id;
  double similarity = 0.0;
};

/// Most similar sense; ties go to the smallest sense id. nullopt when the
/// headword has no sense vectors (unrepresentable).
std::optional<Nearest> nearest_sense(std::span<const float> usage_vector, const SenseVectors& senses,
                                     Similarity kind);

/// Unassigned iff similarity < threshold; equality counts as assigned.
Label classify(double nearest_similarity, double threshold);

/// Predicts every usage against the sense vectors of its headword, using the
/// parallel scoring kernel.
std::vector<PredictionRecord> predict(std::span<const corpus::Usage> usages,
                                      std::span<const repr::EmbeddingVector> usage_vectors,
                                      const std::map<std::string, SenseVectors, std::less<>>& senses_by_headword,
                                      Similarity kind, double threshold);

struct SelectionConfig {
  std::size_t max_per_headword = 8;
  std::size_t sample_size = 0;
};

/// Unassigned, representable predictions of fully complete headwords, sorted
/// by ascending nearest similarity (ties by usage id), taken from the top with
/// the per-headword cap applied while scanning.
std::vector<PredictionRecord> rank_and_select(std::span<const PredictionRecord> predictions,
                                              const inventory::CompletenessView& view,
                                              const SelectionConfig& config);

std::string to_json_line(const PredictionRecord& p);
std::string to_jsonl(std::span<const PredictionRecord> predictions);
std::vector<PredictionRecord> predictions_from_jsonl(std::string_view lines);

}  // namespace usd::detect
