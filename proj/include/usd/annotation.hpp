#pragma once

// Annotation instances (usage x candidate gloss), judgment aggregation to
// usage-level labels, and Krippendorff's alpha.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "usd/corpus.hpp"
#include "usd/evaluation.hpp"
#include "usd/inventory.hpp"

namespace usd::annot {

class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnnotationInstance {
  std::string instance_id;
  std::string usage_id;
  std::string headword;
  std::string sense_id;
  corpus::CorpusTag corpus_tag = corpus::CorpusTag::modern;
  std::string sentence;
  text::Span target;
  std::string candidate_gloss;
  std::vector<std::string> all_glosses;

  /// Sentence with the target enclosed in `**`.
  std::string marked_sentence() const;
  friend bool operator==(const AnnotationInstance&, const AnnotationInstance&) = default;
};

struct GenerateResult {
  std::vector<AnnotationInstance> instances;
  std::vector<std::string> warnings;
};

/// One instance per (usage, eligible sense). Eligible senses carry a gloss and,
/// with `primary_only`, belong to a primary synset. The output order is
/// shuffled with `seed`.
GenerateResult generate_instances(std::span<const corpus::Usage> usages, const inventory::SenseInventory& inv,
                                  bool primary_only, std::uint64_t seed);

enum class JudgmentLabel { zero, one, dash };
std::string_view to_string(JudgmentLabel l);
JudgmentLabel judgment_label_from_string(std::string_view s);

struct Judgment {
  std::string instance_id;
  std::string annotator_id;
  JudgmentLabel label = JudgmentLabel::dash;
  std::optional<std::string> comment;
};

enum class Majority { zero, one, excluded };
std::string_view to_string(Majority m);

/// Dashes removed, strict majority wins; ties and empty remainders exclude.
Majority aggregate_majority(std::span<const JudgmentLabel> labels);

enum class UsageStatus { assigned, unassigned, excluded };
std::string_view to_string(UsageStatus s);

/// Assigned iff some instance has majority 1; unassigned iff every
/// non-excluded majority is 0 and at least one exists; excluded otherwise.
UsageStatus usage_assignment(std::span<const Majority> majorities);

struct AlphaResult {
  double alpha = 1.0;
  bool degenerate = false;  // no expected disagreement; alpha reported as 1
  std::size_t items = 0;    // items with >= 2 values
  std::size_t values = 0;   // pairable values
};

/// Nominal Krippendorff's alpha from the coincidence matrix. `units` holds the
/// category values per item (missing values simply absent). nullopt when no
/// item has two values.
std::optional<AlphaResult> krippendorff_alpha_nominal(const std::vector<std::vector<int>>& units);

/// Alpha over judgments with dashes removed. With `pair`, only those two
/// annotators are used; `instance_filter` restricts the items.
std::optional<AlphaResult> krippendorff_alpha(std::span<const Judgment> judgments,
                                              const std::set<std::string>* annotators = nullptr,
                                              const std::set<std::string>* instance_filter = nullptr);

struct Summary {
  std::size_t instances = 0;
  std::size_t usages = 0;
  std::size_t label0 = 0, label1 = 0, dash = 0;
  std::size_t excluded_instances = 0;
  std::size_t excluded_usages = 0;
  std::size_t assigned = 0;
  std::size_t unassigned = 0;

  std::size_t remaining_usages() const { return usages - excluded_usages; }
  std::optional<double> unassigned_pct() const;
};

struct AgreementRow {
  std::string name;  // "A1 vs. A2" or "Full"
  std::map<std::string, std::optional<AlphaResult>> by_slice;  // "all", "modern", "historical"
};

struct AggregationResult {
  std::map<std::string, Majority> instance_majority;
  std::map<std::string, UsageStatus> usage_status;
  std::vector<std::string> unknown_instance_ids;
  std::map<std::string, Summary> summary;  // "all", "modern", "historical"
  std::vector<AgreementRow> agreement;
  /// Non-excluded usages with the senses whose instance majority is 1.
  eval::GoldAssignment gold;
};

/// Aggregates judgments for the instances they reference. Only instances with
/// at least one judgment are counted; judgments for unknown instance ids are
/// listed and skipped. Throws AnnotationError on a repeated (instance,
/// annotator) pair.
AggregationResult aggregate(std::span<const AnnotationInstance> instances, std::span<const Judgment> judgments);

std::string render_summary(const AggregationResult& r);
std::string render_agreement(const AggregationResult& r);

std::string instances_to_jsonl(std::span<const AnnotationInstance> instances);
std::string instances_to_tsv(std::span<const AnnotationInstance> instances);
std::vector<AnnotationInstance> instances_from_jsonl(std::string_view lines);

/// JSON lines {"instance_id","annotator_id","label","comment"} or
/// tab-separated `instance_id annotator_id label [comment]`.
std::vector<Judgment> judgments_from_text(std::string_view lines);
std::string judgments_to_jsonl(std::span<const Judgment> judgments);

}  // namespace usd::annot
