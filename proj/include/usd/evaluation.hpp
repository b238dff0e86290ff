#pragma once

// Model selection by simulation: known senses are masked to create synthetic
// unknown-sense ground truth, and thresholds are tuned by repeated k-fold
// cross-validation under an F-beta objective.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "usd/inventory.hpp"
#include "usd/kernels.hpp"
#include "usd/random.hpp"

namespace usd::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Senses judged fitting for one annotated usage (empty: naturally unassigned).
struct GoldUsage {
  std::string usage_id;
  std::string headword;
  std::set<std::string> senses;
  friend bool operator==(const GoldUsage&, const GoldUsage&) = default;
};

using GoldAssignment = std::vector<GoldUsage>;

/// Throws EvalError if a gold sense is not listed under the usage's headword
/// or a usage id repeats.
void validate_gold(const GoldAssignment& gold, const inventory::SenseInventory& inv);

std::string gold_to_jsonl(const GoldAssignment& gold);
GoldAssignment gold_from_jsonl(std::string_view lines);

struct HeadwordPlan {
  std::vector<std::string> unmasked;
  std::vector<std::string> masked;
  friend bool operator==(const HeadwordPlan&, const HeadwordPlan&) = default;
};

struct MaskingPlan {
  std::uint64_t seed = 0;
  std::map<std::string, HeadwordPlan, std::less<>> headwords;
  std::vector<std::string> excluded_headwords;  // no complete sense

  bool covers(std::string_view headword) const { return headwords.find(headword) != headwords.end(); }
  bool is_unmasked(std::string_view headword, std::string_view sense_id) const;
  bool in_universe(std::string_view headword, std::string_view sense_id) const;
  friend bool operator==(const MaskingPlan&, const MaskingPlan&) = default;
};

/// For every gold headword: incomplete senses are left out, a sole complete
/// sense stays unmasked, otherwise one uniformly drawn complete sense stays
/// unmasked and the rest are masked.
MaskingPlan build_masking_plan(const GoldAssignment& gold, const inventory::CompletenessView& view,
                               std::uint64_t seed);

/// Every complete sense unmasked.
MaskingPlan identity_plan(const GoldAssignment& gold, const inventory::CompletenessView& view);

/// usage_id -> 0 (some gold sense unmasked) or 1. Usages of headwords outside
/// the plan are left out.
std::map<std::string, std::uint8_t, std::less<>> derive_labels(const GoldAssignment& gold, const MaskingPlan& plan);

struct Metrics {
  kernels::Confusion confusion;
  std::optional<double> precision;  // absent with no predicted positives
  std::optional<double> recall;     // absent with no actual positives
  double f_beta = 0.0;              // 0 whenever P or R is absent
};

kernels::Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Positive class: unassigned (1).
PrecisionRecall precision_recall(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);
PrecisionRecall precision_recall(const kernels::Confusion& c);

/// (1 + b^2) P R / (b^2 P + R); 0 when P = R = 0.
double f_beta(double precision, double recall, double beta);

Metrics metrics(const kernels::Confusion& c, double beta);

inline constexpr double kBetaPresets[] = {0.1, 0.3, 0.5};

/// {0.00, 0.01, ..., 1.00}.
std::vector<double> threshold_grid();

struct EvalConfig {
  double beta = 0.3;
  std::size_t rounds = 10;
  std::size_t folds = 5;
  std::vector<double> grid = threshold_grid();
  std::uint64_t seed = 0;
  bool group_folds_by_headword = false;
};

struct SweepPoint {
  double threshold = 0.0;
  Metrics metrics;
};

struct SweepResult {
  double best_threshold = 0.0;
  Metrics best;
  std::vector<SweepPoint> curve;
};

/// Evaluates "unassigned iff similarity < t" over the grid and returns the
/// F-beta maximizing threshold (smallest on ties). Throws EvalError on empty
/// input.
SweepResult threshold_sweep(std::span<const double> similarities, std::span<const std::uint8_t> labels,
                            const EvalConfig& config);

/// usage_id -> sense_id -> similarity, for every complete sense of the
/// usage's headword under one model configuration.
using SimTable = std::map<std::string, std::map<std::string, double, std::less<>>, std::less<>>;

/// Highest similarity among the unmasked senses; -1 when none is available.
double masked_nearest(const SimTable& table, std::string_view usage_id, std::string_view headword,
                      const MaskingPlan& plan);

/// Predicts 0 with probability p = share of label-0 entries in `labels`.
std::vector<std::uint8_t> random_baseline(std::span<const std::uint8_t> labels, Rng& rng);
std::vector<std::uint8_t> random_baseline(double p_assigned, std::size_t n, Rng& rng);

/// Predicts 0 iff the headword's most frequent sense in the plan universe
/// (masked or not) is among the usage's gold senses. nullopt if the inventory
/// carries no frequency order.
std::optional<std::map<std::string, std::uint8_t, std::less<>>> frequency_baseline(
    const GoldAssignment& gold, const inventory::SenseInventory& inv, const MaskingPlan& plan);

/// Random split of `n` items into `folds` near-equal folds. With `groups`,
/// items sharing a group key land in the same fold.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, Rng& rng,
                                      std::span<const std::string> groups = {});

struct FoldResult {
  double threshold = 0.0;
  Metrics train;
  Metrics test;
  double random_train_f = 0.0;
  double random_test_f = 0.0;
  std::optional<double> frequency_train_f;
  std::optional<double> frequency_test_f;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<SweepPoint> train_curve;
};

struct FoldAverages {
  double threshold = 0.0;
  std::optional<double> train_precision, test_precision;
  std::optional<double> train_recall, test_recall;
  double train_f = 0.0, test_f = 0.0;
  double random_train_f = 0.0, random_test_f = 0.0;
  std::optional<double> frequency_train_f, frequency_test_f;
};

struct RoundResult {
  std::size_t round = 0;
  MaskingPlan plan;
  std::vector<std::string> usage_ids;  // evaluated usages, sorted
  std::vector<std::uint8_t> labels;    // aligned with usage_ids
  std::vector<double> similarities;    // aligned with usage_ids
  std::vector<std::size_t> fold_of;    // aligned with usage_ids
  std::vector<FoldResult> folds;
  FoldAverages average;
};

/// Mean of each fold quantity; absent precision/recall values are skipped.
FoldAverages average_folds(std::span<const FoldResult> folds);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation across rounds
};

MeanStd mean_std(std::span<const double> values);

struct MetricsReport {
  std::string model;
  double beta = 0.3;
  std::vector<RoundResult> rounds;
  MeanStd test_f;
  MeanStd train_f;
  MeanStd threshold;
  MeanStd random_test_f;
  std::optional<MeanStd> frequency_test_f;
};

/// One round under a given plan and fold split.
RoundResult evaluate_round(const SimTable& table, const GoldAssignment& gold, const inventory::SenseInventory& inv,
                           const MaskingPlan& plan, std::span<const std::string> usage_ids,
                           std::span<const std::size_t> fold_of, const EvalConfig& config, std::size_t round);

/// `rounds` x `folds` cross-validation. Round r uses the masking substream
/// (seed, "masking", r), the fold substream (seed, "folds", r) and the
/// baseline substream (seed, "baseline", r, fold), so all model
/// configurations evaluated with one seed share masking plans and splits.
MetricsReport run_cross_validation(const SimTable& table, const GoldAssignment& gold,
                                   const inventory::SenseInventory& inv, const inventory::CompletenessView& view,
                                   const EvalConfig& config, std::string model_name = {});

/// Table layout with Threshold / Precision / Recall / F / random_F /
/// frequency_F rows and Average plus per-fold Training/Test columns.
std::string render_round_table(const RoundResult& round, double beta);

/// Columnar curve records: round, fold, threshold, precision, recall, f_beta.
std::string render_curves(const RoundResult& round);

/// Model grid: sense mode rows x {default, SUB} x {COS, SPR} columns of mean
/// test F-beta.
std::string render_grid(const std::map<std::string, MetricsReport>& reports);

std::string report_to_json(const MetricsReport& report);

}  // namespace usd::eval
