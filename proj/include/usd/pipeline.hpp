#pragma once

// End-to-end workflows behind the command line: run configuration, provider
// construction, run manifests and one function per command.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usd/annotation.hpp"
#include "usd/corpus.hpp"
#include "usd/detector.hpp"
#include "usd/evaluation.hpp"
#include "usd/inventory.hpp"
#include "usd/representation.hpp"

namespace usd::pipeline {

/// Bad flags, bad config values or missing input paths (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Embedding provider could not serve the run; rerunning may succeed.
class RetriableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusInput {
  std::string path;
  corpus::CorpusTag tag = corpus::CorpusTag::modern;
};

struct RunConfig {
  std::string language = "en";
  std::string inventory_path;
  std::string inventory_schema = "canonical";  // canonical | wordnet | so
  bool include_sub_entries = false;
  bool primary_only = false;
  std::vector<CorpusInput> corpora;
  std::string lemma_table;
  corpus::FilterLimits limits{};
  bool apply_filter = true;
  corpus::SampleConfig sample{};

  std::string usages_path;
  std::string gold_path;
  std::vector<std::string> models;  // grid for select; empty means all valid
  repr::ModelConfig model{};        // predict
  eval::EvalConfig eval{};
  detect::SelectionConfig selection{8, 150};

  std::string provider = "mock:64";  // mock[:dim] | store:PATH
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  std::string predictions_path;
  std::string candidates_path;
  std::string instances_path;
  std::vector<std::string> judgments;
};

nlohmann::json to_json(const RunConfig& config);
/// Fields present in `j` override those of `base`. Throws UsageError on
/// unknown keys or bad values.
RunConfig from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::string& path);

/// Hash of the canonical JSON form, 16 hex digits.
std::string config_hash(const RunConfig& config);

/// `mock`, `mock:DIM` or `store:PATH`. Throws UsageError on a bad spec and
/// RetriableError when a store cannot be read.
std::unique_ptr<repr::EmbeddingProvider> make_provider(const std::string& spec);

std::string read_file(const std::string& path);
/// Atomic write via a temporary file and rename; creates parent directories.
void write_file(const std::string& path, std::string_view content);
std::string file_hash(const std::string& path);

/// Loads the inventory named by the config according to its schema.
inventory::SenseInventory load_inventory(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

/// usage_id -> sense_id -> similarity for the senses of `view` under `model`.
/// Usages whose headword has no complete sense get an empty row.
eval::SimTable similarity_table(std::span<const corpus::Usage> usages, const inventory::SenseInventory& inv,
                                const inventory::CompletenessView& view, const repr::ModelConfig& model,
                                repr::EmbeddingProvider& provider, std::string_view language,
                                std::size_t batch_size = 32);

/// Sense vectors for the complete senses of `view`, keyed by headword.
std::map<std::string, detect::SenseVectors, std::less<>> sense_vectors(
    const inventory::SenseInventory& inv, const inventory::CompletenessView& view, repr::SenseMode mode,
    repr::EmbeddingProvider& provider, std::string_view language, std::size_t batch_size = 32);

/// Records the files a command read and wrote, and writes `config.json`,
/// `manifest.json` and the `run.log` sidecar into the output directory.
class Run {
 public:
  Run(std::string command, RunConfig config);
  ~Run();
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  const RunConfig& config() const { return config_; }
  std::string out_path(const std::string& name) const;
  void input(const std::string& path);
  void output(const std::string& name, std::string_view content);
  void log(const std::string& message);
  void warn(const std::string& message);
  /// Writes config.json and manifest.json.
  void finish();

 private:
  std::string command_;
  RunConfig config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  std::vector<std::string> warnings_;
  struct Log;
  std::unique_ptr<Log> log_;
};

struct IngestResult {
  inventory::StatsReport stats;
  std::size_t warnings = 0;
};
IngestResult cmd_ingest(const RunConfig& config);

inventory::StatsReport cmd_stats(const RunConfig& config);

struct SampleOutcome {
  std::size_t usages_found = 0;
  corpus::SampleResult sample;
};
SampleOutcome cmd_sample(const RunConfig& config);

struct EmbedResult {
  std::size_t requests = 0;
  std::size_t stored = 0;  // 0 when no provider was run
};
EmbedResult cmd_embed(const RunConfig& config);

struct SelectResult {
  std::map<std::string, eval::MetricsReport> reports;
  std::string best_model;
  std::string grid;
};
SelectResult cmd_select(const RunConfig& config);

struct PredictResult {
  std::vector<corpus::Usage> usages;
  std::vector<detect::PredictionRecord> predictions;
  std::vector<detect::PredictionRecord> candidates;
  std::vector<annot::AnnotationInstance> instances;
};
PredictResult cmd_predict(const RunConfig& config);

std::vector<detect::PredictionRecord> cmd_candidates(const RunConfig& config);

std::vector<annot::AnnotationInstance> cmd_instances(const RunConfig& config);

annot::AggregationResult cmd_aggregate(const RunConfig& config);

}  // namespace usd::pipeline
