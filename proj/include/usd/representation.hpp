#pragma once

// Usage and sense embeddings: the text manipulations that give every gloss or
// example a target span, the provider contract behind which the embedding
// model lives, and the on-disk vector store shared with the exporter.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usd/corpus.hpp"
#include "usd/inventory.hpp"
#include "usd/similarity.hpp"
#include "usd/text.hpp"

namespace usd::repr {

struct EmbeddingRequest {
  std::string request_id;
  std::string text;
  text::Span target;  // code points

  std::uint64_t content_hash() const;
};

/// FNV-1a over `text 0x1F start 0x1F end` (decimal code point offsets).
std::uint64_t content_hash(std::string_view text, text::Span target);

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<float> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<float> values_;
};

/// Componentwise arithmetic mean, accumulated in double.
EmbeddingVector mean(std::span<const EmbeddingVector> vectors);

class ProviderError : public std::runtime_error {
 public:
  ProviderError(std::string request_id, const std::string& what)
      : std::runtime_error(what), request_id_(std::move(request_id)) {}
  const std::string& request_id() const { return request_id_; }

 private:
  std::string request_id_;
};

/// Embedding source. Vectors must depend only on request content (text and
/// span) and come back in request order.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const EmbeddingRequest> requests) = 0;
};

/// Deterministic stand-in for the neural encoder. A vector is the sum of a
/// component seeded by the lowercased target string and a component seeded by
/// the full request hash, so requests that focus on the same word are
/// positively correlated while every distinct request still differs.
class MockProvider final : public EmbeddingProvider {
 public:
  explicit MockProvider(std::size_t dim = 64, double target_weight = 1.0, double context_weight = 1.0);
  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const EmbeddingRequest> requests) override;
  EmbeddingVector embed(const EmbeddingRequest& request) const;

 private:
  std::size_t dim_;
  double target_weight_;
  double context_weight_;
};

/// Content-addressed vector cache; concurrent readers, exclusive writers.
class VectorCache {
 public:
  std::optional<EmbeddingVector> get(std::uint64_t hash) const;
  void put(std::uint64_t hash, EmbeddingVector v);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, EmbeddingVector> entries_;
};

/// Wraps a provider with a cache and fixed-size batching.
class CachingProvider final : public EmbeddingProvider {
 public:
  CachingProvider(EmbeddingProvider& inner, std::size_t batch_size = 32);
  std::size_t dim() const override { return inner_.dim(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const EmbeddingRequest> requests) override;
  const VectorCache& cache() const { return cache_; }
  std::size_t inner_calls() const { return inner_calls_; }

 private:
  EmbeddingProvider& inner_;
  std::size_t batch_size_;
  VectorCache cache_;
  std::size_t inner_calls_ = 0;
};

// ---------------------------------------------------------------------------
// Vector store file (little-endian):
//   char[8] magic "USDVEC01" | u32 dim | u32 dtype (1 = float32) | u64 count
//   count x { u64 content_hash | dim x f32 }
// Companion manifest: JSON lines {"request_id": ..., "hash": "<16 hex>"}.
// ---------------------------------------------------------------------------

inline constexpr char kStoreMagic[8] = {'U', 'S', 'D', 'V', 'E', 'C', '0', '1'};
inline constexpr std::uint32_t kDtypeFloat32 = 1;

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return hashes_.size(); }
  const std::vector<std::uint64_t>& hashes() const { return hashes_; }

  /// Adds a record unless the hash is already present. Returns true if added.
  bool add(std::uint64_t hash, const EmbeddingVector& v);
  const EmbeddingVector* find(std::uint64_t hash) const;

  std::string to_bytes() const;
  static VectorStore from_bytes(std::string_view bytes);

  static VectorStore load(const std::string& path);
  /// Writes via a temporary file and rename.
  void save(const std::string& path) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> hashes_;
  std::vector<EmbeddingVector> vectors_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct ManifestEntry {
  std::string request_id;
  std::uint64_t hash = 0;
};

std::string manifest_to_jsonl(std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> manifest_from_jsonl(std::string_view lines);

/// Request file consumed by the exporter: {"request_id","text","start","end"}.
std::string requests_to_jsonl(std::span<const EmbeddingRequest> requests);
std::vector<EmbeddingRequest> requests_from_jsonl(std::string_view lines);

/// Serves vectors from a store; a missing hash is a ProviderError.
class StoreProvider final : public EmbeddingProvider {
 public:
  explicit StoreProvider(VectorStore store) : store_(std::move(store)) {}
  std::size_t dim() const override { return store_.dim(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const EmbeddingRequest> requests) override;

 private:
  VectorStore store_;
};

/// Embeds `requests` and records them in `store` (appending new hashes only).
std::vector<ManifestEntry> embed_into_store(EmbeddingProvider& provider,
                                            std::span<const EmbeddingRequest> requests,
                                            VectorStore& store, std::size_t batch_size = 32);

// ---------------------------------------------------------------------------
// Model configuration
// ---------------------------------------------------------------------------

enum class UsageMode { plain, sub };
enum class SenseMode { G0, G1, G2, G3, E0, E1, E2, E3, E4 };

std::string_view to_string(UsageMode m);
std::string_view to_string(SenseMode m);
SenseMode sense_mode_from_string(std::string_view s);
bool is_gloss_mode(SenseMode m);
int strategy_of(SenseMode m);
inventory::Kind kind_of(SenseMode m);
std::vector<SenseMode> all_sense_modes();

struct ModelConfig {
  UsageMode usage_mode = UsageMode::plain;
  SenseMode sense_mode = SenseMode::G0;
  Similarity similarity = Similarity::cos;
  double threshold = 0.5;

  /// Identifier such as `G3_COS` or `E4_SUB_SPR`.
  std::string name() const;
  static ModelConfig parse(std::string_view name, double threshold = 0.5);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws std::invalid_argument if the configuration cannot run on the
/// inventory (E4 needs synset members, i.e. a WordNet-like source; the
/// threshold must lie in [0, 1]).
void validate(const ModelConfig& config, inventory::Source source);

// ---------------------------------------------------------------------------
// Replacement strategies
// ---------------------------------------------------------------------------

struct Rewritten {
  std::string text;
  text::Span target;
  int applied_strategy = 0;  // 2 when strategy 4 fell back
};

/// Injects `headword` into `sequence`:
///   0 as is, 1 "HW: SEQ", 2 "SEQ (HW)", 3 "SEQ, i.e., HW" ("dvs." for Swedish),
///   4 the contained synset member replaced by HW (falls back to 2 when no
///   member is present). No article agreement is attempted.
/// Throws std::invalid_argument for an unknown strategy or invalid span.
Rewritten apply_strategy(int strategy, std::string_view headword, std::string_view sequence,
                         std::optional<text::Span> contained = std::nullopt,
                         std::string_view language = "en");

/// First left-to-right occurrence of the headword or one of `members` in
/// `sequence`, matched on whole lowercased tokens (underscores read as spaces).
std::optional<text::Span> locate_member(std::string_view sequence, std::string_view headword,
                                        std::span<const std::string> members);

/// Headword as it appears in running text (underscores become spaces).
std::string display_form(std::string_view headword);

EmbeddingRequest usage_request(const corpus::Usage& usage, UsageMode mode);

/// One request per gloss (G modes) or per example (E modes); empty when the
/// sense has no material for the mode.
std::vector<EmbeddingRequest> sense_requests(const inventory::SenseEntry& sense, std::string_view headword,
                                             SenseMode mode, std::string_view language = "en");

EmbeddingVector embed_usage(const corpus::Usage& usage, UsageMode mode, EmbeddingProvider& provider);

/// Gloss embedding, or the mean of the example embeddings; nullopt when the
/// sense is incomplete for the mode.
std::optional<EmbeddingVector> embed_sense(const inventory::SenseEntry& sense, std::string_view headword,
                                           SenseMode mode, EmbeddingProvider& provider,
                                           std::string_view language = "en");

/// Provider calls in chunks of `batch_size`, order preserved.
std::vector<EmbeddingVector> embed_all(EmbeddingProvider& provider, std::span<const EmbeddingRequest> requests,
                                       std::size_t batch_size = 32);

}  // namespace usd::repr
