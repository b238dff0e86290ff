#pragma once

// Corpus ingestion: sentence filtering, headword search through a pluggable
// lemmatizer, and the seeded random usage sample used for the first
// annotation round.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usd/inventory.hpp"
#include "usd/text.hpp"

namespace usd::corpus {

enum class CorpusTag { modern, historical };
std::string_view to_string(CorpusTag t);
CorpusTag corpus_tag_from_string(std::string_view s);

/// A sentence with one marked occurrence of a headword.
struct Usage {
  std::string usage_id;
  std::string sentence;
  text::Span target;  // code points
  std::size_t token_index = 0;
  std::string headword;
  CorpusTag corpus_tag = CorpusTag::modern;
  std::string language;

  std::string target_text() const { return text::slice(sentence, target); }
  friend bool operator==(const Usage&, const Usage&) = default;
};

struct Token {
  std::string form;
  text::Span span;
  bool punctuation = false;
};

/// Word tokens are maximal runs of letters/digits; every other non-space code
/// point is a one-character punctuation token.
std::vector<Token> tokenize(std::string_view sentence);

class LemmatizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lemmatizer contract. Implementations must be deterministic and safe to call
/// concurrently through a const reference.
class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::vector<Token> tokenize(std::string_view sentence) const;
  /// Canonical (lowercased) form of a token.
  virtual std::string lemma(const Token& token) const = 0;
};

/// Dictionary-backed lemmatizer: lowercases, then maps form -> lemma through a
/// lookup table; unknown forms are their own lemma.
class TableLemmatizer final : public Lemmatizer {
 public:
  TableLemmatizer() = default;
  explicit TableLemmatizer(std::unordered_map<std::string, std::string> table);

  /// Lines of `form<TAB>lemma`; blank lines and `#` comments are skipped.
  static TableLemmatizer from_tsv(std::string_view tsv);

  std::vector<Token> tokenize(std::string_view sentence) const override;
  std::string lemma(const Token& token) const override;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
};

enum class FilterReason { none, length, punctuation };
std::string_view to_string(FilterReason r);

struct FilterLimits {
  std::size_t max_chars = 300;
  double max_punctuation_share = 0.25;
};

struct FilterDecision {
  bool keep = true;
  FilterReason reason = FilterReason::none;
  std::size_t chars = 0;
  double punctuation_share = 0.0;
};

FilterDecision filter_sentence(std::string_view sentence, const FilterLimits& limits = {});

struct FindOptions {
  CorpusTag corpus_tag = CorpusTag::modern;
  std::string language = "en";
  std::string id_prefix = "u";
  FilterLimits limits{};
  bool apply_filter = true;
};

struct FindResult {
  std::vector<Usage> usages;
  std::size_t sentences_dropped = 0;
  std::vector<std::string> warnings;
};

/// Searches cleaned sentences for headword lemmas. Sentences are filtered
/// first; a lemmatizer failure skips the sentence with a warning. Usage ids are
/// `<prefix>:<sentence index>:<token index>` (plus `:<headword>` when several
/// headwords start at the same token).
FindResult find_usages(std::span<const std::string> sentences, const inventory::SenseInventory& inv,
                       const Lemmatizer& lemmatizer, const FindOptions& options = {});

struct SampleConfig {
  std::size_t headword_pool = 3000;
  std::size_t stop_at_headwords_with_usage = 150;
  std::size_t max_usages_per_headword = 5;
};

struct SampleResult {
  std::vector<Usage> usages;
  std::size_t headwords_searched = 0;
  std::size_t headwords_found = 0;
  bool shortfall = false;
};

/// Random phase-I sample over one corpus: a seeded pool of headwords is
/// searched in random order until enough of them have a usage; each keeps at
/// most `max_usages_per_headword` randomly chosen usages.
SampleResult sample_random_phase1(std::span<const Usage> usages, std::span<const std::string> headwords,
                                  std::uint64_t seed, const SampleConfig& config = {});

std::vector<std::string> read_sentences(std::string_view raw);

std::string to_jsonl(std::span<const Usage> usages);
std::vector<Usage> usages_from_jsonl(std::string_view lines);

}  // namespace usd::corpus
