#pragma once

// Sense inventories: dictionary dumps parsed into headword -> senses, plus the
// completeness views that decide which senses a model can represent.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usd::inventory {

enum class Source { wordnet_like, so_like };

std::string_view to_string(Source s);
Source source_from_string(std::string_view s);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string headword, const std::string& what)
      : std::runtime_error(what), headword_(std::move(headword)) {}
  const std::string& headword() const { return headword_; }

 private:
  std::string headword_;
};

class MergeError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A dictionary sub-sense (SO `sub_entries`). Kept as metadata only.
struct SubEntry {
  std::optional<std::string> gloss;
  std::optional<std::string> secondary_gloss;
  std::vector<std::string> examples;
  std::optional<std::string> year;

  friend bool operator==(const SubEntry&, const SubEntry&) = default;
};

struct SenseEntry {
  std::string sense_id;
  std::optional<std::string> gloss;
  std::optional<std::string> secondary_gloss;
  std::vector<std::string> examples;
  std::optional<std::string> pos;
  bool is_primary = true;
  std::optional<std::string> year;
  // WordNet synset metadata; shared between headwords listing the same synset.
  std::optional<std::string> synset_id;
  std::vector<std::string> synonyms;
  std::vector<SubEntry> sub_entries;

  /// The gloss if present, else the secondary gloss, else nothing.
  std::optional<std::string> effective_gloss() const;
  bool has_gloss() const { return effective_gloss().has_value(); }
  bool has_examples() const { return !examples.empty(); }

  friend bool operator==(const SenseEntry&, const SenseEntry&) = default;
};

struct HeadwordEntry {
  std::string headword;
  std::vector<SenseEntry> senses;
  // Sense ids from most to least frequent. Empty when the source carries no
  // frequency information (SO).
  std::vector<std::string> frequency_order;

  friend bool operator==(const HeadwordEntry&, const HeadwordEntry&) = default;
};

class SenseInventory {
 public:
  SenseInventory() = default;
  explicit SenseInventory(Source source) : source_(source) {}

  Source source() const { return source_; }
  const std::map<std::string, HeadwordEntry>& headwords() const { return headwords_; }
  std::size_t size() const { return headwords_.size(); }
  bool empty() const { return headwords_.empty(); }

  const HeadwordEntry* find(std::string_view headword) const;
  const SenseEntry* find_sense(std::string_view sense_id) const;
  /// Headword that owns `sense_id`, or empty.
  std::string owner_of(std::string_view sense_id) const;

  /// Adds a headword. Throws MergeError on duplicate headwords and ParseError
  /// on an empty entry or a sense id collision.
  void add(HeadwordEntry entry);

  friend bool operator==(const SenseInventory& a, const SenseInventory& b) {
    return a.source_ == b.source_ && a.headwords_ == b.headwords_;
  }

 private:
  Source source_ = Source::wordnet_like;
  std::map<std::string, HeadwordEntry> headwords_;
  std::map<std::string, std::string, std::less<>> sense_owner_;
};

struct ParseResult {
  SenseInventory inventory;
  std::vector<std::string> warnings;
};

struct SoParseOptions {
  // Sub-entries become additional senses instead of metadata.
  bool include_sub_entries = false;
};

/// Deterministic sense id: content hash of (headword, ordinal, gloss).
std::string make_sense_id(std::string_view headword, std::size_t ordinal,
                          std::string_view gloss);

/// WordNet in dictionary form: a JSON array (or JSON lines) of
/// `{"headword": ..., "entries": [{"pos", "gloss", "examples"}]}` records.
/// Entries may carry `"primary": bool` (default true), `"synset"` and
/// `"synonyms"`. Entry order is taken as the sense frequency order.
ParseResult parse_wordnet_dump(std::string_view raw);

/// Svensk ordbok dump: records `{"word", "nature", "definitions": [{"gloss",
/// "sub_gloss", "sub_entries", "examples", "year"}]}`.
ParseResult parse_so_dump(std::string_view raw, const SoParseOptions& options = {});

/// Canonical line format: one JSON object per headword, sorted by headword.
std::string serialize(const SenseInventory& inv);
SenseInventory parse_canonical(std::string_view lines);

struct StatsReport {
  std::size_t headwords = 0;
  std::size_t senses = 0;
  std::optional<double> avg_senses_per_headword;
  std::optional<double> avg_senses_per_multi_sense_headword;
  std::optional<double> pct_senses_with_gloss;
  std::optional<double> avg_gloss_length;
  std::optional<double> pct_senses_with_examples;
  std::optional<double> avg_examples_per_sense;
  std::optional<double> avg_examples_per_exemplified_sense;
  std::optional<double> avg_example_length;
};

StatsReport inventory_stats(const SenseInventory& inv);
/// Flat key/value JSON object; absent values are null.
std::string to_json(const StatsReport& report);

enum class Kind { gloss, examples, gloss_and_examples };
std::string_view to_string(Kind k);

enum class Completeness { complete, partial, unrepresentable };
std::string_view to_string(Completeness c);

struct HeadwordCompleteness {
  std::vector<std::string> complete;  // sense ids, inventory order
  std::size_t considered = 0;         // senses passing the filter
  Completeness status = Completeness::unrepresentable;
};

struct CompletenessView {
  Kind kind = Kind::gloss;
  bool primary_only = false;
  std::map<std::string, HeadwordCompleteness, std::less<>> headwords;

  const HeadwordCompleteness* find(std::string_view headword) const;
  bool is_complete(std::string_view headword, std::string_view sense_id) const;
  std::size_t count(Completeness c) const;
};

bool is_complete(const SenseEntry& s, Kind kind);

CompletenessView complete_senses(const SenseInventory& inv, Kind kind, bool primary_only = false);

}  // namespace usd::inventory
