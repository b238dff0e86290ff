#include "usd/inventory.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "usd/text.hpp"

namespace usd::inventory {

using nlohmann::json;

std::string_view to_string(Source s) {
  return s == Source::wordnet_like ? "wordnet_like" : "so_like";
}

Source source_from_string(std::string_view s) {
  if (s == "wordnet_like" || s == "wordnet") return Source::wordnet_like;
  if (s == "so_like" || s == "so") return Source::so_like;
  throw std::invalid_argument("unknown inventory source: " + std::string(s));
}

std::optional<std::string> SenseEntry::effective_gloss() const {
  if (gloss && !gloss->empty()) return gloss;
  if (secondary_gloss && !secondary_gloss->empty()) return secondary_gloss;
  return std::nullopt;
}

const HeadwordEntry* SenseInventory::find(std::string_view headword) const {
  auto it = headwords_.find(std::string(headword));
  return it == headwords_.end() ? nullptr : &it->second;
}

const SenseEntry* SenseInventory::find_sense(std::string_view sense_id) const {
  auto owner = sense_owner_.find(sense_id);
  if (owner == sense_owner_.end()) return nullptr;
  const auto& entry = headwords_.at(owner->second);
  for (const auto& s : entry.senses) {
    if (s.sense_id == sense_id) return &s;
  }
  return nullptr;
}

std::string SenseInventory::owner_of(std::string_view sense_id) const {
  auto owner = sense_owner_.find(sense_id);
  return owner == sense_owner_.end() ? std::string{} : owner->second;
}

void SenseInventory::add(HeadwordEntry entry) {
  if (entry.headword.empty()) throw ParseError("", "empty headword");
  if (entry.senses.empty()) throw ParseError(entry.headword, "headword without senses: " + entry.headword);
  if (headwords_.contains(entry.headword)) {
    throw MergeError(entry.headword, "duplicate headword: " + entry.headword);
  }
  for (const auto& s : entry.senses) {
    if (sense_owner_.contains(s.sense_id)) {
      throw ParseError(entry.headword, "duplicate sense id " + s.sense_id + " under " + entry.headword);
    }
  }
  for (const auto& s : entry.senses) sense_owner_.emplace(s.sense_id, entry.headword);
  std::string key = entry.headword;
  headwords_.emplace(std::move(key), std::move(entry));
}

std::string make_sense_id(std::string_view headword, std::size_t ordinal, std::string_view gloss) {
  std::string key;
  key.reserve(headword.size() + gloss.size() + 16);
  key.append(headword);
  key.push_back('\x1f');
  key.append(std::to_string(ordinal));
  key.push_back('\x1f');
  key.append(gloss);
  return "s" + text::hex64(text::fnv1a(key));
}

namespace {

// Accepts a JSON array, a single object, or JSON lines.
std::vector<json> read_records(std::string_view raw) {
  std::vector<json> records;
  const auto first = raw.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return records;
  try {
    json doc = json::parse(raw);
    if (doc.is_array()) {
      for (auto& r : doc) records.push_back(std::move(r));
      return records;
    }
    if (doc.is_object()) {
      records.push_back(std::move(doc));
      return records;
    }
    throw ParseError("", "dump must be a JSON array or object records");
  } catch (const json::parse_error&) {
    // Fall through to JSON lines.
  }
  std::istringstream in{std::string(raw)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError("", "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

std::optional<std::string> opt_string(const json& obj, const char* key, const std::string& hw) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(hw, std::string("field '") + key + "' of " + hw + " is not a string");
  std::string v = it->get<std::string>();
  if (v.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& hw) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(hw, std::string("field '") + key + "' of " + hw + " is not a list");
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(hw, std::string("non-string in '") + key + "' of " + hw);
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string headword_of(const json& rec, const char* key, std::size_t index) {
  if (rec.is_object()) {
    auto it = rec.find(key);
    if (it != rec.end() && it->is_string() && !it->get<std::string>().empty()) {
      return it->get<std::string>();
    }
  }
  throw ParseError("#" + std::to_string(index),
                   "record #" + std::to_string(index) + " has no '" + key + "' field");
}

void assign_ids(HeadwordEntry& entry) {
  for (std::size_t i = 0; i < entry.senses.size(); ++i) {
    auto& s = entry.senses[i];
    s.sense_id = make_sense_id(entry.headword, i, s.effective_gloss().value_or(""));
  }
}

}  // namespace

ParseResult parse_wordnet_dump(std::string_view raw) {
  ParseResult result{SenseInventory(Source::wordnet_like), {}};
  const auto records = read_records(raw);
  for (std::size_t idx = 0; idx < records.size(); ++idx) {
    const json& rec = records[idx];
    const std::string hw = headword_of(rec, "headword", idx);
    auto entries = rec.find("entries");
    if (entries == rec.end() || !entries->is_array()) {
      throw ParseError(hw, "headword '" + hw + "' has no entries list");
    }
    HeadwordEntry entry{hw, {}, {}};
    for (const auto& e : *entries) {
      if (!e.is_object()) throw ParseError(hw, "malformed entry under '" + hw + "'");
      SenseEntry s;
      s.gloss = opt_string(e, "gloss", hw);
      s.pos = opt_string(e, "pos", hw);
      s.examples = string_list(e, "examples", hw);
      s.synset_id = opt_string(e, "synset", hw);
      s.synonyms = string_list(e, "synonyms", hw);
      if (auto p = e.find("primary"); p != e.end() && !p->is_null()) {
        if (!p->is_boolean()) throw ParseError(hw, "field 'primary' of " + hw + " is not a boolean");
        s.is_primary = p->get<bool>();
      }
      entry.senses.push_back(std::move(s));
    }
    if (entry.senses.empty()) {
      result.warnings.push_back("headword '" + hw + "' has no entries; skipped");
      continue;
    }
    assign_ids(entry);
    for (const auto& s : entry.senses) entry.frequency_order.push_back(s.sense_id);
    result.inventory.add(std::move(entry));
  }
  return result;
}

namespace {

SubEntry read_sub_entry(const json& d, const std::string& hw) {
  if (!d.is_object()) throw ParseError(hw, "malformed sub entry under '" + hw + "'");
  SubEntry sub;
  sub.gloss = opt_string(d, "gloss", hw);
  sub.secondary_gloss = opt_string(d, "sub_gloss", hw);
  sub.examples = string_list(d, "examples", hw);
  sub.year = opt_string(d, "year", hw);
  return sub;
}

}  // namespace

ParseResult parse_so_dump(std::string_view raw, const SoParseOptions& options) {
  ParseResult result{SenseInventory(Source::so_like), {}};
  const auto records = read_records(raw);
  for (std::size_t idx = 0; idx < records.size(); ++idx) {
    const json& rec = records[idx];
    const std::string hw = headword_of(rec, "word", idx);
    auto defs = rec.find("definitions");
    if (defs != rec.end() && !defs->is_null() && !defs->is_array()) {
      throw ParseError(hw, "definitions of '" + hw + "' is not a list");
    }
    const std::optional<std::string> nature = opt_string(rec, "nature", hw);
    HeadwordEntry entry{hw, {}, {}};
    if (defs != rec.end() && defs->is_array()) {
      for (const auto& d : *defs) {
        SubEntry main = read_sub_entry(d, hw);
        SenseEntry s;
        s.gloss = main.gloss;
        s.secondary_gloss = main.secondary_gloss;
        s.examples = main.examples;
        s.year = main.year;
        s.pos = nature;
        if (auto subs = d.find("sub_entries"); subs != d.end() && !subs->is_null()) {
          if (!subs->is_array()) throw ParseError(hw, "sub_entries of '" + hw + "' is not a list");
          for (const auto& sd : *subs) s.sub_entries.push_back(read_sub_entry(sd, hw));
        }
        std::vector<SubEntry> promoted;
        if (options.include_sub_entries) promoted = s.sub_entries;
        entry.senses.push_back(std::move(s));
        for (auto& sub : promoted) {
          SenseEntry extra;
          extra.gloss = std::move(sub.gloss);
          extra.secondary_gloss = std::move(sub.secondary_gloss);
          extra.examples = std::move(sub.examples);
          extra.year = std::move(sub.year);
          extra.pos = nature;
          entry.senses.push_back(std::move(extra));
        }
      }
    }
    if (entry.senses.empty()) {
      result.warnings.push_back("headword '" + hw + "' has no definitions; skipped");
      continue;
    }
    assign_ids(entry);
    result.inventory.add(std::move(entry));
  }
  return result;
}

namespace {

json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

json sub_to_json(const SubEntry& s) {
  return json{{"gloss", opt_json(s.gloss)},
              {"secondary_gloss", opt_json(s.secondary_gloss)},
              {"examples", s.examples},
              {"year", opt_json(s.year)}};
}

}  // namespace

std::string serialize(const SenseInventory& inv) {
  std::string out;
  for (const auto& [hw, entry] : inv.headwords()) {
    json senses = json::array();
    for (const auto& s : entry.senses) {
      json subs = json::array();
      for (const auto& sub : s.sub_entries) subs.push_back(sub_to_json(sub));
      senses.push_back(json{{"id", s.sense_id},
                            {"gloss", opt_json(s.gloss)},
                            {"secondary_gloss", opt_json(s.secondary_gloss)},
                            {"examples", s.examples},
                            {"pos", opt_json(s.pos)},
                            {"primary", s.is_primary},
                            {"year", opt_json(s.year)},
                            {"synset", opt_json(s.synset_id)},
                            {"synonyms", s.synonyms},
                            {"sub_entries", std::move(subs)}});
    }
    json line{{"headword", hw},
              {"source", to_string(inv.source())},
              {"senses", std::move(senses)},
              {"frequency_order", entry.frequency_order}};
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

SenseInventory parse_canonical(std::string_view lines) {
  std::optional<Source> source;
  std::vector<HeadwordEntry> entries;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("", "inventory line " + std::to_string(lineno) + ": " + e.what());
    }
    const std::string hw = headword_of(rec, "headword", lineno);
    const Source src = source_from_string(rec.value("source", "wordnet_like"));
    if (source && *source != src) throw ParseError(hw, "mixed inventory sources at '" + hw + "'");
    source = src;
    HeadwordEntry entry{hw, {}, string_list(rec, "frequency_order", hw)};
    auto senses = rec.find("senses");
    if (senses == rec.end() || !senses->is_array()) throw ParseError(hw, "no senses for '" + hw + "'");
    for (const auto& j : *senses) {
      SenseEntry s;
      auto id = opt_string(j, "id", hw);
      if (!id) throw ParseError(hw, "sense without id under '" + hw + "'");
      s.sense_id = *id;
      s.gloss = opt_string(j, "gloss", hw);
      s.secondary_gloss = opt_string(j, "secondary_gloss", hw);
      s.examples = string_list(j, "examples", hw);
      s.pos = opt_string(j, "pos", hw);
      s.is_primary = j.value("primary", true);
      s.year = opt_string(j, "year", hw);
      s.synset_id = opt_string(j, "synset", hw);
      s.synonyms = string_list(j, "synonyms", hw);
      if (auto subs = j.find("sub_entries"); subs != j.end() && subs->is_array()) {
        for (const auto& sd : *subs) s.sub_entries.push_back(read_sub_entry(sd, hw));
      }
      entry.senses.push_back(std::move(s));
    }
    entries.push_back(std::move(entry));
  }
  SenseInventory inv(source.value_or(Source::wordnet_like));
  for (auto& e : entries) inv.add(std::move(e));
  return inv;
}

StatsReport inventory_stats(const SenseInventory& inv) {
  StatsReport r;
  r.headwords = inv.size();
  std::size_t multi_headwords = 0, multi_senses = 0;
  std::size_t glossed = 0, gloss_chars = 0;
  std::size_t exemplified = 0, examples = 0, example_chars = 0;
  for (const auto& [hw, entry] : inv.headwords()) {
    r.senses += entry.senses.size();
    if (entry.senses.size() > 1) {
      ++multi_headwords;
      multi_senses += entry.senses.size();
    }
    for (const auto& s : entry.senses) {
      if (auto g = s.effective_gloss()) {
        ++glossed;
        gloss_chars += text::length(*g);
      }
      if (s.has_examples()) ++exemplified;
      examples += s.examples.size();
      for (const auto& e : s.examples) example_chars += text::length(e);
    }
  }
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  // 100 * num is exact, so this rounds once.
  auto pct = [&](std::size_t num, std::size_t den) { return ratio(100 * num, den); };
  r.avg_senses_per_headword = ratio(r.senses, r.headwords);
  r.avg_senses_per_multi_sense_headword = ratio(multi_senses, multi_headwords);
  r.pct_senses_with_gloss = pct(glossed, r.senses);
  r.avg_gloss_length = ratio(gloss_chars, glossed);
  r.pct_senses_with_examples = pct(exemplified, r.senses);
  r.avg_examples_per_sense = ratio(examples, r.senses);
  r.avg_examples_per_exemplified_sense = ratio(examples, exemplified);
  r.avg_example_length = ratio(example_chars, examples);
  return r;
}

std::string to_json(const StatsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = json::object();
  j["headwords"] = r.headwords;
  j["senses"] = r.senses;
  j["avg_senses_per_headword"] = opt(r.avg_senses_per_headword);
  j["avg_senses_per_headword_multi_sense"] = opt(r.avg_senses_per_multi_sense_headword);
  j["pct_senses_with_gloss"] = opt(r.pct_senses_with_gloss);
  j["avg_gloss_length_chars"] = opt(r.avg_gloss_length);
  j["pct_senses_with_examples"] = opt(r.pct_senses_with_examples);
  j["avg_examples_per_sense"] = opt(r.avg_examples_per_sense);
  j["avg_examples_per_sense_with_examples"] = opt(r.avg_examples_per_exemplified_sense);
  j["avg_example_length_chars"] = opt(r.avg_example_length);
  return j.dump(2) + "\n";
}

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::gloss: return "gloss";
    case Kind::examples: return "examples";
    case Kind::gloss_and_examples: return "gloss_and_examples";
  }
  return "?";
}

std::string_view to_string(Completeness c) {
  switch (c) {
    case Completeness::complete: return "complete";
    case Completeness::partial: return "partial";
    case Completeness::unrepresentable: return "unrepresentable";
  }
  return "?";
}

bool is_complete(const SenseEntry& s, Kind kind) {
  switch (kind) {
    case Kind::gloss: return s.has_gloss();
    case Kind::examples: return s.has_examples();
    case Kind::gloss_and_examples: return s.has_gloss() && s.has_examples();
  }
  return false;
}

const HeadwordCompleteness* CompletenessView::find(std::string_view headword) const {
  auto it = headwords.find(headword);
  return it == headwords.end() ? nullptr : &it->second;
}

bool CompletenessView::is_complete(std::string_view headword, std::string_view sense_id) const {
  const auto* hc = find(headword);
  if (!hc) return false;
  return std::find(hc->complete.begin(), hc->complete.end(), sense_id) != hc->complete.end();
}

std::size_t CompletenessView::count(Completeness c) const {
  return static_cast<std::size_t>(std::count_if(
      headwords.begin(), headwords.end(), [c](const auto& kv) { return kv.second.status == c; }));
}

CompletenessView complete_senses(const SenseInventory& inv, Kind kind, bool primary_only) {
  CompletenessView view;
  view.kind = kind;
  view.primary_only = primary_only;
  for (const auto& [hw, entry] : inv.headwords()) {
    HeadwordCompleteness hc;
    for (const auto& s : entry.senses) {
      if (primary_only && !s.is_primary) continue;
      ++hc.considered;
      if (is_complete(s, kind)) hc.complete.push_back(s.sense_id);
    }
    if (hc.complete.empty()) {
      hc.status = Completeness::unrepresentable;
    } else if (hc.complete.size() == hc.considered) {
      hc.status = Completeness::complete;
    } else {
      hc.status = Completeness::partial;
    }
    view.headwords.emplace(hw, std::move(hc));
  }
  return view;
}

}  // namespace usd::inventory
