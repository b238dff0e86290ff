#include "usd/corpus.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "usd/random.hpp"

namespace usd::corpus {

using nlohmann::json;

std::string_view to_string(CorpusTag t) { return t == CorpusTag::modern ? "modern" : "historical"; }

CorpusTag corpus_tag_from_string(std::string_view s) {
  if (s == "modern") return CorpusTag::modern;
  if (s == "historical" || s == "historic") return CorpusTag::historical;
  throw std::invalid_argument("unknown corpus tag: " + std::string(s));
}

std::vector<Token> tokenize(std::string_view sentence) {
  const auto cps = text::decode(sentence);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (text::is_space(cps[i])) {
      ++i;
      continue;
    }
    if (text::is_word_char(cps[i])) {
      std::size_t j = i;
      while (j < cps.size() && text::is_word_char(cps[j])) ++j;
      tokens.push_back({text::encode({cps.begin() + i, cps.begin() + j}), {i, j}, false});
      i = j;
    } else {
      tokens.push_back({text::encode({cps[i]}), {i, i + 1}, true});
      ++i;
    }
  }
  return tokens;
}

std::vector<Token> Lemmatizer::tokenize(std::string_view sentence) const {
  return corpus::tokenize(sentence);
}

TableLemmatizer::TableLemmatizer(std::unordered_map<std::string, std::string> table) {
  for (auto& [form, lemma] : table) table_.emplace(text::lower(form), text::lower(lemma));
}

TableLemmatizer TableLemmatizer::from_tsv(std::string_view tsv) {
  std::unordered_map<std::string, std::string> table;
  std::istringstream in{std::string(tsv)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw LemmatizerError("lemma table line without tab: " + line);
    table.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return TableLemmatizer(std::move(table));
}

std::vector<Token> TableLemmatizer::tokenize(std::string_view sentence) const {
  if (!text::valid_utf8(sentence)) throw LemmatizerError("invalid UTF-8 in sentence");
  return corpus::tokenize(sentence);
}

std::string TableLemmatizer::lemma(const Token& token) const {
  std::string form = text::lower(token.form);
  auto it = table_.find(form);
  return it == table_.end() ? form : it->second;
}

std::string_view to_string(FilterReason r) {
  switch (r) {
    case FilterReason::none: return "none";
    case FilterReason::length: return "length";
    case FilterReason::punctuation: return "punctuation";
  }
  return "?";
}

FilterDecision filter_sentence(std::string_view sentence, const FilterLimits& limits) {
  FilterDecision d;
  d.chars = text::length(sentence);
  const auto tokens = tokenize(sentence);
  if (!tokens.empty()) {
    const auto punct = std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.punctuation; });
    d.punctuation_share = static_cast<double>(punct) / static_cast<double>(tokens.size());
  }
  if (d.chars > limits.max_chars) {
    d.keep = false;
    d.reason = FilterReason::length;
  } else if (d.punctuation_share > limits.max_punctuation_share) {
    d.keep = false;
    d.reason = FilterReason::punctuation;
  }
  return d;
}

namespace {

struct HeadwordPattern {
  std::string headword;
  std::vector<std::string> lemmas;
};

// Index from first lemma to the headwords starting with it.
std::unordered_map<std::string, std::vector<HeadwordPattern>> build_index(
    const inventory::SenseInventory& inv, const Lemmatizer& lemmatizer) {
  std::unordered_map<std::string, std::vector<HeadwordPattern>> index;
  for (const auto& [hw, entry] : inv.headwords()) {
    std::string spaced = hw;
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    HeadwordPattern p{hw, {}};
    for (const auto& t : corpus::tokenize(spaced)) p.lemmas.push_back(text::lower(t.form));
    if (p.lemmas.empty()) continue;
    // Single-word headwords are matched on their lemma, so inflected
    // dictionary forms still line up with lemmatized text.
    if (p.lemmas.size() == 1) {
      Token t{p.lemmas.front(), {0, text::length(p.lemmas.front())}, false};
      p.lemmas.front() = lemmatizer.lemma(t);
    }
    index[p.lemmas.front()].push_back(std::move(p));
  }
  return index;
}

}  // namespace

FindResult find_usages(std::span<const std::string> sentences, const inventory::SenseInventory& inv,
                       const Lemmatizer& lemmatizer, const FindOptions& options) {
  const auto index = build_index(inv, lemmatizer);
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  std::vector<std::vector<Usage>> per_sentence(sentences.size());
  std::vector<std::string> warnings(sentences.size());
  std::vector<char> dropped(sentences.size(), 0);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t si = 0; si < n; ++si) {
    const std::string& sentence = sentences[si];
    if (options.apply_filter && !filter_sentence(sentence, options.limits).keep) {
      dropped[si] = 1;
      continue;
    }
    std::vector<Token> tokens;
    std::vector<std::string> lemmas;
    try {
      tokens = lemmatizer.tokenize(sentence);
      lemmas.reserve(tokens.size());
      for (const auto& t : tokens) lemmas.push_back(lemmatizer.lemma(t));
    } catch (const std::exception& e) {
      warnings[si] = "sentence " + std::to_string(si) + " skipped: " + e.what();
      continue;
    }
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
      if (tokens[ti].punctuation) continue;
      auto it = index.find(lemmas[ti]);
      if (it == index.end()) continue;
      std::vector<Usage> here;
      for (const auto& p : it->second) {
        if (ti + p.lemmas.size() > tokens.size()) continue;
        bool match = true;
        for (std::size_t k = 1; k < p.lemmas.size() && match; ++k) {
          match = lemmas[ti + k] == p.lemmas[k];
        }
        if (!match) continue;
        Usage u;
        u.sentence = sentence;
        u.target = {tokens[ti].span.start, tokens[ti + p.lemmas.size() - 1].span.end};
        u.token_index = ti;
        u.headword = p.headword;
        u.corpus_tag = options.corpus_tag;
        u.language = options.language;
        here.push_back(std::move(u));
      }
      const std::string base = options.id_prefix + ":" + std::to_string(si) + ":" + std::to_string(ti);
      for (auto& u : here) {
        u.usage_id = here.size() == 1 ? base : base + ":" + u.headword;
        per_sentence[si].push_back(std::move(u));
      }
    }
  }

  FindResult result;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    result.sentences_dropped += dropped[si];
    if (!warnings[si].empty()) result.warnings.push_back(std::move(warnings[si]));
    for (auto& u : per_sentence[si]) result.usages.push_back(std::move(u));
  }
  return result;
}

SampleResult sample_random_phase1(std::span<const Usage> usages, std::span<const std::string> headwords,
                                  std::uint64_t seed, const SampleConfig& config) {
  std::map<std::string, std::vector<const Usage*>> by_headword;
  for (const auto& u : usages) by_headword[u.headword].push_back(&u);
  for (auto& [hw, list] : by_headword) {
    std::sort(list.begin(), list.end(),
              [](const Usage* a, const Usage* b) { return a->usage_id < b->usage_id; });
  }

  std::vector<std::string> pool(headwords.begin(), headwords.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  Rng rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  if (pool.size() > config.headword_pool) pool.resize(config.headword_pool);

  SampleResult result;
  for (const auto& hw : pool) {
    if (result.headwords_found >= config.stop_at_headwords_with_usage) break;
    ++result.headwords_searched;
    auto it = by_headword.find(hw);
    if (it == by_headword.end() || it->second.empty()) continue;
    std::vector<const Usage*> chosen = it->second;
    if (chosen.size() > config.max_usages_per_headword) {
      std::shuffle(chosen.begin(), chosen.end(), rng);
      chosen.resize(config.max_usages_per_headword);
      std::sort(chosen.begin(), chosen.end(),
                [](const Usage* a, const Usage* b) { return a->usage_id < b->usage_id; });
    }
    for (const Usage* u : chosen) result.usages.push_back(*u);
    ++result.headwords_found;
  }
  result.shortfall = result.headwords_found < config.stop_at_headwords_with_usage;
  return result;
}

std::vector<std::string> read_sentences(std::string_view raw) {
  std::vector<std::string> out;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) out.push_back(text::clean(line));
  return out;
}

std::string to_jsonl(std::span<const Usage> usages) {
  std::string out;
  for (const auto& u : usages) {
    json j{{"usage_id", u.usage_id},   {"sentence", u.sentence},
           {"start", u.target.start},  {"end", u.target.end},
           {"token_index", u.token_index}, {"headword", u.headword},
           {"corpus_tag", to_string(u.corpus_tag)}, {"language", u.language}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<Usage> usages_from_jsonl(std::string_view lines) {
  std::vector<Usage> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Usage u;
      u.usage_id = j.at("usage_id").get<std::string>();
      u.sentence = j.at("sentence").get<std::string>();
      u.target = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
      u.token_index = j.value("token_index", std::size_t{0});
      u.headword = j.at("headword").get<std::string>();
      u.corpus_tag = corpus_tag_from_string(j.value("corpus_tag", "modern"));
      u.language = j.value("language", "en");
      if (u.target.start >= u.target.end || u.target.end > text::length(u.sentence)) {
        throw std::invalid_argument("target span out of range");
      }
      out.push_back(std::move(u));
    } catch (const std::exception& e) {
      throw std::runtime_error("usage line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace usd::corpus
