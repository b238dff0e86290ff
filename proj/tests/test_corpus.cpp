#include <doctest.h>

#include <set>

#include "support.hpp"
#include "usd/corpus.hpp"

using namespace usd;
using namespace usd::corpus;

namespace {

inventory::SenseInventory tiny_inventory() {
  return inventory::parse_wordnet_dump(R"([
    {"headword":"bank","entries":[{"gloss":"a financial institution"}]},
    {"headword":"run","entries":[{"gloss":"move fast"}]},
    {"headword":"look_up","entries":[{"gloss":"seek information"}]},
    {"headword":"look","entries":[{"gloss":"perceive with the eyes"}]}])")
      .inventory;
}

}  // namespace

TEST_CASE("tokenize splits words and single punctuation marks") {
  const auto t = tokenize("Hon fick svindel, uppe i tornet!");
  REQUIRE(t.size() == 8);
  CHECK(t[2].form == "svindel");
  CHECK(t[3].punctuation);
  CHECK(t[3].span == text::Span{16, 17});
  CHECK(t.back().form == "!");
}

TEST_CASE("sentence filter") {
  CHECK(filter_sentence("A plain sentence.").keep);
  const auto longer = filter_sentence(std::string(301, 'a'));
  CHECK_FALSE(longer.keep);
  CHECK(longer.reason == FilterReason::length);
  CHECK(filter_sentence(std::string(300, 'a')).keep);
  const auto punct = filter_sentence("a ; b ; c ;");
  CHECK(punct.punctuation_share == doctest::Approx(0.5));
  CHECK(punct.reason == FilterReason::punctuation);
  // Exactly at the limit is kept.
  CHECK(filter_sentence("a b c ,").keep);
}

TEST_CASE("lemma table") {
  const auto lem = TableLemmatizer::from_tsv("# comment\nbanks\tbank\nRan\trun\n");
  CHECK(lem.size() == 2);
  CHECK(lem.lemma({"Banks", {0, 5}, false}) == "bank");
  CHECK(lem.lemma({"ran", {0, 3}, false}) == "run");
  CHECK(lem.lemma({"Tower", {0, 5}, false}) == "tower");
  CHECK_THROWS_AS(TableLemmatizer::from_tsv("no tab here"), LemmatizerError);
  CHECK_THROWS_AS(lem.tokenize("bad \xff utf8"), LemmatizerError);
}

TEST_CASE("find usages through lemmas and multi word headwords") {
  const auto inv = tiny_inventory();
  const auto lem = TableLemmatizer::from_tsv("banks\tbank\nran\trun\nlooked\tlook\n");
  const std::vector<std::string> sentences{
      "The banks ran out of money.",
      "She looked up the word.",
      std::string(400, 'x') + " bank",
      "Nothing to see here.",
  };
  FindOptions opts;
  opts.corpus_tag = CorpusTag::historical;
  opts.id_prefix = "h";
  const auto r = find_usages(sentences, inv, lem, opts);
  CHECK(r.sentences_dropped == 1);
  std::set<std::string> ids;
  for (const auto& u : r.usages) ids.insert(u.usage_id + "=" + u.headword + "=" + u.target_text());
  CHECK(ids == std::set<std::string>{"h:0:1=bank=banks", "h:0:2=run=ran", "h:1:1:look=look=looked",
                                     "h:1:1:look_up=look_up=looked up"});
  for (const auto& u : r.usages) CHECK(u.corpus_tag == CorpusTag::historical);
}

TEST_CASE("bad sentences are skipped with a warning") {
  const auto inv = tiny_inventory();
  const TableLemmatizer lem;
  const std::vector<std::string> sentences{"bank \xff", "a bank"};
  FindOptions opts;
  opts.apply_filter = false;
  const auto r = find_usages(sentences, inv, lem, opts);
  CHECK(r.usages.size() == 1);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("phase one sampling") {
  std::vector<Usage> usages;
  for (int h = 0; h < 6; ++h) {
    for (int k = 0; k < h + 2; ++k) {
      Usage u;
      u.usage_id = "u" + std::to_string(h) + "_" + std::to_string(k);
      u.headword = "w" + std::to_string(h);
      usages.push_back(u);
    }
  }
  std::vector<std::string> headwords;
  for (int h = 0; h < 10; ++h) headwords.push_back("w" + std::to_string(h));
  SampleConfig cfg{10, 4, 3};
  const auto a = sample_random_phase1(usages, headwords, 5, cfg);
  const auto b = sample_random_phase1(usages, headwords, 5, cfg);
  CHECK(a.usages == b.usages);
  CHECK(a.headwords_found == 4);
  CHECK_FALSE(a.shortfall);
  CHECK(a.headwords_searched >= 4);
  std::map<std::string, int> per;
  for (const auto& u : a.usages) ++per[u.headword];
  for (const auto& [hw, n] : per) CHECK(n <= 3);

  const auto all = sample_random_phase1(usages, headwords, 5, SampleConfig{10, 8, 100});
  CHECK(all.shortfall);
  CHECK(all.usages.size() == usages.size());
}

TEST_CASE("usage records round trip") {
  const auto usages = usages_from_jsonl(support::slurp(support::data("cv60.usages.jsonl")));
  REQUIRE(usages.size() == 60);
  CHECK(usages.front().target_text() == "bank");
  CHECK(usages_from_jsonl(to_jsonl(usages)) == usages);
}

TEST_CASE("read sentences cleans control characters") {
  const auto s = read_sentences("one\ttwo\nthree\x01\n");
  CHECK(s == std::vector<std::string>{"one two", "three"});
}
