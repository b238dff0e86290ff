#include <doctest.h>

#include <random>

#include "support.hpp"
#include "usd/evaluation.hpp"

using namespace usd;
using namespace usd::eval;

namespace {

// Two headwords, h (senses A B C) and k (senses D E), in frequency order.
struct HandFixture {
  inventory::SenseInventory inv;
  std::string A, B, C, D, E;
  GoldAssignment gold;
  SimTable table;
  MaskingPlan plan;
  std::vector<std::string> ids;
  std::vector<std::size_t> folds;

  HandFixture() {
    inv = inventory::parse_wordnet_dump(R"([
      {"headword":"h","entries":[{"gloss":"a","examples":["x"]},{"gloss":"b","examples":["x"]},{"gloss":"c","examples":["x"]}]},
      {"headword":"k","entries":[{"gloss":"d","examples":["x"]},{"gloss":"e","examples":["x"]}]}])")
              .inventory;
    const auto& hs = inv.find("h")->senses;
    const auto& ks = inv.find("k")->senses;
    A = hs[0].sense_id, B = hs[1].sense_id, C = hs[2].sense_id;
    D = ks[0].sense_id, E = ks[1].sense_id;
    gold = {{"u1", "h", {A}}, {"u2", "h", {B}}, {"u3", "h", {}},  {"u4", "h", {A, C}},
            {"u5", "k", {D}}, {"u6", "k", {E}}, {"u7", "k", {E}}, {"u8", "k", {D}}};
    table["u1"] = {{A, .9}, {B, .2}, {C, .1}};
    table["u2"] = {{A, .3}, {B, .8}, {C, .1}};
    table["u3"] = {{A, .2}, {B, .1}, {C, .5}};
    table["u4"] = {{A, .7}, {B, .1}, {C, .95}};
    table["u5"] = {{D, .9}, {E, .4}};
    table["u6"] = {{D, .1}, {E, .6}};
    table["u7"] = {{D, .2}, {E, .35}};
    table["u8"] = {{D, .8}, {E, .5}};
    plan.headwords["h"] = {{A}, {B, C}};
    plan.headwords["k"] = {{E}, {D}};
    ids = {"u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8"};
    folds = {0, 1, 0, 1, 0, 1, 0, 1};
  }
};

}  // namespace

TEST_CASE("f beta") {
  CHECK(f_beta(1.0, 1.0, 0.3) == doctest::Approx(1.0));
  CHECK(f_beta(0.0, 0.0, 0.3) == 0.0);
  CHECK(f_beta(0.5, 0.5, 1.0) == doctest::Approx(0.5));
  // Small beta approaches precision.
  CHECK(f_beta(0.8, 0.1, 0.01) == doctest::Approx(0.8).epsilon(0.01));
  CHECK_THROWS(f_beta(0.5, 0.5, 0.0));
  CHECK_THROWS(f_beta(1.5, 0.5, 0.3));
}

TEST_CASE("metrics with undefined precision or recall") {
  const auto none_predicted = metrics({0, 0, 3, 5}, 0.3);
  CHECK_FALSE(none_predicted.precision.has_value());
  CHECK(none_predicted.recall == 0.0);
  CHECK(none_predicted.f_beta == 0.0);
  const auto no_positives = metrics({0, 2, 0, 5}, 0.3);
  CHECK(no_positives.precision == 0.0);
  CHECK_FALSE(no_positives.recall.has_value());
}

TEST_CASE("threshold grid") {
  const auto g = threshold_grid();
  REQUIRE(g.size() == 101);
  CHECK(g[0] == 0.0);
  CHECK(g[37] == 0.37);
  CHECK(g[100] == 1.0);
}

TEST_CASE("sweep picks the smallest of tied thresholds") {
  const std::vector<double> sims{0.2, 0.8};
  const std::vector<std::uint8_t> labels{1, 0};
  const auto r = threshold_sweep(sims, labels, EvalConfig{});
  CHECK(r.best_threshold == 0.21);
  CHECK(r.best.f_beta == doctest::Approx(1.0));
  CHECK(r.curve.size() == 101);
  CHECK_THROWS_AS(threshold_sweep({}, {}, EvalConfig{}), EvalError);
}

TEST_CASE("hand computed round") {
  const HandFixture fx;
  EvalConfig cfg;
  cfg.folds = 2;
  const auto labels = derive_labels(fx.gold, fx.plan);
  CHECK(labels.at("u1") == 0);
  CHECK(labels.at("u2") == 1);
  CHECK(labels.at("u3") == 1);
  CHECK(labels.at("u4") == 0);
  CHECK(labels.at("u5") == 1);
  CHECK(labels.at("u6") == 0);
  CHECK(labels.at("u7") == 0);
  CHECK(labels.at("u8") == 1);
  CHECK(masked_nearest(fx.table, "u4", "h", fx.plan) == 0.7);

  const auto r = evaluate_round(fx.table, fx.gold, fx.inv, fx.plan, fx.ids, fx.folds, cfg, 0);
  REQUIRE(r.folds.size() == 2);
  CHECK(r.folds[0].threshold == 0.51);
  CHECK(r.folds[0].train.f_beta == doctest::Approx(1.0));
  CHECK(r.folds[0].test.confusion.tp == 2);
  CHECK(r.folds[0].test.confusion.fp == 1);
  CHECK(r.folds[0].test.f_beta == doctest::Approx(1.09 * (2.0 / 3.0) / (0.09 * (2.0 / 3.0) + 1.0)));
  CHECK(r.folds[1].threshold == 0.21);
  CHECK(r.folds[1].train.f_beta == doctest::Approx(1.09 * 0.5 / (0.09 + 0.5)));
  CHECK(r.folds[1].test.f_beta == 0.0);
  CHECK_FALSE(r.folds[1].test.precision.has_value());
  CHECK(r.average.threshold == doctest::Approx(0.36));
  CHECK(r.average.test_f == doctest::Approx(0.5 * 1.09 * (2.0 / 3.0) / 1.06));
  CHECK(r.average.test_precision == doctest::Approx(2.0 / 3.0));
  REQUIRE(r.folds[0].frequency_test_f);
  CHECK(*r.folds[0].frequency_test_f == doctest::Approx(0.5));
}

TEST_CASE("frequency baseline ignores masking") {
  const HandFixture fx;
  const auto f = frequency_baseline(fx.gold, fx.inv, fx.plan);
  REQUIRE(f);
  CHECK(f->at("u1") == 0);
  CHECK(f->at("u2") == 1);
  CHECK(f->at("u5") == 0);
  CHECK(f->at("u6") == 1);
  const auto so = inventory::parse_so_dump(R"({"word":"h","definitions":[{"gloss":"a"}]})").inventory;
  const GoldAssignment g{{"u", "h", {}}};
  MaskingPlan p;
  p.headwords["h"] = {{so.find("h")->senses[0].sense_id}, {}};
  CHECK_FALSE(frequency_baseline(g, so, p).has_value());
}

TEST_CASE("masking plans") {
  const HandFixture fx;
  const auto view = inventory::complete_senses(fx.inv, inventory::Kind::gloss);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto plan = build_masking_plan(fx.gold, view, seed);
    CHECK(plan == build_masking_plan(fx.gold, view, seed));
    CHECK(plan.headwords.at("h").unmasked.size() == 1);
    CHECK(plan.headwords.at("h").masked.size() == 2);
    CHECK(plan.headwords.at("k").unmasked.size() == 1);
  }
  const auto id = identity_plan(fx.gold, view);
  CHECK(id.headwords.at("h").unmasked.size() == 3);
  for (const auto& [_, l] : derive_labels(fx.gold, id)) (void)l;
  CHECK(derive_labels(fx.gold, id).at("u3") == 1);
  CHECK(derive_labels(fx.gold, id).at("u2") == 0);
}

TEST_CASE("headwords without complete senses are excluded") {
  const auto inv = inventory::parse_wordnet_dump(R"([{"headword":"z","entries":[{"gloss":"g"}]}])").inventory;
  const auto view = inventory::complete_senses(inv, inventory::Kind::examples);
  const GoldAssignment gold{{"u", "z", {}}};
  const auto plan = build_masking_plan(gold, view, 1);
  CHECK(plan.excluded_headwords == std::vector<std::string>{"z"});
  CHECK(derive_labels(gold, plan).empty());
}

TEST_CASE("fold assignment") {
  Rng rng(3);
  const auto f = assign_folds(23, 5, rng);
  std::vector<int> sizes(5);
  for (auto k : f) ++sizes[k];
  for (int s : sizes) CHECK((s == 4 || s == 5));
  Rng rng2(3);
  const std::vector<std::string> groups{"a", "a", "b", "c", "b", "d"};
  const auto g = assign_folds(6, 2, rng2, groups);
  CHECK(g[0] == g[1]);
  CHECK(g[2] == g[4]);
}

TEST_CASE("random baseline rate") {
  Rng rng(9);
  const auto pred = random_baseline(0.7, 20000, rng);
  const auto zeros = std::count(pred.begin(), pred.end(), std::uint8_t{0});
  CHECK(zeros / 20000.0 == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("mean and population std") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto m = mean_std(v);
  CHECK(m.mean == 2.5);
  CHECK(m.stddev == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("gold records") {
  const HandFixture fx;
  CHECK(gold_from_jsonl(gold_to_jsonl(fx.gold)) == fx.gold);
  CHECK_NOTHROW(validate_gold(fx.gold, fx.inv));
  GoldAssignment bad = fx.gold;
  bad[0].senses.insert(fx.D);
  CHECK_THROWS_AS(validate_gold(bad, fx.inv), EvalError);
  GoldAssignment dup = fx.gold;
  dup.push_back(fx.gold[0]);
  CHECK_THROWS_AS(validate_gold(dup, fx.inv), EvalError);
}

TEST_CASE("cross validation on the hand fixture") {
  const HandFixture fx;
  const auto view = inventory::complete_senses(fx.inv, inventory::Kind::gloss);
  EvalConfig cfg;
  cfg.rounds = 4;
  cfg.folds = 2;
  cfg.seed = 11;
  const auto a = run_cross_validation(fx.table, fx.gold, fx.inv, view, cfg, "X");
  const auto b = run_cross_validation(fx.table, fx.gold, fx.inv, view, cfg, "X");
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(a.rounds.size() == 4);
  CHECK(a.frequency_test_f.has_value());
  const auto table = render_round_table(a.rounds[0], cfg.beta);
  CHECK(table.find("Threshold") != std::string::npos);
  CHECK(table.find("frequency_F") != std::string::npos);
  CHECK(render_curves(a.rounds[0]).rfind("round,fold,threshold,precision,recall,f_beta\n1,1,0.00,", 0) == 0);

  cfg.folds = 9;
  CHECK_THROWS_AS(run_cross_validation(fx.table, fx.gold, fx.inv, view, cfg, "X"), EvalError);
}

TEST_CASE("model grid layout") {
  std::map<std::string, MetricsReport> reports;
  reports["G3_COS"].test_f = {0.625, 0.01};
  reports["G3_SUB_SPR"].test_f = {0.5, 0.02};
  const auto grid = render_grid(reports);
  CHECK(grid.find("G3") != std::string::npos);
  CHECK(grid.find("0.625") != std::string::npos);
  CHECK(grid.find("E0") == std::string::npos);
}
