// Acceptance checks, one PASS/FAIL line per criterion.
//
//   usd_acceptance               run everything
//   usd_acceptance --only NAME   run one criterion
//   usd_acceptance --list
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annotation_fixture.hpp"
#include "support.hpp"
#include "usd/annotation.hpp"
#include "usd/detector.hpp"
#include "usd/evaluation.hpp"
#include "usd/inventory.hpp"
#include "usd/pipeline.hpp"
#include "usd/representation.hpp"
#include "usd/similarity.hpp"

using namespace usd;

namespace {

// Tolerances.
constexpr double kTableTol = 0.001;        // reported F values carry three decimals
constexpr double kAlphaHandTol = 1e-9;
constexpr double kAlphaRandomTol = 0.05;
constexpr double kExactScaleTol = 1e-12;   // power-of-two factors scale floats exactly
constexpr double kInvarianceTol = 1e-6;    // other factors round each float input (~6e-8 relative)
constexpr double kSublistTol = 1e-9;       // straight-line reference vs pipeline similarities

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double fb(double p, double r, double beta = 0.3) { return eval::f_beta(p, r, beta); }

// ---- F-beta arithmetic ----------------------------------------------------

Outcome fbeta_published() {
  // Round 10 of E4_COS: Average, Fold 1..5; Training / Test per column.
  const double P[] = {0.842, 0.720, 0.846, 1.000, 0.833, 1.000, 0.735, 0.500, 0.867, 0.600, 0.929, 0.500};
  const double R[] = {0.272, 0.215, 0.234, 0.105, 0.179, 0.400, 0.455, 0.182, 0.260, 0.188, 0.232, 0.200};
  const double F[] = {0.701, 0.573, 0.696, 0.588, 0.640, 0.890, 0.700, 0.437, 0.727, 0.508, 0.744, 0.445};
  const char* cell[] = {"avg/train", "avg/test", "f1/train", "f1/test", "f2/train", "f2/test",
                        "f3/train",  "f3/test",  "f4/train", "f4/test", "f5/train", "f5/test"};
  Outcome o;
  const double a = fb(1.000, 0.105), b = fb(0.720, 0.215);
  const bool named = std::abs(a - 0.588) <= kTableTol && std::abs(b - 0.573) <= kTableTol;
  std::string bad;
  int ok = 0;
  for (int i = 0; i < 12; ++i) {
    if (std::abs(fb(P[i], R[i]) - F[i]) <= kTableTol) ++ok;
    else bad += std::string(bad.empty() ? "" : ", ") + cell[i] + " " + fmt("%.4f", fb(P[i], R[i])) + " vs " +
                fmt("%.3f", F[i]);
  }
  o.pass = named && ok == 12;
  o.detail = "f(1.000,0.105)=" + fmt("%.5f", a) + " f(0.720,0.215)=" + fmt("%.5f", b) + "; " +
             std::to_string(ok) + "/12 cells within " + fmt("%.3f", kTableTol) + (bad.empty() ? "" : " (off: " + bad + ")");

  // The average column is the mean of the fold values, not F of averaged P/R.
  double mtrain = 0, mtest = 0;
  for (int k = 1; k <= 5; ++k) {
    mtrain += F[2 * k] / 5;
    mtest += F[2 * k + 1] / 5;
  }
  const bool mean_ok = std::abs(mtrain - F[0]) <= kTableTol && std::abs(mtest - F[1]) <= kTableTol;
  o.notes.push_back(std::string(mean_ok ? "[note] ok" : "[note] off") + ": average cells = mean of fold F (" +
                    fmt("%.4f", mtrain) + ", " + fmt("%.4f", mtest) + ")");
  // Reported P/R are rounded; look for unrounded values reproducing each fold F.
  int reproducible = 0;
  for (int i = 2; i < 12; ++i) {
    bool hit = false;
    for (int u = -50; u <= 50 && !hit; ++u)
      for (int v = -50; v <= 50 && !hit; ++v) {
        const double p = std::min(1.0, P[i] + u * 1e-5), r = R[i] + v * 1e-5;
        hit = std::abs(fb(p, r) - F[i]) <= 0.0005;
      }
    reproducible += hit;
  }
  o.notes.push_back(std::string(reproducible == 10 ? "[note] ok" : "[note] off") + ": " +
                    std::to_string(reproducible) + "/10 fold cells reproduced within P/R rounding");
  return o;
}

// ---- threshold sweep --------------------------------------------------------

Outcome threshold_sweep() {
  std::mt19937_64 rng(20240601);
  int match = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 5 + rng() % 400;
    std::vector<double> sims(n);
    std::vector<std::uint8_t> labels(n);
    std::uniform_real_distribution<double> u(-0.2, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      // Some similarities sit exactly on grid points.
      sims[i] = rng() % 4 == 0 ? static_cast<double>(rng() % 101) / 100.0 : u(rng);
      labels[i] = rng() % 3 == 0;
    }
    labels[0] = 1;
    eval::EvalConfig ec;
    const auto got = eval::threshold_sweep(sims, labels, ec);
    const auto want = support::brute_force_sweep(sims, labels, 0.3);
    const auto& c = got.best.confusion;
    match += got.best_threshold == want.threshold && got.best.f_beta == want.score &&
             long(c.tp) == want.counts.tp && long(c.fp) == want.counts.fp && long(c.fn) == want.counts.fn &&
             long(c.tn) == want.counts.tn;
  }
  return {match == trials, std::to_string(match) + "/" + std::to_string(trials) + " trials match brute force", {}};
}

// ---- masking plans --------------------------------------------------------

Outcome masking_plan() {
  std::mt19937_64 rng(77);
  int good = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    inventory::SenseInventory inv;
    eval::GoldAssignment gold;
    const int nh = 1 + rng() % 8;
    for (int h = 0; h < nh; ++h) {
      inventory::HeadwordEntry e;
      e.headword = "h" + std::to_string(h);
      const int ns = 1 + rng() % 5;
      for (int s = 0; s < ns; ++s) {
        inventory::SenseEntry se;
        if (rng() % 4 != 0) se.gloss = "gloss " + std::to_string(t) + "." + std::to_string(h) + "." + std::to_string(s);
        if (rng() % 2) se.examples = {"an example"};
        se.sense_id = inventory::make_sense_id(e.headword, s, se.gloss.value_or(""));
        e.frequency_order.push_back(se.sense_id);
        e.senses.push_back(se);
      }
      gold.push_back({"u" + std::to_string(h), e.headword, {e.senses[0].sense_id}});
      inv.add(e);
    }
    const auto kind = static_cast<inventory::Kind>(rng() % 3);
    const auto view = inventory::complete_senses(inv, kind);
    const auto plan = eval::build_masking_plan(gold, view, rng());
    bool ok = true;
    for (const auto& [hw, entry] : inv.headwords()) {
      std::set<std::string> complete;
      for (const auto& s : entry.senses)
        if (inventory::is_complete(s, kind)) complete.insert(s.sense_id);
      if (complete.empty()) {
        ok &= !plan.covers(hw);
        ok &= std::count(plan.excluded_headwords.begin(), plan.excluded_headwords.end(), hw) == 1;
        continue;
      }
      const auto& hp = plan.headwords.at(hw);
      ok &= hp.unmasked.size() == 1;
      ok &= complete.count(hp.unmasked.front()) == 1;
      std::set<std::string> universe(hp.masked.begin(), hp.masked.end());
      universe.insert(hp.unmasked.begin(), hp.unmasked.end());
      ok &= universe == complete;
      ok &= universe.size() == hp.masked.size() + hp.unmasked.size();
      if (complete.size() == 1) ok &= hp.masked.empty();
      for (const auto& s : entry.senses)
        if (!complete.count(s.sense_id)) ok &= !plan.in_universe(hw, s.sense_id);
    }
    good += ok;
  }
  return {good == trials, std::to_string(good) + "/" + std::to_string(trials) + " random inventories satisfy the plan invariants", {}};
}

// ---- derive_labels --------------------------------------------------------

Outcome derive_labels() {
  std::mt19937_64 rng(31);
  int good = 0, empty_gold = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    eval::MaskingPlan plan;
    eval::GoldAssignment gold;
    const int nh = 1 + rng() % 5;
    for (int h = 0; h < nh; ++h) {
      const std::string hw = "h" + std::to_string(h);
      const int ns = 1 + rng() % 5;
      std::vector<std::string> senses;
      for (int s = 0; s < ns; ++s) senses.push_back(hw + "s" + std::to_string(s));
      std::shuffle(senses.begin(), senses.end(), rng);
      eval::HeadwordPlan hp;
      hp.unmasked = {senses[0]};
      hp.masked.assign(senses.begin() + 1, senses.end());
      plan.headwords[hw] = hp;
      const int nu = 1 + rng() % 4;
      for (int u = 0; u < nu; ++u) {
        std::set<std::string> g;
        for (const auto& s : senses)
          if (rng() % 3 == 0) g.insert(s);
        gold.push_back({hw + ":" + std::to_string(u), hw, g});
      }
    }
    const auto labels = eval::derive_labels(gold, plan);
    bool ok = labels.size() == gold.size();
    for (const auto& g : gold) {
      const auto& hp = plan.headwords.at(g.headword);
      const std::set<std::string> unmasked(hp.unmasked.begin(), hp.unmasked.end());
      const auto want = support::intersection_label(g.senses, unmasked);
      if (g.senses.empty()) {
        ++empty_gold;
        ok &= want == 1;
      }
      ok &= labels.count(g.usage_id) && labels.at(g.usage_id) == want;
    }
    good += ok;
  }
  return {good == trials && empty_gold > 0,
          std::to_string(good) + "/" + std::to_string(trials) + " pairs match the intersection oracle (" +
              std::to_string(empty_gold) + " empty-gold usages)",
          {}};
}

// ---- cross-validation -------------------------------------------------------

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "run.log") continue;
    out[std::filesystem::relative(e.path(), dir).string()] = support::slurp(e.path().string());
  }
  return out;
}

double hand_cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

Outcome cross_validation() {
  Outcome o;
  support::TempDir dir("accept_cv");
  pipeline::RunConfig c;
  c.inventory_path = support::data("cv60.wordnet.json");
  c.inventory_schema = "wordnet";
  c.usages_path = support::data("cv60.usages.jsonl");
  c.gold_path = support::data("cv60.gold.jsonl");
  c.models = {"G0_COS", "G3_SUB_COS", "E0_SPR", "E4_COS"};
  c.eval.rounds = 10;
  c.eval.folds = 5;
  c.provider = "mock:64";
  c.seed = 2023;
  c.out_dir = dir / "run";
  pipeline::cmd_select(c);
  const auto first = snapshot(c.out_dir);
  pipeline::cmd_select(c);
  const auto second = snapshot(c.out_dir);
  const bool deterministic = first == second && first.size() > 10;

  // Straight-line reference for round 0, fold 0 on eight usages.
  const auto inv = pipeline::load_inventory(c);
  auto gold = eval::gold_from_jsonl(support::slurp(c.gold_path));
  gold.resize(8);
  std::vector<corpus::Usage> usages;
  for (const auto& u : corpus::usages_from_jsonl(support::slurp(c.usages_path)))
    for (const auto& g : gold)
      if (g.usage_id == u.usage_id) usages.push_back(u);
  repr::MockProvider mock(64);
  const auto model = repr::ModelConfig::parse("G0_COS");
  const auto view = inventory::complete_senses(inv, inventory::Kind::gloss);

  eval::MaskingPlan plan;  // last complete sense of each headword stays visible
  for (const auto& g : gold) {
    const auto& complete = view.find(g.headword)->complete;
    eval::HeadwordPlan hp;
    hp.unmasked = {complete.back()};
    hp.masked.assign(complete.begin(), complete.end() - 1);
    plan.headwords[g.headword] = hp;
  }
  std::vector<std::string> ids;
  for (const auto& g : gold) ids.push_back(g.usage_id);
  std::sort(ids.begin(), ids.end());
  std::vector<std::size_t> fold_of(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) fold_of[i] = i % 2;

  std::vector<double> sims;
  std::vector<std::uint8_t> labels;
  for (const auto& id : ids) {
    const auto& g = *std::find_if(gold.begin(), gold.end(), [&](const auto& x) { return x.usage_id == id; });
    const auto& u = *std::find_if(usages.begin(), usages.end(), [&](const auto& x) { return x.usage_id == id; });
    const auto uv = mock.embed(repr::usage_request(u, model.usage_mode));
    const auto& visible = plan.headwords.at(g.headword).unmasked;
    double best = -1.0;
    for (const auto& sid : visible) {
      const auto sv = *repr::embed_sense(*inv.find_sense(sid), g.headword, model.sense_mode, mock);
      best = std::max(best, hand_cosine(uv.values(), sv.values()));
    }
    sims.push_back(best);
    labels.push_back(support::intersection_label(g.senses, {visible.begin(), visible.end()}));
  }
  std::vector<double> train_s, test_s;
  std::vector<std::uint8_t> train_l, test_l;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    (fold_of[i] == 0 ? test_s : train_s).push_back(sims[i]);
    (fold_of[i] == 0 ? test_l : train_l).push_back(labels[i]);
  }
  const auto best = support::brute_force_sweep(train_s, train_l, 0.3);
  const double test_f = support::fbeta_of(support::count_at(test_s, test_l, best.threshold), 0.3);

  const auto table = pipeline::similarity_table(usages, inv, view, model, mock, "en");
  eval::EvalConfig ec;
  ec.folds = 2;
  const auto round = eval::evaluate_round(table, gold, inv, plan, ids, fold_of, ec, 0);
  bool straight = round.labels == labels && round.similarities.size() == sims.size();
  for (std::size_t i = 0; straight && i < sims.size(); ++i) straight = std::abs(round.similarities[i] - sims[i]) <= kSublistTol;
  straight = straight && round.folds[0].threshold == best.threshold &&
             std::abs(round.folds[0].train.f_beta - best.score) <= kSublistTol &&
             std::abs(round.folds[0].test.f_beta - test_f) <= kSublistTol;

  o.pass = deterministic && straight;
  o.detail = std::string("10x5 over ") + std::to_string(c.models.size()) + " models " +
             (deterministic ? "byte-identical across runs" : "DIFFERS across runs") + "; reference fold: t=" +
             fmt("%.2f", best.threshold) + " train F=" + fmt("%.4f", best.score) + " test F=" + fmt("%.4f", test_f) +
             (straight ? " (matches)" : " (MISMATCH)");
  return o;
}

// ---- replacement strategies -------------------------------------------------

Outcome replacement_strategies() {
  const std::vector<std::string> synset{"inadequate", "poor", "short"};
  const std::string seq = "a poor salary";
  const auto contained = repr::locate_member(seq, "inadequate", synset);
  const std::string want[] = {"a poor salary", "inadequate: a poor salary", "a poor salary (inadequate)",
                              "a poor salary, i.e., inadequate", "a inadequate salary"};
  int ok = 0;
  for (int k = 0; k <= 4; ++k) {
    const auto r = repr::apply_strategy(k, "inadequate", seq, contained);
    ok += r.text == want[k] && r.applied_strategy == k;
  }
  const auto fb2 = repr::apply_strategy(4, "inadequate", "money is scarce",
                                        repr::locate_member("money is scarce", "inadequate", synset));
  const bool fallback = fb2.applied_strategy == 2 && fb2.text == "money is scarce (inadequate)";
  return {ok == 5 && fallback,
          std::to_string(ok) + "/5 strategies reproduce the table; E4 fallback " + (fallback ? "fires" : "MISSING"),
          {}};
}

// ---- similarity properties ------------------------------------------------

Outcome similarity_properties() {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  int cos_ok = 0, spr_ok = 0;
  const int pairs = 10000;
  for (int t = 0; t < pairs; ++t) {
    std::vector<float> a(16), b(16), bs(16), bm(16);
    for (int i = 0; i < 16; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
    }
    // Even trials use exact power-of-two factors, odd trials arbitrary ones.
    const bool exact = t % 2 == 0;
    const float k = exact ? std::ldexp(1.0f, static_cast<int>(rng() % 21) - 10) : scale(rng);
    for (int i = 0; i < 16; ++i) {
      bs[i] = b[i] * k;
      bm[i] = std::exp(b[i] / 2.0f) + 3.0f * b[i];  // strictly increasing
    }
    cos_ok += std::abs(cosine(a, b) - cosine(a, bs)) <= (exact ? kExactScaleTol : kInvarianceTol);
    spr_ok += std::abs(spearman(a, b) - spearman(a, bm)) <= kInvarianceTol;
  }
  const std::vector<float> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  const double rho = spearman(x, y);
  return {cos_ok == pairs && spr_ok == pairs && rho == 0.8,
          "cosine " + std::to_string(cos_ok) + "/" + std::to_string(pairs) + ", spearman " + std::to_string(spr_ok) +
              "/" + std::to_string(pairs) + ", rho((1,2,3,4),(1,3,2,4)) = " + fmt("%.17g", rho),
          {}};
}

// ---- threshold monotonicity ---------------------------------------------------

Outcome threshold_monotonicity() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto grid = eval::threshold_grid();
  int good = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<double> sims(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      sims[i] = rng() % 5 == 0 ? static_cast<double>(rng() % 101) / 100.0 : u(rng);
      labels[i] = rng() % 2;
    }
    const auto sweep = kernels::sweep_confusions(sims, labels, grid);
    bool ok = true;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::size_t unassigned = 0;
      for (double s : sims) unassigned += detect::classify(s, grid[k]) == detect::Label::unassigned;
      ok &= unassigned >= prev && sweep[k].tp + sweep[k].fp == unassigned;
      prev = unassigned;
    }
    good += ok;
  }
  return {good == trials, std::to_string(good) + "/" + std::to_string(trials) +
                              " random sets non-decreasing over 101 thresholds", {}};
}

// ---- annotation -------------------------------------------------------------

Outcome annotation() {
  using annot::JudgmentLabel;
  // The worked example: (1,1,-) on the fitting gloss, 0 on the other.
  const auto inv = inventory::parse_wordnet_dump(support::slurp(support::data("small.wordnet.json"))).inventory;
  corpus::Usage u;
  u.usage_id = "relative:0";
  u.headword = "relative";
  u.sentence = "she had witnessed some of the abuse from the relative.";
  u.target = {45, 53};
  const auto inst = annot::generate_instances(std::vector{u}, inv, false, 1).instances;
  const auto* entry = inv.find("relative");
  std::vector<annot::Judgment> judg;
  for (const auto& i : inst) {
    const bool fitting = i.sense_id == entry->senses.front().sense_id;
    const JudgmentLabel row[3] = {fitting ? JudgmentLabel::one : JudgmentLabel::zero,
                                  fitting ? JudgmentLabel::one : JudgmentLabel::zero,
                                  fitting ? JudgmentLabel::dash : JudgmentLabel::zero};
    for (int a = 0; a < 3; ++a) judg.push_back({i.instance_id, "A" + std::to_string(a + 1), row[a], std::nullopt});
  }
  const auto worked = annot::aggregate(inst, judg);
  bool example = inst.size() == entry->senses.size() && worked.usage_status.at(u.usage_id) == annot::UsageStatus::assigned;
  for (const auto& i : inst)
    example &= worked.instance_majority.at(i.instance_id) ==
               (i.sense_id == entry->senses.front().sense_id ? annot::Majority::one : annot::Majority::zero);

  // Consistency identity on the hand fixture and on random fixtures.
  int identity = 0, fixtures = 0;
  auto check_identity = [&](const annot::AggregationResult& r) {
    ++fixtures;
    bool ok = true;
    for (const auto& [_, s] : r.summary) ok &= s.assigned + s.unassigned + s.excluded_usages == s.usages;
    identity += ok;
  };
  check_identity(worked);
  check_identity(annot::aggregate(fixture::twelve_instances(), fixture::twelve_judgments()));
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    auto instances = fixture::twelve_instances();
    std::vector<annot::Judgment> js;
    for (const auto& i : instances)
      for (int a = 0; a < 3; ++a)
        if (rng() % 5) js.push_back({i.instance_id, "A" + std::to_string(a), static_cast<JudgmentLabel>(rng() % 3), std::nullopt});
    check_identity(annot::aggregate(instances, js));
  }

  // Coincidence-matrix value for A = (1,1,0,0), B = (1,0,0,0) is 8/15.
  const auto hand = annot::krippendorff_alpha_nominal({{1, 1}, {1, 0}, {0, 0}, {0, 0}});
  const bool hand_ok = hand && std::abs(hand->alpha - 8.0 / 15.0) <= kAlphaHandTol;

  std::vector<std::vector<int>> units(5000);
  for (auto& unit : units) unit = {static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
  const auto random = annot::krippendorff_alpha_nominal(units);
  const bool random_ok = random && std::abs(random->alpha) <= kAlphaRandomTol;

  return {example && identity == fixtures && hand_ok && random_ok,
          std::string("worked example ") + (example ? "assigned" : "WRONG") + "; identity " + std::to_string(identity) +
              "/" + std::to_string(fixtures) + "; alpha hand " + fmt("%.12f", hand ? hand->alpha : NAN) +
              " (8/15); alpha random (10000 labels) " + fmt("%.4f", random ? random->alpha : NAN),
          {}};
}

// ---- inventory statistics ---------------------------------------------------

Outcome inventory_stats() {
  const auto inv = inventory::parse_wordnet_dump(support::slurp(support::data("stats10.wordnet.json"))).inventory;
  const auto got = nlohmann::json::parse(inventory::to_json(inventory::inventory_stats(inv)));
  const auto want = nlohmann::json::parse(support::slurp(support::data("stats10.expected.json")));
  int exact = 0, total = 0;
  std::string off;
  for (const auto& [key, value] : want.items()) {
    ++total;
    if (got.contains(key) && got[key].get<double>() == value.get<double>()) ++exact;
    else off += " " + key;
  }
  auto fixed_point = [](const inventory::SenseInventory& a) {
    const auto once = inventory::serialize(a);
    const auto back = inventory::parse_canonical(once);
    return back == a && inventory::serialize(back) == once;
  };
  const bool wn = fixed_point(inventory::parse_wordnet_dump(support::slurp(support::data("cv60.wordnet.json"))).inventory) &&
                  fixed_point(inv);
  const bool so = fixed_point(inventory::parse_so_dump(support::slurp(support::data("svindel.so.json"))).inventory);
  return {exact == total && wn && so,
          std::to_string(exact) + "/" + std::to_string(total) + " statistics exact" + (off.empty() ? "" : " (off:" + off + ")") +
              "; round trip wordnet " + (wn ? "ok" : "FAIL") + ", so " + (so ? "ok" : "FAIL"),
          {}};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria{
    {"fbeta_published", fbeta_published},
    {"threshold_sweep", threshold_sweep},
    {"masking_plan", masking_plan},
    {"derive_labels", derive_labels},
    {"cross_validation", cross_validation},
    {"replacement_strategies", replacement_strategies},
    {"similarity_properties", similarity_properties},
    {"threshold_monotonicity", threshold_monotonicity},
    {"annotation", annotation},
    {"inventory_stats", inventory_stats},
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only = argv[++i];
    } else if (!std::strcmp(argv[i], "--list")) {
      for (const auto& c : kCriteria) std::printf("%s\n", c.name);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--only NAME | --list]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && only != c.name) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    failed += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion named '%s'\n", only.c_str());
    return 2;
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
