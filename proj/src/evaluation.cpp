#include "usd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace usd::eval {

using nlohmann::json;

void validate_gold(const GoldAssignment& gold, const inventory::SenseInventory& inv) {
  std::set<std::string> seen;
  for (const auto& g : gold) {
    if (!seen.insert(g.usage_id).second) throw EvalError("duplicate gold usage " + g.usage_id);
    const auto* entry = inv.find(g.headword);
    if (!entry) throw EvalError("gold usage " + g.usage_id + " refers to unknown headword " + g.headword);
    for (const auto& s : g.senses) {
      if (inv.owner_of(s) != g.headword) {
        throw EvalError("gold sense " + s + " of usage " + g.usage_id + " is not a sense of " + g.headword);
      }
    }
  }
}

std::string gold_to_jsonl(const GoldAssignment& gold) {
  std::string out;
  for (const auto& g : gold) {
    out += json{{"usage_id", g.usage_id}, {"headword", g.headword}, {"senses", g.senses}}.dump();
    out.push_back('\n');
  }
  return out;
}

GoldAssignment gold_from_jsonl(std::string_view lines) {
  GoldAssignment out;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      GoldUsage g;
      g.usage_id = j.at("usage_id").get<std::string>();
      g.headword = j.at("headword").get<std::string>();
      for (const auto& s : j.at("senses")) g.senses.insert(s.get<std::string>());
      out.push_back(std::move(g));
    } catch (const std::exception& e) {
      throw EvalError("gold line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

bool MaskingPlan::is_unmasked(std::string_view headword, std::string_view sense_id) const {
  auto it = headwords.find(headword);
  if (it == headwords.end()) return false;
  const auto& u = it->second.unmasked;
  return std::find(u.begin(), u.end(), sense_id) != u.end();
}

bool MaskingPlan::in_universe(std::string_view headword, std::string_view sense_id) const {
  auto it = headwords.find(headword);
  if (it == headwords.end()) return false;
  const auto& m = it->second.masked;
  return is_unmasked(headword, sense_id) || std::find(m.begin(), m.end(), sense_id) != m.end();
}

namespace {

std::set<std::string> gold_headwords(const GoldAssignment& gold) {
  std::set<std::string> out;
  for (const auto& g : gold) out.insert(g.headword);
  return out;
}

}  // namespace

MaskingPlan build_masking_plan(const GoldAssignment& gold, const inventory::CompletenessView& view,
                               std::uint64_t seed) {
  MaskingPlan plan;
  plan.seed = seed;
  Rng rng(seed);
  for (const auto& hw : gold_headwords(gold)) {
    const auto* hc = view.find(hw);
    if (!hc || hc->complete.empty()) {
      plan.excluded_headwords.push_back(hw);
      continue;
    }
    HeadwordPlan hp;
    std::size_t keep = 0;
    if (hc->complete.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, hc->complete.size() - 1);
      keep = pick(rng);
    }
    for (std::size_t i = 0; i < hc->complete.size(); ++i) {
      (i == keep ? hp.unmasked : hp.masked).push_back(hc->complete[i]);
    }
    plan.headwords.emplace(hw, std::move(hp));
  }
  return plan;
}

MaskingPlan identity_plan(const GoldAssignment& gold, const inventory::CompletenessView& view) {
  MaskingPlan plan;
  for (const auto& hw : gold_headwords(gold)) {
    const auto* hc = view.find(hw);
    if (!hc || hc->complete.empty()) {
      plan.excluded_headwords.push_back(hw);
      continue;
    }
    plan.headwords.emplace(hw, HeadwordPlan{hc->complete, {}});
  }
  return plan;
}

std::map<std::string, std::uint8_t, std::less<>> derive_labels(const GoldAssignment& gold, const MaskingPlan& plan) {
  std::map<std::string, std::uint8_t, std::less<>> labels;
  for (const auto& g : gold) {
    if (!plan.covers(g.headword)) continue;
    const bool assigned = std::any_of(g.senses.begin(), g.senses.end(),
                                      [&](const std::string& s) { return plan.is_unmasked(g.headword, s); });
    labels[g.usage_id] = assigned ? 0 : 1;
  }
  return labels;
}

kernels::Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("predicted/actual size mismatch");
  kernels::Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0, a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (p) ++c.fp;
    else if (a) ++c.fn;
    else ++c.tn;
  }
  return c;
}

PrecisionRecall precision_recall(const kernels::Confusion& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

PrecisionRecall precision_recall(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
  return precision_recall(confusion(predicted, actual));
}

double f_beta(double precision, double recall, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0) {
    throw std::invalid_argument("precision and recall must lie in [0, 1]");
  }
  if (precision == 0.0 && recall == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

Metrics metrics(const kernels::Confusion& c, double beta) {
  Metrics m;
  m.confusion = c;
  const auto pr = precision_recall(c);
  m.precision = pr.precision;
  m.recall = pr.recall;
  m.f_beta = (pr.precision && pr.recall) ? f_beta(*pr.precision, *pr.recall, beta) : 0.0;
  return m;
}

std::vector<double> threshold_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = static_cast<double>(i) / 100.0;
  return grid;
}

SweepResult threshold_sweep(std::span<const double> similarities, std::span<const std::uint8_t> labels,
                            const EvalConfig& config) {
  if (similarities.empty()) throw EvalError("threshold sweep on empty training data");
  if (config.grid.empty()) throw EvalError("empty threshold grid");
  const auto confusions = kernels::sweep_confusions(similarities, labels, config.grid);
  SweepResult r;
  r.curve.reserve(confusions.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < confusions.size(); ++i) {
    r.curve.push_back({config.grid[i], metrics(confusions[i], config.beta)});
    if (r.curve[i].metrics.f_beta > r.curve[best].metrics.f_beta) best = i;
  }
  r.best_threshold = r.curve[best].threshold;
  r.best = r.curve[best].metrics;
  return r;
}

double masked_nearest(const SimTable& table, std::string_view usage_id, std::string_view headword,
                      const MaskingPlan& plan) {
  auto it = table.find(usage_id);
  if (it == table.end()) return -1.0;
  double best = -1.0;
  bool any = false;
  for (const auto& [sense, sim] : it->second) {
    if (!plan.is_unmasked(headword, sense)) continue;
    if (!any || sim > best) best = sim;
    any = true;
  }
  return best;
}

namespace {

double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<std::uint8_t> random_baseline(double p_assigned, std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> out(n);
  for (auto& v : out) v = unit_uniform(rng) < p_assigned ? 0 : 1;
  return out;
}

std::vector<std::uint8_t> random_baseline(std::span<const std::uint8_t> labels, Rng& rng) {
  if (labels.empty()) throw EvalError("random baseline needs labels");
  const auto assigned = std::count(labels.begin(), labels.end(), std::uint8_t{0});
  return random_baseline(static_cast<double>(assigned) / static_cast<double>(labels.size()), labels.size(), rng);
}

std::optional<std::map<std::string, std::uint8_t, std::less<>>> frequency_baseline(
    const GoldAssignment& gold, const inventory::SenseInventory& inv, const MaskingPlan& plan) {
  std::map<std::string, std::uint8_t, std::less<>> out;
  for (const auto& g : gold) {
    if (!plan.covers(g.headword)) continue;
    const auto* entry = inv.find(g.headword);
    if (!entry || entry->frequency_order.empty()) return std::nullopt;
    std::optional<std::string> top;
    for (const auto& s : entry->frequency_order) {
      if (plan.in_universe(g.headword, s)) {
        top = s;
        break;
      }
    }
    out[g.usage_id] = (top && g.senses.contains(*top)) ? 0 : 1;
  }
  return out;
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, Rng& rng, std::span<const std::string> groups) {
  if (folds == 0) throw EvalError("fold count must be positive");
  std::vector<std::size_t> fold_of(n, 0);
  if (groups.empty()) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = k % folds;
    return fold_of;
  }
  if (groups.size() != n) throw std::invalid_argument("group keys must align with items");
  std::vector<std::string> keys(groups.begin(), groups.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::shuffle(keys.begin(), keys.end(), rng);
  std::map<std::string, std::size_t, std::less<>> fold_of_key;
  for (std::size_t k = 0; k < keys.size(); ++k) fold_of_key[keys[k]] = k % folds;
  for (std::size_t i = 0; i < n; ++i) fold_of[i] = fold_of_key.at(groups[i]);
  return fold_of;
}

namespace {

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> mean_of_present(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

template <typename T>
std::vector<T> pick(std::span<const T> values, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

}  // namespace

FoldAverages average_folds(std::span<const FoldResult> folds) {
  FoldAverages a;
  std::vector<double> thr, trf, tef, rtr, rte, ftr, fte;
  std::vector<std::optional<double>> trp, tep, trr, ter;
  bool freq = !folds.empty();
  for (const auto& f : folds) {
    thr.push_back(f.threshold);
    trf.push_back(f.train.f_beta);
    tef.push_back(f.test.f_beta);
    rtr.push_back(f.random_train_f);
    rte.push_back(f.random_test_f);
    trp.push_back(f.train.precision);
    tep.push_back(f.test.precision);
    trr.push_back(f.train.recall);
    ter.push_back(f.test.recall);
    if (f.frequency_train_f && f.frequency_test_f) {
      ftr.push_back(*f.frequency_train_f);
      fte.push_back(*f.frequency_test_f);
    } else {
      freq = false;
    }
  }
  a.threshold = mean_of(thr);
  a.train_f = mean_of(trf);
  a.test_f = mean_of(tef);
  a.random_train_f = mean_of(rtr);
  a.random_test_f = mean_of(rte);
  a.train_precision = mean_of_present(trp);
  a.test_precision = mean_of_present(tep);
  a.train_recall = mean_of_present(trr);
  a.test_recall = mean_of_present(ter);
  if (freq) {
    a.frequency_train_f = mean_of(ftr);
    a.frequency_test_f = mean_of(fte);
  }
  return a;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  if (values.empty()) return m;
  m.mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

RoundResult evaluate_round(const SimTable& table, const GoldAssignment& gold, const inventory::SenseInventory& inv,
                           const MaskingPlan& plan, std::span<const std::string> usage_ids,
                           std::span<const std::size_t> fold_of, const EvalConfig& config, std::size_t round) {
  if (usage_ids.size() != fold_of.size()) throw std::invalid_argument("fold assignment must align with usages");
  const auto label_map = derive_labels(gold, plan);
  std::map<std::string, const GoldUsage*, std::less<>> gold_by_id;
  for (const auto& g : gold) gold_by_id[g.usage_id] = &g;

  RoundResult r;
  r.round = round;
  r.plan = plan;
  r.usage_ids.assign(usage_ids.begin(), usage_ids.end());
  r.fold_of.assign(fold_of.begin(), fold_of.end());
  for (const auto& id : r.usage_ids) {
    auto l = label_map.find(id);
    auto g = gold_by_id.find(id);
    if (l == label_map.end() || g == gold_by_id.end()) throw EvalError("usage " + id + " has no label in this plan");
    r.labels.push_back(l->second);
    r.similarities.push_back(masked_nearest(table, id, g->second->headword, plan));
  }

  const auto freq_map = frequency_baseline(gold, inv, plan);
  std::vector<std::uint8_t> freq_pred;
  if (freq_map) {
    for (const auto& id : r.usage_ids) freq_pred.push_back(freq_map->at(id));
  }
  const auto assigned = std::count(r.labels.begin(), r.labels.end(), std::uint8_t{0});
  const double p_assigned = r.labels.empty() ? 0.0 : static_cast<double>(assigned) / static_cast<double>(r.labels.size());

  const std::span<const double> sims(r.similarities);
  const std::span<const std::uint8_t> labels(r.labels);
  for (std::size_t k = 0; k < config.folds; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < r.fold_of.size(); ++i) (r.fold_of[i] == k ? test : train).push_back(i);
    if (test.empty() || train.empty()) {
      throw EvalError("fold " + std::to_string(k + 1) + " of round " + std::to_string(round + 1) +
                      " has no usages (too little data)");
    }
    FoldResult f;
    f.train_size = train.size();
    f.test_size = test.size();
    const auto train_sims = pick(sims, train);
    const auto train_labels = pick(labels, train);
    const auto test_sims = pick(sims, test);
    const auto test_labels = pick(labels, test);

    auto sweep = threshold_sweep(train_sims, train_labels, config);
    f.threshold = sweep.best_threshold;
    f.train = sweep.best;
    f.train_curve = std::move(sweep.curve);
    std::vector<std::uint8_t> test_pred(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) test_pred[i] = test_sims[i] < f.threshold ? 1 : 0;
    f.test = metrics(confusion(test_pred, test_labels), config.beta);

    Rng brng = substream(config.seed, "baseline", {round, k});
    const auto rnd_train = random_baseline(p_assigned, train.size(), brng);
    const auto rnd_test = random_baseline(p_assigned, test.size(), brng);
    f.random_train_f = metrics(confusion(rnd_train, train_labels), config.beta).f_beta;
    f.random_test_f = metrics(confusion(rnd_test, test_labels), config.beta).f_beta;
    if (freq_map) {
      const std::span<const std::uint8_t> fp(freq_pred);
      f.frequency_train_f = metrics(confusion(pick(fp, train), train_labels), config.beta).f_beta;
      f.frequency_test_f = metrics(confusion(pick(fp, test), test_labels), config.beta).f_beta;
    }
    r.folds.push_back(std::move(f));
  }
  r.average = average_folds(r.folds);
  return r;
}

MetricsReport run_cross_validation(const SimTable& table, const GoldAssignment& gold,
                                   const inventory::SenseInventory& inv, const inventory::CompletenessView& view,
                                   const EvalConfig& config, std::string model_name) {
  if (config.rounds == 0) throw EvalError("at least one round is required");
  MetricsReport report;
  report.model = std::move(model_name);
  report.beta = config.beta;
  report.rounds.resize(config.rounds);
  std::vector<std::exception_ptr> errors(config.rounds);

  const auto n_rounds = static_cast<std::ptrdiff_t>(config.rounds);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ri = 0; ri < n_rounds; ++ri) {
    const auto round = static_cast<std::size_t>(ri);
    try {
      const MaskingPlan plan = build_masking_plan(gold, view, substream_seed(config.seed, "masking", {round}));
      const auto labels = derive_labels(gold, plan);
      std::vector<std::string> ids;
      std::vector<std::string> groups;
      for (const auto& [id, label] : labels) ids.push_back(id);
      if (config.group_folds_by_headword) {
        std::map<std::string, std::string, std::less<>> hw_of;
        for (const auto& g : gold) hw_of[g.usage_id] = g.headword;
        for (const auto& id : ids) groups.push_back(hw_of.at(id));
      }
      Rng frng = substream(config.seed, "folds", {round});
      const auto fold_of = assign_folds(ids.size(), config.folds, frng, groups);
      report.rounds[round] = evaluate_round(table, gold, inv, plan, ids, fold_of, config, round);
    } catch (...) {
      errors[round] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> test_f, train_f, thr, rnd, freq;
  bool has_freq = true;
  for (const auto& r : report.rounds) {
    test_f.push_back(r.average.test_f);
    train_f.push_back(r.average.train_f);
    thr.push_back(r.average.threshold);
    rnd.push_back(r.average.random_test_f);
    if (r.average.frequency_test_f) {
      freq.push_back(*r.average.frequency_test_f);
    } else {
      has_freq = false;
    }
  }
  report.test_f = mean_std(test_f);
  report.train_f = mean_std(train_f);
  report.threshold = mean_std(thr);
  report.random_test_f = mean_std(rnd);
  if (has_freq) report.frequency_test_f = mean_std(freq);
  return report;
}

namespace {

std::string fmt3(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_round_table(const RoundResult& round, double beta) {
  char fname[32];
  std::snprintf(fname, sizeof fname, "F%.1f", beta);
  const std::string f_label = fname;
  std::vector<std::string> header{"", "Avg.Train", "Avg.Test"};
  for (std::size_t k = 0; k < round.folds.size(); ++k) {
    header.push_back("F" + std::to_string(k + 1) + ".Train");
    header.push_back("F" + std::to_string(k + 1) + ".Test");
  }
  using Row = std::vector<std::string>;
  const auto& a = round.average;
  std::vector<Row> rows;
  Row thr{"Threshold", fmt3(a.threshold), ""};
  Row prec{"Precision", fmt3(a.train_precision), fmt3(a.test_precision)};
  Row rec{"Recall", fmt3(a.train_recall), fmt3(a.test_recall)};
  Row fb{f_label, fmt3(a.train_f), fmt3(a.test_f)};
  Row rnd{"random_" + f_label, fmt3(a.random_train_f), fmt3(a.random_test_f)};
  Row frq{"frequency_" + f_label, fmt3(a.frequency_train_f), fmt3(a.frequency_test_f)};
  for (const auto& f : round.folds) {
    thr.insert(thr.end(), {fmt3(f.threshold), ""});
    prec.insert(prec.end(), {fmt3(f.train.precision), fmt3(f.test.precision)});
    rec.insert(rec.end(), {fmt3(f.train.recall), fmt3(f.test.recall)});
    fb.insert(fb.end(), {fmt3(f.train.f_beta), fmt3(f.test.f_beta)});
    rnd.insert(rnd.end(), {fmt3(f.random_train_f), fmt3(f.random_test_f)});
    frq.insert(frq.end(), {fmt3(f.frequency_train_f), fmt3(f.frequency_test_f)});
  }
  rows = {thr, prec, rec, fb, rnd, frq};
  std::string out = "# round " + std::to_string(round.round + 1) + "\n";
  auto emit = [&](const Row& row) {
    out += pad(row[0], 14);
    for (std::size_t i = 1; i < row.size(); ++i) out += " " + pad(row[i], 10);
    out += "\n";
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string render_curves(const RoundResult& round) {
  std::string out = "round,fold,threshold,precision,recall,f_beta\n";
  char buf[160];
  for (std::size_t k = 0; k < round.folds.size(); ++k) {
    for (const auto& p : round.folds[k].train_curve) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.2f,%s,%s,%.6f\n", round.round + 1, k + 1, p.threshold,
                    p.metrics.precision ? std::to_string(*p.metrics.precision).c_str() : "",
                    p.metrics.recall ? std::to_string(*p.metrics.recall).c_str() : "", p.metrics.f_beta);
      out += buf;
    }
  }
  return out;
}

std::string render_grid(const std::map<std::string, MetricsReport>& reports) {
  // name = SENSE[_SUB]_SIM
  std::map<std::string, std::map<std::string, double>> cells;
  std::vector<std::string> order{"G0", "G1", "G2", "G3", "E0", "E1", "E2", "E3", "E4"};
  for (const auto& [name, rep] : reports) {
    const auto first = name.find('_');
    const auto last = name.rfind('_');
    if (first == std::string::npos) continue;
    const std::string sense = name.substr(0, first);
    const bool sub = name.find("_SUB_") != std::string::npos;
    const std::string col = std::string(sub ? "SUB" : "DEFAULT") + "." + name.substr(last + 1);
    cells[sense][col] = rep.test_f.mean;
    if (std::find(order.begin(), order.end(), sense) == order.end()) order.push_back(sense);
  }
  const std::vector<std::string> cols{"DEFAULT.COS", "DEFAULT.SPR", "SUB.COS", "SUB.SPR"};
  std::string out = pad("", 6);
  for (const auto& c : cols) out += " " + pad(c, 12);
  out += "\n";
  for (const auto& sense : order) {
    auto it = cells.find(sense);
    if (it == cells.end()) continue;
    out += pad(sense, 6);
    for (const auto& c : cols) {
      auto v = it->second.find(c);
      out += " " + pad(v == it->second.end() ? "" : fmt3(v->second), 12);
    }
    out += "\n";
  }
  return out;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
  return json{{"precision", opt(m.precision)},
              {"recall", opt(m.recall)},
              {"f_beta", m.f_beta},
              {"tp", m.confusion.tp},
              {"fp", m.confusion.fp},
              {"fn", m.confusion.fn},
              {"tn", m.confusion.tn}};
}

json mean_std_json(const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.stddev}}; }

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    json folds = json::array();
    for (const auto& f : r.folds) {
      folds.push_back(json{{"threshold", f.threshold},
                           {"train", metrics_json(f.train)},
                           {"test", metrics_json(f.test)},
                           {"random_train_f", f.random_train_f},
                           {"random_test_f", f.random_test_f},
                           {"frequency_train_f", opt(f.frequency_train_f)},
                           {"frequency_test_f", opt(f.frequency_test_f)},
                           {"train_size", f.train_size},
                           {"test_size", f.test_size}});
    }
    const auto unassigned = std::count(r.labels.begin(), r.labels.end(), std::uint8_t{1});
    rounds.push_back(json{{"round", r.round + 1},
                          {"usages", r.usage_ids.size()},
                          {"unassigned", unassigned},
                          {"average",
                           {{"threshold", r.average.threshold},
                            {"train_f", r.average.train_f},
                            {"test_f", r.average.test_f},
                            {"random_test_f", r.average.random_test_f},
                            {"frequency_test_f", opt(r.average.frequency_test_f)}}},
                          {"folds", std::move(folds)}});
  }
  json j{{"model", report.model},
         {"beta", report.beta},
         {"test_f", mean_std_json(report.test_f)},
         {"train_f", mean_std_json(report.train_f)},
         {"threshold", mean_std_json(report.threshold)},
         {"random_test_f", mean_std_json(report.random_test_f)},
         {"frequency_test_f", report.frequency_test_f ? mean_std_json(*report.frequency_test_f) : json(nullptr)},
         {"rounds", std::move(rounds)}};
  return j.dump(2) + "\n";
}

}  // namespace usd::eval
