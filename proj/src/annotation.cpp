#include "usd/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "usd/random.hpp"

namespace usd::annot {

using nlohmann::json;

std::string AnnotationInstance::marked_sentence() const {
  return text::replace(sentence, target, "**" + text::slice(sentence, target) + "**");
}

GenerateResult generate_instances(std::span<const corpus::Usage> usages, const inventory::SenseInventory& inv,
                                  bool primary_only, std::uint64_t seed) {
  GenerateResult result;
  for (const auto& u : usages) {
    const auto* entry = inv.find(u.headword);
    if (!entry) {
      result.warnings.push_back("usage " + u.usage_id + ": headword '" + u.headword + "' not in inventory; skipped");
      continue;
    }
    std::vector<const inventory::SenseEntry*> eligible;
    std::vector<std::string> glosses;
    for (const auto& s : entry->senses) {
      if (primary_only && !s.is_primary) continue;
      auto g = s.effective_gloss();
      if (!g) continue;
      eligible.push_back(&s);
      glosses.push_back(*g);
    }
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      AnnotationInstance inst;
      inst.usage_id = u.usage_id;
      inst.sense_id = eligible[i]->sense_id;
      inst.instance_id = "i" + text::hex64(text::fnv1a(u.usage_id + '\x1f' + inst.sense_id));
      inst.headword = u.headword;
      inst.corpus_tag = u.corpus_tag;
      inst.sentence = u.sentence;
      inst.target = u.target;
      inst.candidate_gloss = glosses[i];
      inst.all_glosses = glosses;
      result.instances.push_back(std::move(inst));
    }
  }
  Rng rng(seed);
  std::shuffle(result.instances.begin(), result.instances.end(), rng);
  return result;
}

std::string_view to_string(JudgmentLabel l) {
  switch (l) {
    case JudgmentLabel::zero: return "0";
    case JudgmentLabel::one: return "1";
    case JudgmentLabel::dash: return "-";
  }
  return "?";
}

JudgmentLabel judgment_label_from_string(std::string_view s) {
  if (s == "0") return JudgmentLabel::zero;
  if (s == "1") return JudgmentLabel::one;
  if (s == "-" || s == "\xe2\x88\x92") return JudgmentLabel::dash;  // also U+2212
  throw AnnotationError("unknown judgment label: " + std::string(s));
}

std::string_view to_string(Majority m) {
  switch (m) {
    case Majority::zero: return "0";
    case Majority::one: return "1";
    case Majority::excluded: return "excluded";
  }
  return "?";
}

Majority aggregate_majority(std::span<const JudgmentLabel> labels) {
  std::size_t zeros = 0, ones = 0;
  for (auto l : labels) {
    if (l == JudgmentLabel::zero) ++zeros;
    else if (l == JudgmentLabel::one) ++ones;
  }
  if (ones > zeros) return Majority::one;
  if (zeros > ones) return Majority::zero;
  return Majority::excluded;
}

std::string_view to_string(UsageStatus s) {
  switch (s) {
    case UsageStatus::assigned: return "assigned";
    case UsageStatus::unassigned: return "unassigned";
    case UsageStatus::excluded: return "excluded";
  }
  return "?";
}

UsageStatus usage_assignment(std::span<const Majority> majorities) {
  bool any_zero = false;
  for (auto m : majorities) {
    if (m == Majority::one) return UsageStatus::assigned;
    if (m == Majority::zero) any_zero = true;
  }
  return any_zero ? UsageStatus::unassigned : UsageStatus::excluded;
}

std::optional<AlphaResult> krippendorff_alpha_nominal(const std::vector<std::vector<int>>& units) {
  // Coincidence matrix o[c][k] over pairable values.
  std::map<int, std::map<int, double>> o;
  AlphaResult r;
  for (const auto& unit : units) {
    const std::size_t m = unit.size();
    if (m < 2) continue;
    ++r.items;
    r.values += m;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) o[unit[i]][unit[j]] += 1.0 / static_cast<double>(m - 1);
      }
    }
  }
  if (r.items == 0) return std::nullopt;
  std::map<int, double> marginal;
  double n = 0.0, observed = 0.0;
  for (const auto& [c, row] : o) {
    for (const auto& [k, v] : row) {
      marginal[c] += v;
      n += v;
      if (c != k) observed += v;
    }
  }
  double expected = 0.0;
  for (const auto& [c, nc] : marginal) {
    for (const auto& [k, nk] : marginal) {
      if (c != k) expected += nc * nk;
    }
  }
  if (expected == 0.0) {
    r.alpha = 1.0;
    r.degenerate = true;
    return r;
  }
  r.alpha = 1.0 - (n - 1.0) * observed / expected;
  return r;
}

std::optional<AlphaResult> krippendorff_alpha(std::span<const Judgment> judgments,
                                              const std::set<std::string>* annotators,
                                              const std::set<std::string>* instance_filter) {
  std::map<std::string, std::vector<int>> units;
  for (const auto& j : judgments) {
    if (j.label == JudgmentLabel::dash) continue;
    if (annotators && !annotators->contains(j.annotator_id)) continue;
    if (instance_filter && !instance_filter->contains(j.instance_id)) continue;
    units[j.instance_id].push_back(j.label == JudgmentLabel::one ? 1 : 0);
  }
  std::vector<std::vector<int>> values;
  values.reserve(units.size());
  for (auto& [id, v] : units) values.push_back(std::move(v));
  return krippendorff_alpha_nominal(values);
}

std::optional<double> Summary::unassigned_pct() const {
  if (remaining_usages() == 0) return std::nullopt;
  return 100.0 * static_cast<double>(unassigned) / static_cast<double>(remaining_usages());
}

AggregationResult aggregate(std::span<const AnnotationInstance> instances, std::span<const Judgment> judgments) {
  AggregationResult r;
  std::map<std::string, const AnnotationInstance*> by_id;
  for (const auto& inst : instances) by_id[inst.instance_id] = &inst;

  std::map<std::string, std::vector<JudgmentLabel>> labels_of;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<Judgment> known;
  std::set<std::string> annotators;
  std::set<std::string> unknown;
  for (const auto& j : judgments) {
    if (!by_id.contains(j.instance_id)) {
      unknown.insert(j.instance_id);
      continue;
    }
    if (!seen.emplace(j.instance_id, j.annotator_id).second) {
      throw AnnotationError("repeated judgment by " + j.annotator_id + " on " + j.instance_id);
    }
    labels_of[j.instance_id].push_back(j.label);
    annotators.insert(j.annotator_id);
    known.push_back(j);
  }
  r.unknown_instance_ids.assign(unknown.begin(), unknown.end());

  std::map<std::string, std::vector<Majority>> majorities_of_usage;
  std::map<std::string, const AnnotationInstance*> usage_example;
  std::map<std::string, std::set<std::string>> senses_of_usage;
  const std::vector<std::string> slices{"all", "modern", "historical"};
  for (const auto& s : slices) r.summary[s] = Summary{};
  std::map<std::string, std::set<std::string>> slice_instances;

  for (const auto& [id, labels] : labels_of) {
    const auto* inst = by_id.at(id);
    const Majority m = aggregate_majority(labels);
    r.instance_majority[id] = m;
    majorities_of_usage[inst->usage_id].push_back(m);
    usage_example.emplace(inst->usage_id, inst);
    if (m == Majority::one) senses_of_usage[inst->usage_id].insert(inst->sense_id);
    for (const std::string& slice : {std::string("all"), std::string(corpus::to_string(inst->corpus_tag))}) {
      auto& s = r.summary[slice];
      ++s.instances;
      for (auto l : labels) {
        if (l == JudgmentLabel::zero) ++s.label0;
        else if (l == JudgmentLabel::one) ++s.label1;
        else ++s.dash;
      }
      if (m == Majority::excluded) ++s.excluded_instances;
      slice_instances[slice].insert(id);
    }
  }
  for (const auto& [usage, majorities] : majorities_of_usage) {
    const UsageStatus st = usage_assignment(majorities);
    r.usage_status[usage] = st;
    const auto* inst = usage_example.at(usage);
    for (const std::string& slice : {std::string("all"), std::string(corpus::to_string(inst->corpus_tag))}) {
      auto& s = r.summary[slice];
      ++s.usages;
      if (st == UsageStatus::assigned) ++s.assigned;
      else if (st == UsageStatus::unassigned) ++s.unassigned;
      else ++s.excluded_usages;
    }
    if (st != UsageStatus::excluded) {
      r.gold.push_back({usage, inst->headword, senses_of_usage[usage]});
    }
  }

  std::vector<std::string> ann(annotators.begin(), annotators.end());
  auto row_for = [&](std::string name, const std::set<std::string>* who) {
    AgreementRow row{std::move(name), {}};
    for (const auto& slice : slices) {
      row.by_slice[slice] = krippendorff_alpha(known, who, &slice_instances[slice]);
    }
    r.agreement.push_back(std::move(row));
  };
  for (std::size_t a = 0; a < ann.size(); ++a) {
    for (std::size_t b = a + 1; b < ann.size(); ++b) {
      const std::set<std::string> pair{ann[a], ann[b]};
      row_for(ann[a] + " vs. " + ann[b], &pair);
    }
  }
  if (ann.size() >= 2) row_for("Full", nullptr);
  return r;
}

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

std::string fmt(std::optional<double> v, const char* spec = "%.3f") {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_summary(const AggregationResult& r) {
  const std::vector<std::string> slices{"all", "modern", "historical"};
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto add = [&](std::string name, auto getter) {
    std::vector<std::string> cells;
    for (const auto& s : slices) cells.push_back(getter(r.summary.at(s)));
    rows.emplace_back(std::move(name), std::move(cells));
  };
  add("instances", [](const Summary& s) { return num(s.instances); });
  add("usages", [](const Summary& s) { return num(s.usages); });
  add("label dist. (0, 1, -)",
      [](const Summary& s) { return "(" + num(s.label0) + ", " + num(s.label1) + ", " + num(s.dash) + ")"; });
  add("excluded instances", [](const Summary& s) { return num(s.excluded_instances); });
  add("excluded usages", [](const Summary& s) { return num(s.excluded_usages); });
  add("remaining usages", [](const Summary& s) { return num(s.remaining_usages()); });
  add("assigned", [](const Summary& s) { return num(s.assigned); });
  add("unassigned", [](const Summary& s) { return num(s.unassigned) + " (" + fmt(s.unassigned_pct(), "%.2f") + "%)"; });
  std::string out = pad("", 22);
  for (const auto& s : slices) out += " " + pad(s, 20);
  out += "\n";
  for (const auto& [name, cells] : rows) {
    out += pad(name, 22);
    for (const auto& c : cells) out += " " + pad(c, 20);
    out += "\n";
  }
  return out;
}

std::string render_agreement(const AggregationResult& r) {
  const std::vector<std::string> slices{"all", "modern", "historical"};
  std::string out = pad("", 16);
  for (const auto& s : slices) out += " " + pad(s, 12);
  out += "\n";
  for (const auto& row : r.agreement) {
    out += pad(row.name, 16);
    for (const auto& s : slices) {
      const auto& a = row.by_slice.at(s);
      std::string cell = a ? fmt(a->alpha) : "-";
      if (a && a->degenerate) cell += "*";
      out += " " + pad(cell, 12);
    }
    out += "\n";
  }
  return out;
}

std::string instances_to_jsonl(std::span<const AnnotationInstance> instances) {
  std::string out;
  for (const auto& i : instances) {
    out += json{{"instance_id", i.instance_id},
                {"usage_id", i.usage_id},
                {"headword", i.headword},
                {"sense_id", i.sense_id},
                {"corpus_tag", corpus::to_string(i.corpus_tag)},
                {"sentence", i.sentence},
                {"start", i.target.start},
                {"end", i.target.end},
                {"usage", i.marked_sentence()},
                {"gloss", i.candidate_gloss},
                {"all_glosses", i.all_glosses}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

namespace {

std::string tsv_cell(std::string s) {
  for (auto& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string instances_to_tsv(std::span<const AnnotationInstance> instances) {
  std::string out = "instance_id\tusage\tgloss\tall_glosses\n";
  for (const auto& i : instances) {
    std::string all;
    for (std::size_t k = 0; k < i.all_glosses.size(); ++k) {
      if (k) all += " | ";
      all += i.all_glosses[k];
    }
    out += tsv_cell(i.instance_id) + "\t" + tsv_cell(i.marked_sentence()) + "\t" + tsv_cell(i.candidate_gloss) +
           "\t" + tsv_cell(all) + "\n";
  }
  return out;
}

std::vector<AnnotationInstance> instances_from_jsonl(std::string_view lines) {
  std::vector<AnnotationInstance> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AnnotationInstance i;
      i.instance_id = j.at("instance_id").get<std::string>();
      i.usage_id = j.at("usage_id").get<std::string>();
      i.headword = j.at("headword").get<std::string>();
      i.sense_id = j.at("sense_id").get<std::string>();
      i.corpus_tag = corpus::corpus_tag_from_string(j.value("corpus_tag", "modern"));
      i.sentence = j.at("sentence").get<std::string>();
      i.target = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
      i.candidate_gloss = j.at("gloss").get<std::string>();
      i.all_glosses = j.at("all_glosses").get<std::vector<std::string>>();
      out.push_back(std::move(i));
    } catch (const std::exception& e) {
      throw AnnotationError("instance line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Judgment> judgments_from_text(std::string_view lines) {
  std::vector<Judgment> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    Judgment jd;
    try {
      if (line[first] == '{') {
        const json j = json::parse(line);
        jd.instance_id = j.at("instance_id").get<std::string>();
        jd.annotator_id = j.at("annotator_id").get<std::string>();
        const auto& l = j.at("label");
        jd.label = judgment_label_from_string(l.is_number() ? std::to_string(l.get<int>()) : l.get<std::string>());
        if (auto c = j.find("comment"); c != j.end() && c->is_string() && !c->get<std::string>().empty()) {
          jd.comment = c->get<std::string>();
        }
      } else {
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, '\t')) cells.push_back(cell);
        if (cells.size() < 3) throw AnnotationError("expected instance_id, annotator_id, label");
        if (lineno == 1 && cells[0] == "instance_id") continue;  // header
        jd.instance_id = cells[0];
        jd.annotator_id = cells[1];
        jd.label = judgment_label_from_string(cells[2]);
        if (cells.size() > 3 && !cells[3].empty()) jd.comment = cells[3];
      }
    } catch (const std::exception& e) {
      throw AnnotationError("judgment line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(jd));
  }
  return out;
}

std::string judgments_to_jsonl(std::span<const Judgment> judgments) {
  std::string out;
  for (const auto& j : judgments) {
    out += json{{"instance_id", j.instance_id},
                {"annotator_id", j.annotator_id},
                {"label", to_string(j.label)},
                {"comment", j.comment ? json(*j.comment) : json(nullptr)}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace usd::annot
