#include "usd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "usd/kernels.hpp"

namespace usd::detect {

using nlohmann::json;

std::optional<Nearest> nearest_sense(std::span<const float> usage_vector, const SenseVectors& senses,
                                     Similarity kind) {
  std::optional<Nearest> best;
  for (const auto& [id, vec] : senses) {
    const double sim = similarity(kind, usage_vector, vec.values());
    if (!best || sim > best->similarity) best = Nearest{id, sim};
  }
  return best;
}

Label classify(double nearest_similarity, double threshold) {
  return nearest_similarity < threshold ? Label::unassigned : Label::assigned;
}

std::vector<PredictionRecord> predict(std::span<const corpus::Usage> usages,
                                      std::span<const repr::EmbeddingVector> usage_vectors,
                                      const std::map<std::string, SenseVectors, std::less<>>& senses_by_headword,
                                      Similarity kind, double threshold) {
  if (usages.size() != usage_vectors.size()) throw std::invalid_argument("usages/vectors size mismatch");
  kernels::ScoringProblem problem;
  std::unordered_map<const repr::EmbeddingVector*, std::size_t> sense_index;
  std::vector<const std::string*> sense_ids;
  auto check_dim = [&](std::size_t d) {
    if (problem.dim == 0) problem.dim = d;
    if (d != problem.dim) throw std::invalid_argument("embedding dimensions differ");
  };
  for (std::size_t u = 0; u < usages.size(); ++u) {
    check_dim(usage_vectors[u].dim());
    const auto v = usage_vectors[u].values();
    problem.usages.insert(problem.usages.end(), v.begin(), v.end());
    if (auto it = senses_by_headword.find(usages[u].headword); it != senses_by_headword.end()) {
      for (const auto& [id, vec] : it->second) {
        auto [pos, added] = sense_index.emplace(&vec, sense_ids.size());
        if (added) {
          check_dim(vec.dim());
          sense_ids.push_back(&id);
          problem.senses.insert(problem.senses.end(), vec.values().begin(), vec.values().end());
        }
        problem.candidates.push_back(pos->second);
      }
    }
    problem.offsets.push_back(problem.candidates.size());
  }
  const auto sims = kernels::pair_similarities(problem, kind);

  std::vector<PredictionRecord> out;
  out.reserve(usages.size());
  for (std::size_t u = 0; u < usages.size(); ++u) {
    PredictionRecord p;
    p.usage_id = usages[u].usage_id;
    p.headword = usages[u].headword;
    const std::size_t begin = problem.offsets[u], end = problem.offsets[u + 1];
    if (begin == end) {
      p.unrepresentable = true;
      p.label = Label::unassigned;
    } else {
      // Candidates follow sense id order, so a strict comparison keeps the
      // smallest id on ties.
      std::size_t best = begin;
      for (std::size_t k = begin + 1; k < end; ++k) {
        if (sims[k] > sims[best]) best = k;
      }
      p.nearest_sense_id = *sense_ids[problem.candidates[best]];
      p.nearest_similarity = sims[best];
      p.label = classify(p.nearest_similarity, threshold);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PredictionRecord> rank_and_select(std::span<const PredictionRecord> predictions,
                                              const inventory::CompletenessView& view,
                                              const SelectionConfig& config) {
  std::vector<const PredictionRecord*> pool;
  for (const auto& p : predictions) {
    if (p.label != Label::unassigned || p.unrepresentable) continue;
    const auto* hc = view.find(p.headword);
    if (!hc || hc->status != inventory::Completeness::complete) continue;
    pool.push_back(&p);
  }
  std::sort(pool.begin(), pool.end(), [](const PredictionRecord* a, const PredictionRecord* b) {
    if (a->nearest_similarity != b->nearest_similarity) return a->nearest_similarity < b->nearest_similarity;
    return a->usage_id < b->usage_id;
  });
  std::vector<PredictionRecord> out;
  std::map<std::string, std::size_t, std::less<>> taken;
  for (const auto* p : pool) {
    if (out.size() >= config.sample_size) break;
    auto& n = taken[p->headword];
    if (n >= config.max_per_headword) continue;
    ++n;
    out.push_back(*p);
  }
  return out;
}

std::string to_json_line(const PredictionRecord& p) {
  json flags = json::array();
  if (p.unrepresentable) flags.push_back("unrepresentable");
  const double rounded = std::round(p.nearest_similarity * 1e6) / 1e6;
  json j{{"usage_id", p.usage_id},
         {"headword", p.headword},
         {"nearest_sense_id", p.nearest_sense_id ? json(*p.nearest_sense_id) : json(nullptr)},
         {"nearest_similarity", rounded},
         {"label", static_cast<int>(p.label)},
         {"flags", flags}};
  return j.dump();
}

std::string to_jsonl(std::span<const PredictionRecord> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += to_json_line(p);
    out.push_back('\n');
  }
  return out;
}

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view lines) {
  std::vector<PredictionRecord> out;
  std::istringstream in{std::string(lines)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    PredictionRecord p;
    p.usage_id = j.at("usage_id").get<std::string>();
    p.headword = j.at("headword").get<std::string>();
    if (const auto& s = j.at("nearest_sense_id"); !s.is_null()) p.nearest_sense_id = s.get<std::string>();
    p.nearest_similarity = j.at("nearest_similarity").get<double>();
    p.label = j.at("label").get<int>() == 0 ? Label::assigned : Label::unassigned;
    for (const auto& f : j.value("flags", json::array())) {
      if (f == "unrepresentable") p.unrepresentable = true;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace usd::detect
