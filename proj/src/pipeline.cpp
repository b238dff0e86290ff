#include "usd/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "usd/kernels.hpp"
#include "usd/random.hpp"

namespace usd::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config ---------------------------------------------------------------

json to_json(const RunConfig& c) {
  json corpora = json::array();
  for (const auto& ci : c.corpora) corpora.push_back({{"path", ci.path}, {"tag", corpus::to_string(ci.tag)}});
  return json{
      {"language", c.language},
      {"inventory",
       {{"path", c.inventory_path},
        {"schema", c.inventory_schema},
        {"include_sub_entries", c.include_sub_entries},
        {"primary_only", c.primary_only}}},
      {"corpora", corpora},
      {"lemma_table", c.lemma_table},
      {"filter",
       {{"enabled", c.apply_filter},
        {"max_chars", c.limits.max_chars},
        {"max_punctuation_share", c.limits.max_punctuation_share}}},
      {"sample",
       {{"headword_pool", c.sample.headword_pool},
        {"stop_at", c.sample.stop_at_headwords_with_usage},
        {"max_per_headword", c.sample.max_usages_per_headword}}},
      {"usages", c.usages_path},
      {"gold", c.gold_path},
      {"models", c.models},
      {"model", {{"name", c.model.name()}, {"threshold", c.model.threshold}}},
      {"eval",
       {{"beta", c.eval.beta},
        {"rounds", c.eval.rounds},
        {"folds", c.eval.folds},
        {"group_folds_by_headword", c.eval.group_folds_by_headword}}},
      {"selection", {{"max_per_headword", c.selection.max_per_headword}, {"sample_size", c.selection.sample_size}}},
      {"provider", c.provider},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"out_dir", c.out_dir},
      {"predictions", c.predictions_path},
      {"candidates", c.candidates_path},
      {"instances", c.instances_path},
      {"judgments", c.judgments},
  };
}

namespace {

template <class T>
void take(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

RunConfig from_json(const json& j, RunConfig c) {
  try {
    check_keys(j,
               {"language", "inventory", "corpora", "lemma_table", "filter", "sample", "usages", "gold", "models",
                "model", "eval", "selection", "provider", "batch_size", "seed", "out_dir", "predictions",
                "candidates", "instances", "judgments"},
               "config");
    take(j, "language", c.language);
    if (auto it = j.find("inventory"); it != j.end()) {
      check_keys(*it, {"path", "schema", "include_sub_entries", "primary_only"}, "inventory");
      take(*it, "path", c.inventory_path);
      take(*it, "schema", c.inventory_schema);
      take(*it, "include_sub_entries", c.include_sub_entries);
      take(*it, "primary_only", c.primary_only);
    }
    if (auto it = j.find("corpora"); it != j.end()) {
      c.corpora.clear();
      for (const auto& e : *it) {
        check_keys(e, {"path", "tag"}, "corpora");
        c.corpora.push_back({e.at("path").get<std::string>(),
                             corpus::corpus_tag_from_string(e.value("tag", std::string("modern")))});
      }
    }
    take(j, "lemma_table", c.lemma_table);
    if (auto it = j.find("filter"); it != j.end()) {
      check_keys(*it, {"enabled", "max_chars", "max_punctuation_share"}, "filter");
      take(*it, "enabled", c.apply_filter);
      take(*it, "max_chars", c.limits.max_chars);
      take(*it, "max_punctuation_share", c.limits.max_punctuation_share);
    }
    if (auto it = j.find("sample"); it != j.end()) {
      check_keys(*it, {"headword_pool", "stop_at", "max_per_headword"}, "sample");
      take(*it, "headword_pool", c.sample.headword_pool);
      take(*it, "stop_at", c.sample.stop_at_headwords_with_usage);
      take(*it, "max_per_headword", c.sample.max_usages_per_headword);
    }
    take(j, "usages", c.usages_path);
    take(j, "gold", c.gold_path);
    take(j, "models", c.models);
    if (auto it = j.find("model"); it != j.end()) {
      check_keys(*it, {"name", "threshold"}, "model");
      const double thr = it->value("threshold", c.model.threshold);
      c.model = it->contains("name") ? repr::ModelConfig::parse(it->at("name").get<std::string>(), thr)
                                      : repr::ModelConfig{c.model.usage_mode, c.model.sense_mode,
                                                          c.model.similarity, thr};
    }
    if (auto it = j.find("eval"); it != j.end()) {
      check_keys(*it, {"beta", "rounds", "folds", "group_folds_by_headword"}, "eval");
      take(*it, "beta", c.eval.beta);
      take(*it, "rounds", c.eval.rounds);
      take(*it, "folds", c.eval.folds);
      take(*it, "group_folds_by_headword", c.eval.group_folds_by_headword);
    }
    if (auto it = j.find("selection"); it != j.end()) {
      check_keys(*it, {"max_per_headword", "sample_size"}, "selection");
      take(*it, "max_per_headword", c.selection.max_per_headword);
      take(*it, "sample_size", c.selection.sample_size);
    }
    take(j, "provider", c.provider);
    take(j, "batch_size", c.batch_size);
    take(j, "seed", c.seed);
    take(j, "out_dir", c.out_dir);
    take(j, "predictions", c.predictions_path);
    take(j, "candidates", c.candidates_path);
    take(j, "instances", c.instances_path);
    take(j, "judgments", c.judgments);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (c.eval.beta <= 0.0) throw UsageError("config: beta must be positive");
  if (c.eval.rounds == 0 || c.eval.folds < 2) throw UsageError("config: need rounds >= 1 and folds >= 2");
  if (c.model.threshold < 0.0 || c.model.threshold > 1.0) throw UsageError("config: threshold outside [0, 1]");
  return c;
}

RunConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

std::string config_hash(const RunConfig& config) { return text::hex64(text::fnv1a(to_json(config).dump())); }

// ---- files ----------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

std::string file_hash(const std::string& path) { return text::hex64(text::fnv1a(read_file(path))); }

std::unique_ptr<repr::EmbeddingProvider> make_provider(const std::string& spec) {
  if (spec == "mock") return std::make_unique<repr::MockProvider>();
  if (spec.rfind("mock:", 0) == 0) {
    std::size_t dim = 0;
    try {
      std::size_t used = 0;
      dim = std::stoul(spec.substr(5), &used);
      if (used != spec.size() - 5) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("bad provider dimension: " + spec);
    }
    if (dim < 2) throw UsageError("mock provider needs dim >= 2");
    return std::make_unique<repr::MockProvider>(dim);
  }
  if (spec.rfind("store:", 0) == 0) {
    const std::string path = spec.substr(6);
    try {
      return std::make_unique<repr::StoreProvider>(repr::VectorStore::load(path));
    } catch (const std::exception& e) {
      throw RetriableError("vector store unavailable (" + path + "): " + e.what());
    }
  }
  throw UsageError("unknown provider spec: " + spec);
}

// ---- run bookkeeping ------------------------------------------------------

struct Run::Log {
  std::shared_ptr<spdlog::logger> logger;
};

Run::Run(std::string command, RunConfig config)
    : command_(std::move(command)), config_(std::move(config)), log_(std::make_unique<Log>()) {
  fs::create_directories(config_.out_dir);
  auto sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>(out_path("run.log"), true);
  log_->logger = std::make_shared<spdlog::logger>("usd." + command_, sink);
  log_->logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  log_->logger->flush_on(spdlog::level::info);
  log_->logger->info("{} seed={} config={}", command_, config_.seed, config_hash(config_));
}

Run::~Run() = default;

std::string Run::out_path(const std::string& name) const { return (fs::path(config_.out_dir) / name).string(); }

void Run::input(const std::string& path) {
  if (path.empty()) return;
  if (!fs::exists(path)) throw UsageError("input not found: " + path);
  inputs_[path] = file_hash(path);
}

void Run::output(const std::string& name, std::string_view content) {
  write_file(out_path(name), content);
  outputs_[name] = text::hex64(text::fnv1a(content));
  log_->logger->info("wrote {} ({} bytes)", name, content.size());
}

void Run::log(const std::string& message) { log_->logger->info("{}", message); }

void Run::warn(const std::string& message) {
  warnings_.push_back(message);
  log_->logger->warn("{}", message);
}

void Run::finish() {
  const json cfg = to_json(config_);
  write_file(out_path("config.json"), cfg.dump(2) + "\n");
  json manifest{{"command", command_},
                {"config_hash", config_hash(config_)},
                {"seed", config_.seed},
                {"inputs", inputs_},
                {"outputs", outputs_},
                {"warnings", warnings_}};
  write_file(out_path("manifest.json"), manifest.dump(2) + "\n");
  log_->logger->info("done");
}

// ---- shared steps ---------------------------------------------------------

inventory::SenseInventory load_inventory(const RunConfig& config, std::vector<std::string>* warnings) {
  if (config.inventory_path.empty()) throw UsageError("no inventory path given");
  const std::string raw = read_file(config.inventory_path);
  inventory::ParseResult parsed;
  if (config.inventory_schema == "canonical") {
    parsed.inventory = inventory::parse_canonical(raw);
  } else if (config.inventory_schema == "wordnet") {
    parsed = inventory::parse_wordnet_dump(raw);
  } else if (config.inventory_schema == "so") {
    parsed = inventory::parse_so_dump(raw, {config.include_sub_entries});
  } else {
    throw UsageError("unknown inventory schema: " + config.inventory_schema);
  }
  if (warnings) *warnings = std::move(parsed.warnings);
  return std::move(parsed.inventory);
}

namespace {

std::vector<std::string> headwords_in(const inventory::CompletenessView& view, std::span<const std::string> only) {
  std::vector<std::string> out;
  if (only.empty()) {
    for (const auto& [hw, hc] : view.headwords) out.push_back(hw);
  } else {
    std::set<std::string> uniq(only.begin(), only.end());
    for (const auto& hw : uniq) {
      if (view.find(hw)) out.push_back(hw);
    }
  }
  return out;
}

std::map<std::string, detect::SenseVectors, std::less<>> embed_senses(
    const inventory::SenseInventory& inv, const inventory::CompletenessView& view, repr::SenseMode mode,
    repr::EmbeddingProvider& provider, std::string_view language, std::size_t batch_size,
    std::span<const std::string> only) {
  std::vector<repr::EmbeddingRequest> requests;
  struct Owner {
    std::string headword, sense_id;
    std::size_t begin, end;
  };
  std::vector<Owner> owners;
  for (const auto& hw : headwords_in(view, only)) {
    for (const auto& id : view.find(hw)->complete) {
      const auto* sense = inv.find_sense(id);
      auto reqs = repr::sense_requests(*sense, hw, mode, language);
      if (reqs.empty()) continue;
      owners.push_back({hw, id, requests.size(), requests.size() + reqs.size()});
      for (auto& r : reqs) requests.push_back(std::move(r));
    }
  }
  const auto vectors = repr::embed_all(provider, requests, batch_size);
  std::map<std::string, detect::SenseVectors, std::less<>> out;
  for (const auto& o : owners) {
    out[o.headword].emplace(
        o.sense_id, repr::mean(std::span<const repr::EmbeddingVector>(vectors).subspan(o.begin, o.end - o.begin)));
  }
  return out;
}

}  // namespace

std::map<std::string, detect::SenseVectors, std::less<>> sense_vectors(const inventory::SenseInventory& inv,
                                                                       const inventory::CompletenessView& view,
                                                                       repr::SenseMode mode,
                                                                       repr::EmbeddingProvider& provider,
                                                                       std::string_view language,
                                                                       std::size_t batch_size) {
  return embed_senses(inv, view, mode, provider, language, batch_size, {});
}

eval::SimTable similarity_table(std::span<const corpus::Usage> usages, const inventory::SenseInventory& inv,
                                const inventory::CompletenessView& view, const repr::ModelConfig& model,
                                repr::EmbeddingProvider& provider, std::string_view language,
                                std::size_t batch_size) {
  std::vector<std::string> headwords;
  std::vector<repr::EmbeddingRequest> usage_reqs;
  for (const auto& u : usages) {
    headwords.push_back(u.headword);
    usage_reqs.push_back(repr::usage_request(u, model.usage_mode));
  }
  eval::SimTable table;
  if (usages.empty()) return table;
  const auto senses = embed_senses(inv, view, model.sense_mode, provider, language, batch_size, headwords);
  const auto usage_vecs = repr::embed_all(provider, usage_reqs, batch_size);

  kernels::ScoringProblem problem;
  problem.dim = provider.dim();
  std::vector<std::pair<const std::string*, const std::string*>> pairs;  // (usage, sense)
  std::map<const repr::EmbeddingVector*, std::size_t> sense_row;
  for (std::size_t u = 0; u < usages.size(); ++u) {
    const auto v = usage_vecs[u].values();
    problem.usages.insert(problem.usages.end(), v.begin(), v.end());
    table[usages[u].usage_id];
    if (auto it = senses.find(usages[u].headword); it != senses.end()) {
      for (const auto& [id, vec] : it->second) {
        auto [pos, added] = sense_row.emplace(&vec, sense_row.size());
        if (added) problem.senses.insert(problem.senses.end(), vec.values().begin(), vec.values().end());
        problem.candidates.push_back(pos->second);
        pairs.emplace_back(&usages[u].usage_id, &id);
      }
    }
    problem.offsets.push_back(problem.candidates.size());
  }
  const auto sims = kernels::pair_similarities(problem, model.similarity);
  for (std::size_t k = 0; k < pairs.size(); ++k) table[*pairs[k].first][*pairs[k].second] = sims[k];
  return table;
}

namespace {

// Records a store file as an input; a missing store stays a provider failure.
std::unique_ptr<repr::EmbeddingProvider> open_provider(Run& run, const std::string& spec) {
  auto provider = make_provider(spec);
  if (spec.rfind("store:", 0) == 0) run.input(spec.substr(6));
  return provider;
}

template <class F>
auto provider_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const repr::ProviderError& e) {
    throw RetriableError(std::string("embedding provider failed: ") + e.what());
  }
}

std::vector<corpus::Usage> read_usages(Run& run, const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("no ") + what + " path given");
  run.input(path);
  return corpus::usages_from_jsonl(read_file(path));
}

inventory::SenseInventory read_inventory(Run& run) {
  run.input(run.config().inventory_path);
  std::vector<std::string> warnings;
  auto inv = load_inventory(run.config(), &warnings);
  for (const auto& w : warnings) run.warn(w);
  return inv;
}

corpus::TableLemmatizer read_lemmatizer(Run& run) {
  if (run.config().lemma_table.empty()) return {};
  run.input(run.config().lemma_table);
  return corpus::TableLemmatizer::from_tsv(read_file(run.config().lemma_table));
}

std::vector<corpus::Usage> find_all_usages(Run& run, const inventory::SenseInventory& inv) {
  const auto& c = run.config();
  if (c.corpora.empty()) throw UsageError("no corpus given");
  for (const auto& ci : c.corpora) run.input(ci.path);
  const auto lemmatizer = read_lemmatizer(run);
  std::vector<corpus::Usage> all;
  for (std::size_t i = 0; i < c.corpora.size(); ++i) {
    const auto sentences = corpus::read_sentences(read_file(c.corpora[i].path));
    corpus::FindOptions opts;
    opts.corpus_tag = c.corpora[i].tag;
    opts.language = c.language;
    opts.id_prefix = "c" + std::to_string(i);
    opts.limits = c.limits;
    opts.apply_filter = c.apply_filter;
    auto found = corpus::find_usages(sentences, inv, lemmatizer, opts);
    for (const auto& w : found.warnings) run.warn(w);
    run.log(c.corpora[i].path + ": " + std::to_string(sentences.size()) + " sentences, " +
            std::to_string(found.sentences_dropped) + " dropped, " + std::to_string(found.usages.size()) +
            " usages");
    for (auto& u : found.usages) all.push_back(std::move(u));
  }
  return all;
}

std::vector<repr::ModelConfig> grid_models(const RunConfig& c, inventory::Source source) {
  std::vector<repr::ModelConfig> out;
  if (!c.models.empty()) {
    for (const auto& name : c.models) {
      repr::ModelConfig m;
      try {
        m = repr::ModelConfig::parse(name);
        repr::validate(m, source);
      } catch (const std::exception& e) {
        throw UsageError("model " + name + ": " + e.what());
      }
      out.push_back(m);
    }
    return out;
  }
  for (auto sm : repr::all_sense_modes()) {
    if (sm == repr::SenseMode::E4 && source != inventory::Source::wordnet_like) continue;
    for (auto um : {repr::UsageMode::plain, repr::UsageMode::sub}) {
      for (auto sim : {Similarity::cos, Similarity::spr}) out.push_back({um, sm, sim, 0.5});
    }
  }
  return out;
}

}  // namespace

// ---- commands -------------------------------------------------------------

IngestResult cmd_ingest(const RunConfig& config) {
  Run run("ingest", config);
  run.input(config.inventory_path);
  std::vector<std::string> warnings;
  const auto inv = load_inventory(config, &warnings);
  for (const auto& w : warnings) run.warn(w);
  IngestResult r{inventory::inventory_stats(inv), warnings.size()};
  run.output("inventory.jsonl", inventory::serialize(inv));
  run.output("stats.json", inventory::to_json(r.stats));
  run.finish();
  return r;
}

inventory::StatsReport cmd_stats(const RunConfig& config) {
  Run run("stats", config);
  const auto inv = read_inventory(run);
  auto stats = inventory::inventory_stats(inv);
  run.output("stats.json", inventory::to_json(stats));
  run.finish();
  return stats;
}

SampleOutcome cmd_sample(const RunConfig& config) {
  Run run("sample", config);
  const auto inv = read_inventory(run);
  const auto usages = find_all_usages(run, inv);
  std::vector<std::string> headwords;
  for (const auto& [hw, _] : inv.headwords()) headwords.push_back(hw);
  SampleOutcome out;
  out.usages_found = usages.size();
  out.sample = corpus::sample_random_phase1(usages, headwords, substream_seed(config.seed, "sampling", {}),
                                            config.sample);
  if (out.sample.shortfall) run.warn("fewer headwords with usages than requested");
  run.log("sampled " + std::to_string(out.sample.usages.size()) + " usages from " +
          std::to_string(out.sample.headwords_found) + " headwords");
  run.output("usages.jsonl", corpus::to_jsonl(usages));
  run.output("sample.jsonl", corpus::to_jsonl(out.sample.usages));
  run.finish();
  return out;
}

EmbedResult cmd_embed(const RunConfig& config) {
  Run run("embed", config);
  const auto inv = read_inventory(run);
  const auto usages = read_usages(run, config.usages_path, "usages");
  const auto models = grid_models(config, inv.source());

  std::vector<repr::EmbeddingRequest> requests;
  std::set<std::string> seen;
  auto push = [&](repr::EmbeddingRequest r) {
    if (seen.insert(r.request_id).second) requests.push_back(std::move(r));
  };
  std::set<std::string> headwords;
  for (const auto& u : usages) headwords.insert(u.headword);
  for (const auto& m : models) {
    for (const auto& u : usages) push(repr::usage_request(u, m.usage_mode));
    const auto view = inventory::complete_senses(inv, repr::kind_of(m.sense_mode), config.primary_only);
    for (const auto& hw : headwords) {
      const auto* hc = view.find(hw);
      if (!hc) continue;
      for (const auto& id : hc->complete) {
        for (auto& r : repr::sense_requests(*inv.find_sense(id), hw, m.sense_mode, config.language)) {
          push(std::move(r));
        }
      }
    }
  }
  EmbedResult result{requests.size(), 0};
  run.output("requests.jsonl", repr::requests_to_jsonl(requests));
  if (config.provider != "none") {
    auto provider = make_provider(config.provider);
    repr::VectorStore store(provider->dim());
    const auto manifest =
        provider_guard([&] { return repr::embed_into_store(*provider, requests, store, config.batch_size); });
    result.stored = store.size();
    run.output("vectors.bin", store.to_bytes());
    run.output("vectors.manifest.jsonl", repr::manifest_to_jsonl(manifest));
  }
  run.finish();
  return result;
}

SelectResult cmd_select(const RunConfig& config) {
  Run run("select", config);
  if (config.gold_path.empty()) throw UsageError("select needs a gold assignment file (--gold)");
  run.input(config.gold_path);
  const auto inv = read_inventory(run);
  const auto gold = eval::gold_from_jsonl(read_file(config.gold_path));
  eval::validate_gold(gold, inv);
  const auto all_usages = read_usages(run, config.usages_path, "usages");
  std::set<std::string> gold_ids;
  for (const auto& g : gold) gold_ids.insert(g.usage_id);
  std::vector<corpus::Usage> usages;
  for (const auto& u : all_usages) {
    if (gold_ids.contains(u.usage_id)) usages.push_back(u);
  }
  if (usages.size() != gold_ids.size()) {
    throw std::runtime_error("gold references " + std::to_string(gold_ids.size() - usages.size()) +
                             " usages missing from the usages file");
  }
  const auto models = grid_models(config, inv.source());

  // One completeness view for the whole grid keeps masking plans shared.
  bool any_gloss = false, any_examples = false;
  for (const auto& m : models) (repr::is_gloss_mode(m.sense_mode) ? any_gloss : any_examples) = true;
  const auto kind = any_gloss && any_examples ? inventory::Kind::gloss_and_examples
                    : any_gloss               ? inventory::Kind::gloss
                                              : inventory::Kind::examples;
  const auto view = inventory::complete_senses(inv, kind, config.primary_only);

  auto base = open_provider(run, config.provider);
  repr::CachingProvider provider(*base, config.batch_size);
  eval::EvalConfig ec = config.eval;
  ec.seed = config.seed;

  SelectResult result;
  for (const auto& m : models) {
    const auto table = provider_guard(
        [&] { return similarity_table(usages, inv, view, m, provider, config.language, config.batch_size); });
    auto report = eval::run_cross_validation(table, gold, inv, view, ec, m.name());
    run.output("metrics/" + m.name() + ".json", eval::report_to_json(report) + "\n");
    std::string model_tables, model_curves;
    for (const auto& round : report.rounds) {
      model_tables += eval::render_round_table(round, ec.beta) + "\n";
      const std::string c = eval::render_curves(round);
      model_curves += model_curves.empty() ? c : c.substr(c.find('\n') + 1);
    }
    run.output("tables/" + m.name() + ".txt", model_tables);
    run.output("curves/" + m.name() + ".csv", model_curves);
    run.log(m.name() + ": test F " + std::to_string(report.test_f.mean));
    result.reports.emplace(m.name(), std::move(report));
  }
  double best = -1.0;
  for (const auto& [name, report] : result.reports) {
    if (report.test_f.mean > best) {
      best = report.test_f.mean;
      result.best_model = name;
    }
  }
  result.grid = eval::render_grid(result.reports);
  if (!result.best_model.empty()) {
    const auto& b = result.reports.at(result.best_model);
    result.grid += "best: " + result.best_model + "\n";
    run.output("best.json", json{{"model", result.best_model},
                                 {"test_f", b.test_f.mean},
                                 {"threshold", b.threshold.mean},
                                 {"beta", ec.beta}}
                                    .dump(2) +
                                "\n");
  }
  run.output("grid.txt", result.grid);
  run.finish();
  return result;
}

PredictResult cmd_predict(const RunConfig& config) {
  Run run("predict", config);
  const auto inv = read_inventory(run);
  try {
    repr::validate(config.model, inv.source());
  } catch (const std::exception& e) {
    throw UsageError(std::string("model: ") + e.what());
  }
  PredictResult r;
  r.usages = find_all_usages(run, inv);
  const auto view = inventory::complete_senses(inv, repr::kind_of(config.model.sense_mode), config.primary_only);
  auto base = open_provider(run, config.provider);
  repr::CachingProvider provider(*base, config.batch_size);
  r.predictions = provider_guard([&] {
    std::vector<std::string> headwords;
    std::vector<repr::EmbeddingRequest> reqs;
    for (const auto& u : r.usages) {
      headwords.push_back(u.headword);
      reqs.push_back(repr::usage_request(u, config.model.usage_mode));
    }
    if (r.usages.empty()) return std::vector<detect::PredictionRecord>{};
    const auto senses = embed_senses(inv, view, config.model.sense_mode, provider, config.language,
                                     config.batch_size, headwords);
    const auto vecs = repr::embed_all(provider, reqs, config.batch_size);
    return detect::predict(r.usages, vecs, senses, config.model.similarity, config.model.threshold);
  });
  r.candidates = detect::rank_and_select(r.predictions, view, config.selection);
  std::map<std::string, const corpus::Usage*> by_id;
  for (const auto& u : r.usages) by_id[u.usage_id] = &u;
  std::vector<corpus::Usage> chosen;
  std::set<std::string> chosen_headwords;
  for (const auto& c : r.candidates) {
    chosen.push_back(*by_id.at(c.usage_id));
    chosen_headwords.insert(c.headword);
  }
  auto gen = annot::generate_instances(chosen, inv, config.primary_only, substream_seed(config.seed, "instances", {}));
  for (const auto& w : gen.warnings) run.warn(w);
  r.instances = std::move(gen.instances);
  std::size_t unassigned = 0;
  for (const auto& p : r.predictions) unassigned += p.label == detect::Label::unassigned;
  run.log(std::to_string(r.usages.size()) + " usages, " + std::to_string(unassigned) + " predicted unassigned, " +
          std::to_string(r.candidates.size()) + " candidates over " + std::to_string(chosen_headwords.size()) +
          " headwords, " + std::to_string(r.instances.size()) + " instances");
  run.output("usages.jsonl", corpus::to_jsonl(r.usages));
  run.output("predictions.jsonl", detect::to_jsonl(r.predictions));
  run.output("candidates.jsonl", detect::to_jsonl(r.candidates));
  run.output("instances.jsonl", annot::instances_to_jsonl(r.instances));
  run.output("instances.tsv", annot::instances_to_tsv(r.instances));
  run.finish();
  return r;
}

std::vector<detect::PredictionRecord> cmd_candidates(const RunConfig& config) {
  Run run("candidates", config);
  if (config.predictions_path.empty()) throw UsageError("candidates needs a predictions file");
  run.input(config.predictions_path);
  const auto inv = read_inventory(run);
  const auto predictions = detect::predictions_from_jsonl(read_file(config.predictions_path));
  const auto view = inventory::complete_senses(inv, repr::kind_of(config.model.sense_mode), config.primary_only);
  auto out = detect::rank_and_select(predictions, view, config.selection);
  run.log(std::to_string(out.size()) + " candidates from " + std::to_string(predictions.size()) + " predictions");
  run.output("candidates.jsonl", detect::to_jsonl(out));
  run.finish();
  return out;
}

std::vector<annot::AnnotationInstance> cmd_instances(const RunConfig& config) {
  Run run("instances", config);
  if (config.candidates_path.empty()) throw UsageError("instances needs a candidates file");
  run.input(config.candidates_path);
  const auto inv = read_inventory(run);
  const auto usages = read_usages(run, config.usages_path, "usages");
  const auto candidates = detect::predictions_from_jsonl(read_file(config.candidates_path));
  std::map<std::string, const corpus::Usage*> by_id;
  for (const auto& u : usages) by_id[u.usage_id] = &u;
  std::vector<corpus::Usage> chosen;
  for (const auto& c : candidates) {
    auto it = by_id.find(c.usage_id);
    if (it == by_id.end()) {
      run.warn("candidate " + c.usage_id + " not in usages file; skipped");
      continue;
    }
    chosen.push_back(*it->second);
  }
  auto gen = annot::generate_instances(chosen, inv, config.primary_only, substream_seed(config.seed, "instances", {}));
  for (const auto& w : gen.warnings) run.warn(w);
  run.output("instances.jsonl", annot::instances_to_jsonl(gen.instances));
  run.output("instances.tsv", annot::instances_to_tsv(gen.instances));
  run.finish();
  return std::move(gen.instances);
}

annot::AggregationResult cmd_aggregate(const RunConfig& config) {
  Run run("aggregate", config);
  if (config.instances_path.empty()) throw UsageError("aggregate needs an instances file");
  run.input(config.instances_path);
  const auto instances = annot::instances_from_jsonl(read_file(config.instances_path));
  std::vector<annot::Judgment> judgments;
  for (const auto& path : config.judgments) {
    run.input(path);
    for (auto& j : annot::judgments_from_text(read_file(path))) judgments.push_back(std::move(j));
  }
  auto r = annot::aggregate(instances, judgments);
  for (const auto& id : r.unknown_instance_ids) run.warn("judgment for unknown instance " + id);

  json majorities = json::object(), statuses = json::object();
  for (const auto& [id, m] : r.instance_majority) majorities[id] = annot::to_string(m);
  for (const auto& [id, s] : r.usage_status) statuses[id] = annot::to_string(s);
  json summary = json::object();
  for (const auto& [slice, s] : r.summary) {
    const auto pct = s.unassigned_pct();
    summary[slice] = {{"instances", s.instances},
                      {"usages", s.usages},
                      {"label0", s.label0},
                      {"label1", s.label1},
                      {"dash", s.dash},
                      {"excluded_instances", s.excluded_instances},
                      {"excluded_usages", s.excluded_usages},
                      {"assigned", s.assigned},
                      {"unassigned", s.unassigned},
                      {"unassigned_pct", pct ? json(*pct) : json(nullptr)}};
  }
  json agreement = json::array();
  for (const auto& row : r.agreement) {
    json cells = json::object();
    for (const auto& [slice, a] : row.by_slice) {
      cells[slice] = a ? json{{"alpha", a->alpha}, {"degenerate", a->degenerate}, {"items", a->items}}
                       : json(nullptr);
    }
    agreement.push_back({{"name", row.name}, {"slices", cells}});
  }
  run.output("aggregate.json", json{{"instance_majority", majorities},
                                    {"usage_status", statuses},
                                    {"unknown_instance_ids", r.unknown_instance_ids},
                                    {"summary", summary},
                                    {"agreement", agreement}}
                                       .dump(2) +
                                   "\n");
  run.output("summary.txt", annot::render_summary(r));
  run.output("agreement.txt", annot::render_agreement(r));
  run.output("gold.jsonl", eval::gold_to_jsonl(r.gold));
  run.finish();
  return r;
}

}  // namespace usd::pipeline
