// usd: unknown sense detection workflows.
//
//   usd ingest   --inventory wn.json --schema wordnet --out out/
//   usd select   --config run.json --models G3_COS,E0_SUB_SPR
//   usd predict  --config run.json --model G3_COS --threshold 0.62
//   usd aggregate --instances out/instances.jsonl --judgments a1.tsv a2.tsv
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "usd/pipeline.hpp"

namespace {

using usd::pipeline::RunConfig;

struct Flags {
  std::string config;
  std::optional<std::string> out, provider, inventory, schema, language, lemmas, usages, gold, model, predictions,
      candidates, instances;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold, beta;
  std::optional<std::size_t> rounds, folds, sample_size, max_per_headword, batch;
  std::vector<std::string> corpora, historical, models, judgments;
  bool primary_only = false, sub_entries = false, no_filter = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--inventory", f.inventory, "sense inventory file");
  cmd->add_option("--schema", f.schema, "inventory schema")
      ->check(CLI::IsMember({"canonical", "wordnet", "so"}));
  cmd->add_option("--language", f.language, "language tag (en, sv)");
  cmd->add_flag("--primary-only", f.primary_only, "only senses of primary synsets");
}

void add_corpus(CLI::App* cmd, Flags& f) {
  cmd->add_option("--corpus", f.corpora, "modern corpus file (one sentence per line)");
  cmd->add_option("--historical", f.historical, "historical corpus file");
  cmd->add_option("--lemmas", f.lemmas, "form<TAB>lemma table");
  cmd->add_flag("--no-filter", f.no_filter, "keep long or punctuation-heavy sentences");
}

void add_provider(CLI::App* cmd, Flags& f) {
  cmd->add_option("--provider", f.provider, "mock[:DIM] | store:PATH | none (embed only)");
  cmd->add_option("--batch", f.batch, "embedding batch size");
}

RunConfig effective(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : usd::pipeline::load_config(f.config);
  if (f.out) c.out_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.inventory) c.inventory_path = *f.inventory;
  if (f.schema) c.inventory_schema = *f.schema;
  if (f.language) c.language = *f.language;
  if (f.primary_only) c.primary_only = true;
  if (f.sub_entries) c.include_sub_entries = true;
  if (f.lemmas) c.lemma_table = *f.lemmas;
  if (f.no_filter) c.apply_filter = false;
  if (!f.corpora.empty() || !f.historical.empty()) {
    c.corpora.clear();
    for (const auto& p : f.corpora) c.corpora.push_back({p, usd::corpus::CorpusTag::modern});
    for (const auto& p : f.historical) c.corpora.push_back({p, usd::corpus::CorpusTag::historical});
  }
  if (f.provider) c.provider = *f.provider;
  if (f.batch) c.batch_size = *f.batch;
  if (f.usages) c.usages_path = *f.usages;
  if (f.gold) c.gold_path = *f.gold;
  if (!f.models.empty()) c.models = f.models;
  if (f.model || f.threshold) {
    const double thr = f.threshold.value_or(c.model.threshold);
    c.model = f.model ? usd::repr::ModelConfig::parse(*f.model, thr)
                      : usd::repr::ModelConfig{c.model.usage_mode, c.model.sense_mode, c.model.similarity, thr};
  }
  if (f.beta) c.eval.beta = *f.beta;
  if (f.rounds) c.eval.rounds = *f.rounds;
  if (f.folds) c.eval.folds = *f.folds;
  if (f.sample_size) c.selection.sample_size = *f.sample_size;
  if (f.max_per_headword) c.selection.max_per_headword = *f.max_per_headword;
  if (f.predictions) c.predictions_path = *f.predictions;
  if (f.candidates) c.candidates_path = *f.candidates;
  if (f.instances) c.instances_path = *f.instances;
  if (!f.judgments.empty()) c.judgments = f.judgments;
  // Re-run the config checks over the merged values.
  return usd::pipeline::from_json(usd::pipeline::to_json(c));
}

std::string opt(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unknown sense detection"};
  app.require_subcommand(1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "parse a dictionary dump into the canonical inventory");
  add_common(ingest, f);
  ingest->add_flag("--sub-entries", f.sub_entries, "keep SO sub-entries as metadata");

  auto* stats = app.add_subcommand("stats", "inventory statistics");
  add_common(stats, f);

  auto* sample = app.add_subcommand("sample", "find usages in corpora and draw the phase-I sample");
  add_common(sample, f);
  add_corpus(sample, f);

  auto* embed = app.add_subcommand("embed", "write embedding requests and optionally a vector store");
  add_common(embed, f);
  add_provider(embed, f);
  embed->add_option("--usages", f.usages, "usages file");
  embed->add_option("--models", f.models, "model configurations")->delimiter(',');

  auto* select = app.add_subcommand("select", "cross-validate model configurations");
  add_common(select, f);
  add_provider(select, f);
  select->add_option("--usages", f.usages, "usages file");
  select->add_option("--gold", f.gold, "gold sense assignments");
  select->add_option("--models", f.models, "model configurations")->delimiter(',');
  select->add_option("--beta", f.beta, "F-beta weight");
  select->add_option("--rounds", f.rounds, "cross-validation rounds");
  select->add_option("--folds", f.folds, "folds per round");

  auto* predict = app.add_subcommand("predict", "predict unknown senses and export annotation candidates");
  add_common(predict, f);
  add_corpus(predict, f);
  add_provider(predict, f);
  predict->add_option("--model", f.model, "model configuration, e.g. G3_COS");
  predict->add_option("--threshold", f.threshold, "similarity threshold")->check(CLI::Range(0.0, 1.0));
  predict->add_option("--sample-size", f.sample_size, "number of candidates");
  predict->add_option("--max-per-headword", f.max_per_headword, "candidate cap per headword");

  auto* candidates = app.add_subcommand("candidates", "rank predictions into annotation candidates");
  add_common(candidates, f);
  candidates->add_option("--predictions", f.predictions, "predictions file");
  candidates->add_option("--model", f.model, "model configuration (selects completeness kind)");
  candidates->add_option("--sample-size", f.sample_size, "number of candidates");
  candidates->add_option("--max-per-headword", f.max_per_headword, "candidate cap per headword");

  auto* instances = app.add_subcommand("instances", "annotation instances for candidates");
  add_common(instances, f);
  instances->add_option("--candidates", f.candidates, "candidates file");
  instances->add_option("--usages", f.usages, "usages file");

  auto* aggregate = app.add_subcommand("aggregate", "aggregate judgments into reports and gold labels");
  add_common(aggregate, f);
  aggregate->add_option("--instances", f.instances, "instances file");
  aggregate->add_option("--judgments", f.judgments, "judgment files (JSON lines or TSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  namespace p = usd::pipeline;
  try {
    RunConfig c;
    try {
      c = effective(f);
    } catch (const p::UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw p::UsageError(e.what());
    }
    if (ingest->parsed()) {
      const auto r = p::cmd_ingest(c);
      std::cout << usd::inventory::to_json(r.stats) << "\n";
      if (r.warnings) std::cerr << r.warnings << " warning(s), see manifest.json\n";
    } else if (stats->parsed()) {
      std::cout << usd::inventory::to_json(p::cmd_stats(c)) << "\n";
    } else if (sample->parsed()) {
      const auto r = p::cmd_sample(c);
      std::cout << r.usages_found << " usages found; sampled " << r.sample.usages.size() << " from "
                << r.sample.headwords_found << " headwords\n";
    } else if (embed->parsed()) {
      const auto r = p::cmd_embed(c);
      std::cout << r.requests << " requests, " << r.stored << " vectors stored\n";
    } else if (select->parsed()) {
      std::cout << p::cmd_select(c).grid;
    } else if (predict->parsed()) {
      const auto r = p::cmd_predict(c);
      std::cout << r.usages.size() << " usages, " << r.candidates.size() << " candidates, " << r.instances.size()
                << " instances\n";
    } else if (candidates->parsed()) {
      std::cout << p::cmd_candidates(c).size() << " candidates\n";
    } else if (instances->parsed()) {
      std::cout << p::cmd_instances(c).size() << " instances\n";
    } else if (aggregate->parsed()) {
      const auto r = p::cmd_aggregate(c);
      std::cout << usd::annot::render_summary(r) << "\n" << usd::annot::render_agreement(r);
      const auto& all = r.summary.at("all");
      std::cout << "unassigned: " << opt(all.unassigned_pct()) << "%\n";
      if (!r.unknown_instance_ids.empty()) {
        std::cerr << r.unknown_instance_ids.size() << " judgment(s) for unknown instances skipped\n";
      }
    }
  } catch (const p::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const p::RetriableError& e) {
    std::cerr << "error (retriable): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
