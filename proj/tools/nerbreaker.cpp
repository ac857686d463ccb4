#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nerbreaker/corpus.hpp"
#include "nerbreaker/evaluation.hpp"
#include "nerbreaker/lexical.hpp"
#include "nerbreaker/pipeline.hpp"
#include "nerbreaker/records.hpp"
#include "nerbreaker/transport.hpp"

using namespace nerbreaker;

namespace {

constexpr int kInfrastructureFailure = 2;

void add_run_options(CLI::App& cmd, RunConfig& cfg, std::string& mode, std::uint64_t& seed) {
  cmd.add_option("--mode", mode, "entity or context")->check(CLI::IsMember({"entity", "context"}));
  cmd.add_option("--adapter", cfg.adapter, "exec:<cmd>, http:<url> or mock:<spec.json>")->required();
  cmd.add_option("--train", cfg.train, "training corpus (entity inventory)");
  cmd.add_option("--dev", cfg.dev, "development corpus (entity inventory)");
  cmd.add_option("--test", cfg.test, "corpus to attack")->required();
  cmd.add_option("--vectors", cfg.vectors, "word vectors, text format");
  cmd.add_option("--epsilon", cfg.epsilon, "minimum sentence similarity")->capture_default_str();
  cmd.add_option("--delta", cfg.delta, "minimum synonym cosine")->capture_default_str();
  cmd.add_option("--max-candidates", cfg.max_candidates, "entity candidates per attack")
      ->capture_default_str();
  cmd.add_option("--max-synonyms", cfg.max_synonyms, "synonyms per word")->capture_default_str();
  cmd.add_option("--sample", cfg.sample, "eligible sentences to attack")->capture_default_str();
  cmd.add_option("--seed", seed, "random seed")->required();
  cmd.add_option("--jobs", cfg.jobs, "parallel adapter connections")->capture_default_str();
  cmd.add_option("--max-batch", cfg.max_batch, "sentences per predict request")
      ->capture_default_str();
  cmd.add_flag("--strict", cfg.columns.strict, "reject invalid IOB instead of repairing it");
}

int write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path);
  out << text;
  return 0;
}

void print_report(const std::vector<AttackRecord>& records) {
  if (records.empty()) {
    std::cout << report_to_text(aggregate(records));
    return;
  }
  for (const auto& cell : group_by_cell(records)) std::cout << report_to_text(aggregate(cell)) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box adversarial attacks on named entity recognition models"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string mode = "entity";
  std::uint64_t seed = 0;

  auto* attack = app.add_subcommand("attack", "attack the entities of an eligible test sample");
  add_run_options(*attack, cfg, mode, seed);
  attack->add_flag("--no-ranking", [&](std::int64_t) { cfg.use_ranking = false; },
                   "context mode: perturb words in random order");
  attack->add_option("--out", cfg.out, "JSONL output path")->required();

  auto* ablate = app.add_subcommand("ablate", "context attack with and without importance ranking");
  add_run_options(*ablate, cfg, mode, seed);
  std::string ablate_out;
  ablate->add_option("--out", ablate_out, "output prefix")->required();

  auto* report = app.add_subcommand("report", "metrics from persisted attack records");
  std::vector<std::string> inputs;
  std::string json_out, histogram_out;
  std::vector<std::string> inventory_paths;
  report->add_option("records", inputs, "JSONL files")->required();
  report->add_option("--json", json_out, "write the full report as JSON");
  report->add_option("--histogram", histogram_out, "write the distance histogram as CSV");
  report->add_option("--inventory", inventory_paths,
                     "corpora to recount entity frequencies from (default: stored counts)");

  auto* annotate = app.add_subcommand("export-annotation", "grammaticality annotation sheet");
  std::string ann_in, ann_items, ann_key;
  std::size_t ann_n = 100;
  std::uint64_t ann_seed = 0;
  annotate->add_option("records", ann_in, "JSONL file")->required();
  annotate->add_option("-n", ann_n, "sentences per source")->capture_default_str();
  annotate->add_option("--seed", ann_seed, "random seed")->required();
  annotate->add_option("--out", ann_items, "items CSV")->required();
  annotate->add_option("--key", ann_key, "key CSV mapping items to sources")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*attack || *ablate) {
      cfg.mode = parse_mode(mode);
      cfg.seed = seed;
    }
    if (*attack) {
      auto outcome = run_attack(cfg);
      std::cout << "sentences: " << outcome.sentences << ", entities: " << outcome.entities_total
                << ", attacked: " << outcome.records.size() << "\n"
                << report_to_text(outcome.report);
      return 0;
    }
    if (*ablate) {
      if (cfg.mode != AttackMode::Context) throw ConfigError("ablate needs --mode context");
      cfg.out = ablate_out;
      auto outcome = run_ablation(cfg, [&]() { return make_endpoint(cfg.adapter); });
      std::cout << ablation_to_text(outcome.table);
      write_text(ablate_out + ".ablation.json", ablation_to_json(outcome.table).dump(2) + "\n");
      return 0;
    }
    if (*report) {
      std::vector<AttackRecord> records;
      for (const auto& path : inputs) {
        auto part = read_records_file(path);
        records.insert(records.end(), part.begin(), part.end());
      }
      print_report(records);

      std::optional<EntityInventory> inventory;
      if (!inventory_paths.empty()) {
        std::vector<TaggedSentence> pool;
        for (const auto& p : inventory_paths) {
          auto part = read_conll_file(p);
          pool.insert(pool.end(), part.begin(), part.end());
        }
        inventory = build_inventory(pool);
      }
      const auto hist = distance_histogram(records);
      const auto freq = frequency_comparison(records, inventory ? &*inventory : nullptr);
      const auto stats = sentence_statistics(records);
      if (freq.n > 0) std::cout << "entity frequency:\n" << frequency_to_json(freq).dump(2) << "\n";
      if (!stats.empty()) std::cout << "sentence statistics:\n" << sentence_stats_to_json(stats).dump(2) << "\n";

      if (!histogram_out.empty()) write_text(histogram_out, histogram_to_csv(hist));
      if (!json_out.empty()) {
        nlohmann::json j;
        j["reports"] = nlohmann::json::array();
        if (records.empty()) {
          j["reports"].push_back(report_to_json(aggregate(records)));
        } else {
          for (const auto& cell : group_by_cell(records)) j["reports"].push_back(report_to_json(aggregate(cell)));
        }
        j["frequency"] = frequency_to_json(freq);
        j["sentence_statistics"] = sentence_stats_to_json(stats);
        nlohmann::json h = nlohmann::json::object();
        for (const auto& [d, c] : hist) h[std::to_string(d)] = c;
        j["distance_histogram"] = h;
        write_text(json_out, j.dump(2) + "\n");
      }
      return 0;
    }
    if (*annotate) {
      const auto records = read_records_file(ann_in);
      const auto sheet = export_annotation(records, ann_n, ann_seed);
      write_text(ann_items, sheet.items_csv);
      write_text(ann_key, sheet.key_csv);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "nerbreaker: " << e.what() << "\n";
    return kInfrastructureFailure;
  }
  return 0;
}
