#include "nerbreaker/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "nerbreaker/context_attack.hpp"
#include "nerbreaker/entity_attack.hpp"
#include "nerbreaker/lexical.hpp"
#include "nerbreaker/random.hpp"
#include "nerbreaker/records.hpp"
#include "nerbreaker/similarity.hpp"
#include "nerbreaker/text.hpp"
#include "nerbreaker/transport.hpp"

namespace nerbreaker {

void RunConfig::validate() const {
  if (!seed) throw ConfigError("--seed is required");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("--epsilon must be in (0, 1]");
  if (!(delta >= -1.0 && delta < 1.0)) throw ConfigError("--delta must be in [-1, 1)");
  if (max_candidates < 1) throw ConfigError("--max-candidates must be >= 1");
  if (max_synonyms < 1) throw ConfigError("--max-synonyms must be >= 1");
  if (sample < 1) throw ConfigError("--sample must be >= 1");
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (test.empty()) throw ConfigError("--test is required");
  if (adapter.empty()) throw ConfigError("--adapter is required");
  if (mode == AttackMode::Context && !vectors) throw ConfigError("context mode needs --vectors");
  if (mode == AttackMode::Entity && train.empty() && dev.empty()) {
    throw ConfigError("entity mode needs --train and/or --dev to build the entity inventory");
  }
}

ConfigSnapshot RunConfig::snapshot() const {
  ConfigSnapshot s;
  s.mode = mode;
  s.epsilon = epsilon;
  s.delta = delta;
  s.max_candidates = max_candidates;
  s.max_synonyms = max_synonyms;
  s.use_ranking = use_ranking;
  s.seed = seed.value_or(0);
  s.sample = sample;
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

struct Job {
  std::size_t sentence = 0;
  EntitySpan span;
};

struct Worker {
  std::unique_ptr<ModelClient> client;
  std::unique_ptr<SimilarityScorer> scorer;
};

}  // namespace

RunOutcome run_attack(const RunConfig& cfg, const EndpointFactory& factory) {
  cfg.validate();
  const std::uint64_t seed = *cfg.seed;
  const ConfigSnapshot snapshot = cfg.snapshot();

  const auto test = read_conll_file(cfg.test, cfg.columns);
  EntityInventory inventory;
  if (cfg.mode == AttackMode::Entity) {
    std::vector<TaggedSentence> pool;
    for (const auto& path : cfg.train) {
      auto part = read_conll_file(path, cfg.columns);
      pool.insert(pool.end(), part.begin(), part.end());
    }
    for (const auto& path : cfg.dev) {
      auto part = read_conll_file(path, cfg.columns);
      pool.insert(pool.end(), part.begin(), part.end());
    }
    inventory = build_inventory(pool);
  }

  std::optional<VectorStore> store;
  if (cfg.vectors) store = load_vectors(*cfg.vectors);

  auto make_worker = [&]() {
    Worker w;
    w.client = std::make_unique<ModelClient>(factory(), cfg.max_batch);
    w.client->handshake();
    w.scorer = std::make_unique<SimilarityScorer>(w.client.get(), store ? &*store : nullptr);
    if (cfg.mode == AttackMode::Context && !w.client->has(Capability::Pos)) {
      throw ConfigError("context mode needs an adapter with the pos capability");
    }
    return w;
  };
  Worker main = make_worker();

  RunOutcome outcome;
  const auto sample = select_eligible(test, cfg.sample, seed, main.client.get());
  outcome.sentences = sample.size();

  std::vector<Tokens> batch;
  batch.reserve(sample.size());
  for (const auto& s : sample) batch.push_back(s.tokens);
  const auto originals = main.client->predict_batch(batch);

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Labels predicted = predicted_labels(originals[i]);
    for (auto& span : extract_spans(sample[i])) {
      ++outcome.entities_total;
      bool correct = true;
      for (std::size_t t = span.start; t < span.end; ++t) {
        if (!token_correct(sample[i].gold[t], predicted[t])) correct = false;
      }
      if (correct) jobs.push_back({i, std::move(span)});
    }
  }

  EntityAttackConfig ecfg{cfg.epsilon, cfg.max_candidates, seed};
  ContextAttackConfig ccfg{cfg.epsilon, cfg.delta, cfg.max_synonyms, cfg.use_ranking, seed};

  std::vector<AttackRecord> records(jobs.size());
  auto run_job = [&](Worker& w, std::size_t k) {
    const auto& job = jobs[k];
    const auto& sentence = sample[job.sentence];
    AttackRecord rec;
    rec.mode = cfg.mode;
    rec.sentence_id = sentence.id;
    rec.tokens = sentence.tokens;
    rec.gold = sentence.gold;
    rec.span = job.span;
    rec.model_id = cfg.adapter;
    rec.config = snapshot;
    if (cfg.mode == AttackMode::Entity) {
      auto res = attack_entity(sentence, job.span, inventory, *w.client, *w.scorer, ecfg);
      rec.original_frequency = inventory.count(job.span.type, job.span.surface);
      if (res.replacement) rec.replacement_frequency = inventory.count(job.span.type, *res.replacement);
      rec.result = std::move(res);
    } else {
      rec.result = attack_context(sentence, job.span, *w.client, *store, *w.scorer, ccfg);
    }
    if (rec.aborted()) {
      std::clog << "warning: attack on sentence " << rec.sentence_id << " span " << job.span.start
                << " aborted: "
                << std::visit([](const auto& r) { return *r.aborted; }, rec.result) << "\n";
    }
    records[k] = std::move(rec);
  };

  const std::size_t workers = std::min(cfg.jobs, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_job(main, k);
  } else {
    std::vector<Worker> pool;
    pool.push_back(std::move(main));
    for (std::size_t i = 1; i < workers; ++i) pool.push_back(make_worker());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> threads;
    for (auto& w : pool) {
      threads.emplace_back([&, wp = &w]() {
        try {
          for (std::size_t k = next++; k < jobs.size(); k = next++) run_job(*wp, k);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = jobs.size();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  outcome.records = std::move(records);
  outcome.report = aggregate(outcome.records);
  if (outcome.records.empty()) {
    // Nothing to aggregate, but the report still names its cell.
    outcome.report.mode = cfg.mode;
    outcome.report.model_id = cfg.adapter;
    outcome.report.config = snapshot;
  }
  if (!cfg.out.empty()) write_records_file(cfg.out, outcome.records, utc_timestamp());
  return outcome;
}

RunOutcome run_attack(const RunConfig& cfg) {
  return run_attack(cfg, [&]() { return make_endpoint(cfg.adapter); });
}

AblationOutcome run_ablation(const RunConfig& cfg, const EndpointFactory& factory) {
  if (cfg.mode != AttackMode::Context) throw ConfigError("ablation runs the context attack");
  AblationOutcome out;
  RunConfig ranked = cfg;
  ranked.use_ranking = true;
  RunConfig random = cfg;
  random.use_ranking = false;
  if (!cfg.out.empty()) {
    ranked.out = cfg.out + ".ranked.jsonl";
    random.out = cfg.out + ".random.jsonl";
  }
  out.ranked = run_attack(ranked, factory);
  out.random = run_attack(random, factory);
  out.table = ablation_compare(out.ranked.report, out.random.report);
  return out;
}

std::vector<std::vector<AttackRecord>> group_by_cell(const std::vector<AttackRecord>& records) {
  std::vector<std::vector<AttackRecord>> groups;
  for (const auto& rec : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      const auto& f = g.front();
      return f.mode == rec.mode && f.model_id == rec.model_id && f.config == rec.config;
    });
    if (it == groups.end()) {
      groups.push_back({rec});
    } else {
      it->push_back(rec);
    }
  }
  return groups;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

AnnotationExport export_annotation(const std::vector<AttackRecord>& records, std::size_t n,
                                   std::uint64_t seed) {
  if (n == 0) throw ConfigError("annotation export needs n >= 1");

  // One adversarial candidate per source sentence, first successful record wins.
  std::vector<const AttackRecord*> adversarial;
  std::set<std::string> adv_ids;
  std::vector<std::string> all_ids;
  std::map<std::string, const AttackRecord*> by_id;
  for (const auto& rec : records) {
    if (by_id.emplace(rec.sentence_id, &rec).second) all_ids.push_back(rec.sentence_id);
    if (!(rec.success() || rec.partial())) continue;
    if (adv_ids.insert(rec.sentence_id).second) adversarial.push_back(&rec);
  }
  if (adversarial.size() < n) {
    throw ConfigError("annotation export: need " + std::to_string(n) +
                      " successful records from distinct sentences, have " +
                      std::to_string(adversarial.size()));
  }

  Rng rng(mix_seed(seed, 0x616e6e6fULL));
  auto chosen_adv = sample_without_replacement(adversarial, n, rng);
  std::set<std::string> used;
  for (const auto* r : chosen_adv) used.insert(r->sentence_id);

  std::vector<std::string> original_pool;
  for (const auto& id : all_ids) {
    if (!used.count(id)) original_pool.push_back(id);
  }
  if (original_pool.size() < n) {
    throw ConfigError("annotation export: need " + std::to_string(n) +
                      " further sentences for originals, have " +
                      std::to_string(original_pool.size()));
  }
  auto chosen_orig = sample_without_replacement(original_pool, n, rng);

  struct Row {
    std::string sentence;
    std::string source;
    std::string sentence_id;
  };
  std::vector<Row> rows;
  for (const auto* r : chosen_adv) {
    const Tokens& adv = r->mode == AttackMode::Entity ? *r->entity().adversarial_tokens
                                                      : r->context().adversarial_tokens;
    rows.push_back({join(adv), "adversarial", r->sentence_id});
  }
  for (const auto& id : chosen_orig) rows.push_back({join(by_id.at(id)->tokens), "original", id});
  shuffle(rows, rng);

  AnnotationExport out;
  out.items_csv = "id,sentence\n";
  out.key_csv = "id,source,sentence_id\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "item-%04zu", i + 1);
    out.items_csv += std::string(id) + "," + csv_escape(rows[i].sentence) + "\n";
    out.key_csv += std::string(id) + "," + rows[i].source + "," + csv_escape(rows[i].sentence_id) + "\n";
  }
  return out;
}

}  // namespace nerbreaker
