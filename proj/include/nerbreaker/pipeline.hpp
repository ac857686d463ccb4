#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nerbreaker/adapter.hpp"
#include "nerbreaker/corpus.hpp"
#include "nerbreaker/evaluation.hpp"

namespace nerbreaker {

struct RunConfig {
  AttackMode mode = AttackMode::Entity;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::string test;
  std::string adapter;
  std::optional<std::string> vectors;
  double epsilon = 0.8;
  double delta = 0.5;
  std::size_t max_candidates = 50;
  std::size_t max_synonyms = 50;
  std::size_t sample = 500;
  std::optional<std::uint64_t> seed;  ///< required, no wall-clock default
  bool use_ranking = true;
  std::string out;
  std::size_t jobs = 1;
  std::size_t max_batch = 64;
  ColumnSpec columns;

  /// Throws ConfigError on out-of-range thresholds or a missing seed.
  void validate() const;
  ConfigSnapshot snapshot() const;
};

using EndpointFactory = std::function<std::unique_ptr<Endpoint>()>;

struct RunOutcome {
  std::vector<AttackRecord> records;
  MetricsReport report;
  std::size_t sentences = 0;        ///< sentences in the eligible sample
  std::size_t entities_total = 0;   ///< gold entities in the sample
};

/// Attack every initially-correct entity of an eligible test sample. Records
/// are ordered by (sentence id, span start) whatever the job count. When
/// cfg.out is set the records are written there as JSONL.
RunOutcome run_attack(const RunConfig& cfg, const EndpointFactory& factory);
RunOutcome run_attack(const RunConfig& cfg);

struct AblationOutcome {
  RunOutcome ranked;
  RunOutcome random;
  std::vector<AblationRow> table;
};

/// Runs the context attack with and without importance ranking. Output
/// files are <out>.ranked.jsonl and <out>.random.jsonl when cfg.out is set.
AblationOutcome run_ablation(const RunConfig& cfg, const EndpointFactory& factory);

/// Records grouped by experimental cell (mode, model, configuration), in
/// first-seen order.
std::vector<std::vector<AttackRecord>> group_by_cell(const std::vector<AttackRecord>& records);

struct AnnotationExport {
  std::string items_csv;  ///< id,sentence
  std::string key_csv;    ///< id,source,sentence_id
};

/// n original and n adversarial sentences for grammaticality judgement; no
/// source sentence contributes both an original and an adversarial item.
/// Rows are shuffled so the source is hidden from annotators.
AnnotationExport export_annotation(const std::vector<AttackRecord>& records, std::size_t n,
                                   std::uint64_t seed);

std::string csv_escape(const std::string& field);
std::string utc_timestamp();

}  // namespace nerbreaker
