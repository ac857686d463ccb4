#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nerbreaker/context_attack.hpp"
#include "nerbreaker/corpus.hpp"
#include "nerbreaker/entity_attack.hpp"

namespace nerbreaker {

enum class AttackMode { Entity, Context };

std::string mode_name(AttackMode m);
AttackMode parse_mode(const std::string& s);

/// Settings that define one experimental cell.
struct ConfigSnapshot {
  AttackMode mode = AttackMode::Entity;
  double epsilon = 0.8;
  double delta = 0.5;
  std::size_t max_candidates = 50;
  std::size_t max_synonyms = 50;
  bool use_ranking = true;
  std::uint64_t seed = 0;
  std::size_t sample = 500;

  bool operator==(const ConfigSnapshot&) const = default;
};

struct AttackRecord {
  AttackMode mode = AttackMode::Entity;
  std::string sentence_id;
  Tokens tokens;
  Labels gold;
  EntitySpan span;
  std::string model_id;
  ConfigSnapshot config;
  std::variant<EntityAttackResult, ContextAttackResult> result;
  /// Entity mode: inventory counts of the original and chosen surfaces.
  std::optional<std::size_t> original_frequency;
  std::optional<std::size_t> replacement_frequency;

  const EntityAttackResult& entity() const { return std::get<EntityAttackResult>(result); }
  const ContextAttackResult& context() const { return std::get<ContextAttackResult>(result); }

  bool aborted() const;
  /// Entity mode: a replacement was emitted. Context mode: Full verdict.
  bool success() const;
  bool partial() const;  ///< context mode Partial verdict
  std::optional<ErrorClass> error_class() const;  ///< for successes
  std::optional<double> similarity() const;       ///< of the emitted sentence
  std::size_t perturbation_count() const;
};

struct MetricsReport {
  AttackMode mode = AttackMode::Entity;
  std::string model_id;
  std::optional<ConfigSnapshot> config;

  std::size_t n_entities_correct_originally = 0;  ///< records
  std::size_t n_entities_attacked = 0;            ///< records not aborted
  std::size_t n_aborted = 0;
  std::size_t n_success = 0;
  std::size_t n_partial = 0;

  double success_rate_pct = 0.0;
  std::optional<double> partial_success_rate_pct;  ///< context mode only
  double missed_entity_pct = 0.0;
  double type_error_pct = 0.0;
  std::optional<double> median_similarity;
  std::optional<double> words_perturbed_pct;  ///< context mode only
  std::optional<double> single_change_pct;    ///< context mode only

  bool operator==(const MetricsReport&) const = default;
};

/// Records must come from a single (model, mode, config) cell.
MetricsReport aggregate(const std::vector<AttackRecord>& records);

/// Signed distance of each perturbation in a Full/Partial context record to
/// the entity: negative left of the span start, positive right of its end.
std::map<long, std::size_t> distance_histogram(const std::vector<AttackRecord>& records);
long perturbation_distance(const EntitySpan& span, std::size_t position);

struct MannWhitneyResult {
  double u = 0.0;  ///< for the first sample
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided test via the normal approximation with tie correction (no
/// continuity correction). Both samples must be non-empty.
MannWhitneyResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y);

struct FrequencyComparison {
  std::size_t n = 0;
  std::optional<double> median_original;
  std::optional<double> median_replacement;
  std::optional<MannWhitneyResult> test;  ///< absent with fewer than 2 successes
};

/// Training/dev frequency of original vs chosen replacement entities over
/// successful entity-mode records. With no inventory the counts stored in
/// the records are used.
FrequencyComparison frequency_comparison(const std::vector<AttackRecord>& records,
                                         const EntityInventory* inventory = nullptr);

struct SentenceStats {
  std::size_t count = 0;
  double mean_sentence_length = 0.0;
  double mean_synonym_eligible_words = 0.0;
  double mean_entity_length = 0.0;
};

/// Keys "success" (Full or Partial) and "failed"; empty groups are absent.
std::map<std::string, SentenceStats> sentence_statistics(const std::vector<AttackRecord>& records);

struct AblationRow {
  std::string metric;
  std::optional<double> ranked;
  std::optional<double> random;
  std::optional<double> delta;  ///< ranked - random
};

/// Side-by-side ranked vs random-order context metrics. Throws ConfigError
/// when the two cells differ in anything but the ranking flag.
std::vector<AblationRow> ablation_compare(const MetricsReport& ranked, const MetricsReport& random);

double median(std::vector<double> values);

nlohmann::json config_to_json(const ConfigSnapshot& config);
ConfigSnapshot config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const MetricsReport& report);
std::string report_to_text(const MetricsReport& report);
std::string histogram_to_csv(const std::map<long, std::size_t>& histogram);
std::string ablation_to_text(const std::vector<AblationRow>& rows);
nlohmann::json ablation_to_json(const std::vector<AblationRow>& rows);
nlohmann::json frequency_to_json(const FrequencyComparison& f);
nlohmann::json sentence_stats_to_json(const std::map<std::string, SentenceStats>& stats);

}  // namespace nerbreaker
