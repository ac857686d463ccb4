#include "nerbreaker/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace nerbreaker {

using nlohmann::json;

std::string mode_name(AttackMode m) { return m == AttackMode::Entity ? "entity" : "context"; }

AttackMode parse_mode(const std::string& s) {
  if (s == "entity") return AttackMode::Entity;
  if (s == "context") return AttackMode::Context;
  throw ConfigError("unknown mode '" + s + "' (want entity or context)");
}

bool AttackRecord::aborted() const {
  return std::visit([](const auto& r) { return r.aborted.has_value(); }, result);
}

bool AttackRecord::success() const {
  if (aborted()) return false;
  if (mode == AttackMode::Entity) return entity().success();
  return context().verdict.status == AttackStatus::Full;
}

bool AttackRecord::partial() const {
  return mode == AttackMode::Context && !aborted() &&
         context().verdict.status == AttackStatus::Partial;
}

std::optional<ErrorClass> AttackRecord::error_class() const {
  if (!success()) return std::nullopt;
  if (mode == AttackMode::Entity) return entity().error_class;
  return context().verdict.error_class;
}

std::optional<double> AttackRecord::similarity() const {
  if (mode == AttackMode::Entity) return entity().similarity;
  if (success() || partial()) return context().similarity;
  return std::nullopt;
}

std::size_t AttackRecord::perturbation_count() const {
  if (mode == AttackMode::Entity) return entity().success() ? 1 : 0;
  return context().perturbations.size();
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

MetricsReport aggregate(const std::vector<AttackRecord>& records) {
  MetricsReport r;
  if (records.empty()) return r;
  r.mode = records.front().mode;
  r.model_id = records.front().model_id;
  r.config = records.front().config;
  for (const auto& rec : records) {
    if (rec.mode != r.mode || rec.model_id != r.model_id || rec.config != *r.config) {
      throw ConfigError("aggregate: records mix modes, models or configurations");
    }
  }

  std::size_t missed = 0;
  std::size_t type_err = 0;
  std::size_t single = 0;
  std::vector<double> sims;
  std::vector<double> perturbed;
  for (const auto& rec : records) {
    ++r.n_entities_correct_originally;
    if (rec.aborted()) {
      ++r.n_aborted;
      continue;
    }
    ++r.n_entities_attacked;
    if (rec.success()) {
      ++r.n_success;
      if (auto ec = rec.error_class()) (*ec == ErrorClass::MissedEntity ? missed : type_err)++;
    }
    if (rec.partial()) ++r.n_partial;
    if (auto s = rec.similarity()) sims.push_back(*s);
    if (rec.mode == AttackMode::Context) {
      const auto& c = rec.context();
      if (!c.perturbations.empty()) perturbed.push_back(c.words_perturbed_pct);
      if ((rec.success() || rec.partial()) && c.perturbations.size() == 1) ++single;
    }
  }

  r.success_rate_pct = pct(r.n_success, r.n_entities_correct_originally);
  if (missed + type_err > 0) {
    r.missed_entity_pct = pct(missed, missed + type_err);
    r.type_error_pct = pct(type_err, missed + type_err);
  }
  if (!sims.empty()) r.median_similarity = median(sims);
  if (r.mode == AttackMode::Context) {
    r.partial_success_rate_pct = pct(r.n_partial, r.n_entities_correct_originally);
    if (!perturbed.empty()) {
      double sum = 0.0;
      for (double v : perturbed) sum += v;
      r.words_perturbed_pct = sum / static_cast<double>(perturbed.size());
    }
    const std::size_t fooled = r.n_success + r.n_partial;
    if (fooled > 0) r.single_change_pct = pct(single, fooled);
  }
  return r;
}

long perturbation_distance(const EntitySpan& span, std::size_t position) {
  if (position < span.start) {
    return static_cast<long>(position) - static_cast<long>(span.start);
  }
  if (position >= span.end) {
    return static_cast<long>(position) - static_cast<long>(span.end - 1);
  }
  throw std::invalid_argument("perturbation inside the entity span");
}

std::map<long, std::size_t> distance_histogram(const std::vector<AttackRecord>& records) {
  std::map<long, std::size_t> hist;
  for (const auto& rec : records) {
    if (rec.mode != AttackMode::Context || !(rec.success() || rec.partial())) continue;
    for (const auto& p : rec.context().perturbations) {
      ++hist[perturbation_distance(rec.span, p.position)];
    }
  }
  return hist;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const std::size_t n = n1 + n2;

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : x) pooled.emplace_back(v, 0);
  for (double v : y) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  double rank_sum_x = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_x += midrank;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  MannWhitneyResult res;
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(n);
  res.u = rank_sum_x - dn1 * (dn1 + 1.0) / 2.0;
  const double mu = dn1 * dn2 / 2.0;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (n < 2 || var <= 0.0) {
    res.z = 0.0;
    res.p_value = 1.0;
    return res;
  }
  res.z = (res.u - mu) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(std::fabs(res.z) / std::sqrt(2.0)));
  return res;
}

FrequencyComparison frequency_comparison(const std::vector<AttackRecord>& records,
                                         const EntityInventory* inventory) {
  std::vector<double> orig;
  std::vector<double> repl;
  for (const auto& rec : records) {
    if (rec.mode != AttackMode::Entity || !rec.success()) continue;
    const auto& e = rec.entity();
    if (inventory != nullptr) {
      orig.push_back(static_cast<double>(inventory->count(rec.span.type, rec.span.surface)));
      repl.push_back(static_cast<double>(inventory->count(rec.span.type, *e.replacement)));
    } else {
      if (!rec.original_frequency || !rec.replacement_frequency) continue;
      orig.push_back(static_cast<double>(*rec.original_frequency));
      repl.push_back(static_cast<double>(*rec.replacement_frequency));
    }
  }
  FrequencyComparison f;
  f.n = orig.size();
  if (f.n == 0) return f;
  f.median_original = median(orig);
  f.median_replacement = median(repl);
  if (f.n >= 2) f.test = mann_whitney_u(orig, repl);
  return f;
}

std::map<std::string, SentenceStats> sentence_statistics(const std::vector<AttackRecord>& records) {
  struct Sum {
    std::size_t count = 0;
    double length = 0, eligible = 0, entity = 0;
  };
  std::map<std::string, Sum> sums;
  for (const auto& rec : records) {
    if (rec.mode != AttackMode::Context || rec.aborted()) continue;
    auto& s = sums[(rec.success() || rec.partial()) ? "success" : "failed"];
    ++s.count;
    s.length += static_cast<double>(rec.tokens.size());
    s.eligible += static_cast<double>(rec.context().synonym_eligible_words);
    s.entity += static_cast<double>(rec.span.length());
  }
  std::map<std::string, SentenceStats> out;
  for (const auto& [key, s] : sums) {
    const double n = static_cast<double>(s.count);
    out[key] = SentenceStats{s.count, s.length / n, s.eligible / n, s.entity / n};
  }
  return out;
}

std::vector<AblationRow> ablation_compare(const MetricsReport& ranked, const MetricsReport& random) {
  if (ranked.mode != random.mode || ranked.model_id != random.model_id) {
    throw ConfigError("ablation: reports come from different modes or models");
  }
  if (ranked.config.has_value() != random.config.has_value()) {
    throw ConfigError("ablation: only one report carries a configuration");
  }
  if (ranked.config) {
    auto a = *ranked.config;
    auto b = *random.config;
    a.use_ranking = b.use_ranking = true;
    if (a != b) throw ConfigError("ablation: configurations differ beyond the ranking flag");
  }
  auto row = [](std::string name, std::optional<double> x, std::optional<double> y) {
    AblationRow r{std::move(name), x, y, std::nullopt};
    if (x && y) r.delta = *x - *y;
    return r;
  };
  return {
      row("success_rate_pct", ranked.success_rate_pct, random.success_rate_pct),
      row("partial_success_rate_pct", ranked.partial_success_rate_pct,
          random.partial_success_rate_pct),
      row("median_similarity", ranked.median_similarity, random.median_similarity),
      row("words_perturbed_pct", ranked.words_perturbed_pct, random.words_perturbed_pct),
  };
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(const std::optional<double>& v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

}  // namespace

json config_to_json(const ConfigSnapshot& c) {
  return json{{"mode", mode_name(c.mode)},
              {"epsilon", c.epsilon},
              {"delta", c.delta},
              {"max_candidates", c.max_candidates},
              {"max_synonyms", c.max_synonyms},
              {"use_ranking", c.use_ranking},
              {"seed", c.seed},
              {"sample", c.sample}};
}

ConfigSnapshot config_from_json(const json& j) {
  ConfigSnapshot c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.epsilon = j.at("epsilon").get<double>();
  c.delta = j.at("delta").get<double>();
  c.max_candidates = j.at("max_candidates").get<std::size_t>();
  c.max_synonyms = j.at("max_synonyms").get<std::size_t>();
  c.use_ranking = j.at("use_ranking").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sample = j.at("sample").get<std::size_t>();
  return c;
}

json report_to_json(const MetricsReport& r) {
  return json{{"mode", mode_name(r.mode)},
              {"model_id", r.model_id},
              {"config", r.config ? config_to_json(*r.config) : json(nullptr)},
              {"n_entities_correct_originally", r.n_entities_correct_originally},
              {"n_entities_attacked", r.n_entities_attacked},
              {"n_aborted", r.n_aborted},
              {"n_success", r.n_success},
              {"n_partial", r.n_partial},
              {"success_rate_pct", r.success_rate_pct},
              {"partial_success_rate_pct", opt(r.partial_success_rate_pct)},
              {"missed_entity_pct", r.missed_entity_pct},
              {"type_error_pct", r.type_error_pct},
              {"median_similarity", opt(r.median_similarity)},
              {"words_perturbed_pct", opt(r.words_perturbed_pct)},
              {"single_change_pct", opt(r.single_change_pct)}};
}

std::string report_to_text(const MetricsReport& r) {
  std::ostringstream out;
  auto line = [&](const std::string& name, const std::string& value) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-28s %12s\n", name.c_str(), value.c_str());
    out << buf;
  };
  line("Mode", mode_name(r.mode));
  line("Model", r.model_id.empty() ? "-" : r.model_id);
  line("Entities (correct at start)", std::to_string(r.n_entities_correct_originally));
  line("Aborted attacks", std::to_string(r.n_aborted));
  line("Success rate (%)", fmt(r.success_rate_pct, 1));
  line("-- Missed entity (%)", fmt(r.missed_entity_pct, 1));
  line("-- Entity type error (%)", fmt(r.type_error_pct, 1));
  if (r.mode == AttackMode::Context) line("Partial success rate (%)", fmt(r.partial_success_rate_pct, 1));
  line("Median semantic similarity", fmt(r.median_similarity, 3));
  if (r.mode == AttackMode::Context) {
    line("Words perturbed (%)", fmt(r.words_perturbed_pct, 1));
    line("Single change (%)", fmt(r.single_change_pct, 1));
  }
  return out.str();
}

std::string histogram_to_csv(const std::map<long, std::size_t>& histogram) {
  std::string out = "distance,count\n";
  for (const auto& [d, c] : histogram) out += std::to_string(d) + "," + std::to_string(c) + "\n";
  return out;
}

std::string ablation_to_text(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-26s %10s %10s %10s\n", "Metric", "Ranked", "Random", "Delta");
  out << buf;
  for (const auto& r : rows) {
    const int dec = r.metric == "median_similarity" ? 3 : 1;
    std::snprintf(buf, sizeof buf, "%-26s %10s %10s %10s\n", r.metric.c_str(),
                  fmt(r.ranked, dec).c_str(), fmt(r.random, dec).c_str(), fmt(r.delta, dec).c_str());
    out << buf;
  }
  return out.str();
}

json ablation_to_json(const std::vector<AblationRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back(json{{"metric", r.metric},
                       {"ranked", opt(r.ranked)},
                       {"random", opt(r.random)},
                       {"delta", opt(r.delta)}});
  }
  return arr;
}

json frequency_to_json(const FrequencyComparison& f) {
  json j{{"n", f.n},
         {"median_original", opt(f.median_original)},
         {"median_replacement", opt(f.median_replacement)}};
  if (f.test) {
    j["u_statistic"] = f.test->u;
    j["z"] = f.test->z;
    j["p_value"] = f.test->p_value;
  } else {
    j["u_statistic"] = nullptr;
    j["p_value"] = nullptr;
  }
  return j;
}

json sentence_stats_to_json(const std::map<std::string, SentenceStats>& stats) {
  json j = json::object();
  for (const auto& [k, s] : stats) {
    j[k] = json{{"count", s.count},
                {"mean_sentence_length", s.mean_sentence_length},
                {"mean_synonym_eligible_words", s.mean_synonym_eligible_words},
                {"mean_entity_length", s.mean_entity_length}};
  }
  return j;
}

}  // namespace nerbreaker
