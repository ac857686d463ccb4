#include "nerbreaker/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace nerbreaker {

using nlohmann::json;

namespace {

json labels_to_json(const Labels& labels) {
  json arr = json::array();
  for (const auto& l : labels) arr.push_back(l.str());
  return arr;
}

Labels labels_from_json(const json& j) {
  Labels out;
  for (const auto& s : j) out.push_back(Label::parse(s.get<std::string>()));
  return out;
}

json span_to_json(const EntitySpan& s) {
  return json{{"start", s.start}, {"end", s.end}, {"type", s.type}, {"surface", s.surface}};
}

EntitySpan span_from_json(const json& j) {
  EntitySpan s;
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.type = j.at("type").get<std::string>();
  s.surface = j.at("surface").get<Tokens>();
  return s;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

json verdict_to_json(const EntityVerdict& v) {
  return json{{"status", status_name(v.status)},
              {"wrong_tokens", v.wrong_tokens},
              {"total_tokens", v.total_tokens},
              {"error_class", v.error_class ? json(error_class_name(*v.error_class)) : json(nullptr)}};
}

EntityVerdict verdict_from_json(const json& j) {
  EntityVerdict v;
  v.status = parse_status(j.at("status").get<std::string>());
  v.wrong_tokens = j.at("wrong_tokens").get<std::size_t>();
  v.total_tokens = j.at("total_tokens").get<std::size_t>();
  if (auto ec = opt_from<std::string>(j, "error_class")) v.error_class = parse_error_class(*ec);
  return v;
}

json entity_result_to_json(const EntityAttackResult& r) {
  json cands = json::array();
  for (const auto& c : r.evaluations) {
    cands.push_back(json{{"surface", c.surface},
                         {"similarity", c.similarity},
                         {"passed_filter", c.passed_filter},
                         {"success", c.success}});
  }
  return json{{"verdict", verdict_to_json(r.verdict)},
              {"success", r.success()},
              {"replacement", opt(r.replacement)},
              {"replaced_span", r.replaced_span ? span_to_json(*r.replaced_span) : json(nullptr)},
              {"adversarial_tokens", opt(r.adversarial_tokens)},
              {"error_class", r.error_class ? json(error_class_name(*r.error_class)) : json(nullptr)},
              {"similarity", opt(r.similarity)},
              {"candidates_tried", r.candidates_tried},
              {"queries_used", r.queries_used},
              {"candidates", std::move(cands)},
              {"aborted", opt(r.aborted)}};
}

EntityAttackResult entity_result_from_json(const json& j, const EntitySpan& target) {
  EntityAttackResult r;
  r.target = target;
  r.verdict = verdict_from_json(j.at("verdict"));
  r.replacement = opt_from<Tokens>(j, "replacement");
  if (j.contains("replaced_span") && !j.at("replaced_span").is_null()) {
    r.replaced_span = span_from_json(j.at("replaced_span"));
  }
  r.adversarial_tokens = opt_from<Tokens>(j, "adversarial_tokens");
  if (auto ec = opt_from<std::string>(j, "error_class")) r.error_class = parse_error_class(*ec);
  r.similarity = opt_from<double>(j, "similarity");
  r.candidates_tried = j.at("candidates_tried").get<std::size_t>();
  r.queries_used = j.at("queries_used").get<std::size_t>();
  for (const auto& c : j.at("candidates")) {
    r.evaluations.push_back(CandidateEvaluation{c.at("surface").get<Tokens>(),
                                                c.at("similarity").get<double>(),
                                                c.at("passed_filter").get<bool>(),
                                                c.at("success").get<bool>()});
  }
  r.aborted = opt_from<std::string>(j, "aborted");
  return r;
}

json context_result_to_json(const ContextAttackResult& r) {
  json perts = json::array();
  for (const auto& p : r.perturbations) {
    perts.push_back(json{{"position", p.position},
                         {"original", p.original},
                         {"replacement", p.replacement},
                         {"rank", p.rank}});
  }
  return json{{"verdict", verdict_to_json(r.verdict)},
              {"perturbations", std::move(perts)},
              {"similarity", r.similarity},
              {"words_perturbed_pct", r.words_perturbed_pct},
              {"out_of_mention_count", r.out_of_mention_count},
              {"eligible_words", r.eligible_words},
              {"synonym_eligible_words", r.synonym_eligible_words},
              {"queries_used", r.queries_used},
              {"adversarial_tokens", r.adversarial_tokens},
              {"aborted", opt(r.aborted)}};
}

ContextAttackResult context_result_from_json(const json& j, const EntitySpan& target) {
  ContextAttackResult r;
  r.target = target;
  r.verdict = verdict_from_json(j.at("verdict"));
  for (const auto& p : j.at("perturbations")) {
    r.perturbations.push_back(Perturbation{p.at("position").get<std::size_t>(),
                                           p.at("original").get<std::string>(),
                                           p.at("replacement").get<std::string>(),
                                           p.at("rank").get<std::size_t>()});
  }
  r.similarity = j.at("similarity").get<double>();
  r.words_perturbed_pct = j.at("words_perturbed_pct").get<double>();
  r.out_of_mention_count = j.at("out_of_mention_count").get<std::size_t>();
  r.eligible_words = j.at("eligible_words").get<std::size_t>();
  r.synonym_eligible_words = j.at("synonym_eligible_words").get<std::size_t>();
  r.queries_used = j.at("queries_used").get<std::size_t>();
  r.adversarial_tokens = j.at("adversarial_tokens").get<Tokens>();
  r.aborted = opt_from<std::string>(j, "aborted");
  return r;
}

void check_version(const json& j, const std::string& where) {
  auto it = j.find("schema_version");
  if (it == j.end() || !it->is_string()) throw SchemaError(where + ": missing schema_version");
  const std::string v = it->get<std::string>();
  const std::string major = v.substr(0, v.find('.'));
  if (major != "1") {
    throw SchemaError(where + ": unsupported schema version " + v + " (this build reads 1.x)");
  }
}

}  // namespace

json record_to_json(const AttackRecord& rec) {
  json j{{"schema_version", kRecordSchemaVersion},
         {"mode", mode_name(rec.mode)},
         {"sentence_id", rec.sentence_id},
         {"model_id", rec.model_id},
         {"tokens", rec.tokens},
         {"gold", labels_to_json(rec.gold)},
         {"span", span_to_json(rec.span)},
         {"config", config_to_json(rec.config)},
         {"original_frequency", opt(rec.original_frequency)},
         {"replacement_frequency", opt(rec.replacement_frequency)}};
  if (rec.mode == AttackMode::Entity) {
    j["result"] = entity_result_to_json(rec.entity());
  } else {
    j["result"] = context_result_to_json(rec.context());
  }
  return j;
}

AttackRecord record_from_json(const json& j) {
  check_version(j, "record");
  AttackRecord rec;
  try {
    rec.mode = parse_mode(j.at("mode").get<std::string>());
    rec.sentence_id = j.at("sentence_id").get<std::string>();
    rec.model_id = j.at("model_id").get<std::string>();
    rec.tokens = j.at("tokens").get<Tokens>();
    rec.gold = labels_from_json(j.at("gold"));
    rec.span = span_from_json(j.at("span"));
    rec.config = config_from_json(j.at("config"));
    rec.original_frequency = opt_from<std::size_t>(j, "original_frequency");
    rec.replacement_frequency = opt_from<std::size_t>(j, "replacement_frequency");
    if (rec.mode == AttackMode::Entity) {
      rec.result = entity_result_from_json(j.at("result"), rec.span);
    } else {
      rec.result = context_result_from_json(j.at("result"), rec.span);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  } catch (const LabelError& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
  return rec;
}

std::string records_header(const std::string& created) {
  return json{{"header", true}, {"schema_version", kRecordSchemaVersion}, {"created", created}}
      .dump();
}

void write_records(std::ostream& out, const std::vector<AttackRecord>& records,
                   const std::string& created) {
  out << records_header(created) << '\n';
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

void write_records_file(const std::string& path, const std::vector<AttackRecord>& records,
                        const std::string& created) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_records(out, records, created);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

std::vector<AttackRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<AttackRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(source + ":" + std::to_string(line_no) + ": not JSON: " + e.what());
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (j.value("header", false)) {
      check_version(j, where);
      continue;
    }
    try {
      out.push_back(record_from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<AttackRecord> read_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  return read_records(in, path);
}

}  // namespace nerbreaker
