#include "nerbreaker/judge.hpp"

#include <stdexcept>

namespace nerbreaker {

std::string status_name(AttackStatus s) {
  switch (s) {
    case AttackStatus::Full:
      return "full";
    case AttackStatus::Partial:
      return "partial";
    case AttackStatus::Failed:
      return "failed";
  }
  return "failed";
}

AttackStatus parse_status(const std::string& s) {
  if (s == "full") return AttackStatus::Full;
  if (s == "partial") return AttackStatus::Partial;
  if (s == "failed") return AttackStatus::Failed;
  throw std::invalid_argument("unknown attack status '" + s + "'");
}

std::string error_class_name(ErrorClass e) {
  return e == ErrorClass::MissedEntity ? "missed_entity" : "type_error";
}

ErrorClass parse_error_class(const std::string& s) {
  if (s == "missed_entity") return ErrorClass::MissedEntity;
  if (s == "type_error") return ErrorClass::TypeError;
  throw std::invalid_argument("unknown error class '" + s + "'");
}

bool token_correct(const Label& gold, const Label& predicted) {
  if (predicted == gold) return true;
  return gold.kind() == LabelKind::Inside && predicted.kind() == LabelKind::Begin &&
         gold.type() == predicted.type();
}

std::optional<ErrorClass> classify_errors(const EntitySpan& span, const Labels& gold,
                                          const Labels& predicted) {
  bool any_wrong = false;
  bool all_outside = true;
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (token_correct(gold.at(i), predicted.at(i))) continue;
    any_wrong = true;
    if (!predicted[i].is_outside()) all_outside = false;
  }
  if (!any_wrong) return std::nullopt;
  return all_outside ? ErrorClass::MissedEntity : ErrorClass::TypeError;
}

EntityVerdict judge_entity(const EntitySpan& span, const Labels& gold, const Labels& predicted) {
  if (gold.size() != predicted.size() || span.end > gold.size() || span.start >= span.end) {
    throw std::invalid_argument("judge_entity: span and label sequences disagree");
  }
  EntityVerdict v;
  v.total_tokens = span.length();
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (!token_correct(gold.at(i), predicted.at(i))) ++v.wrong_tokens;
  }
  if (v.total_tokens > 0 && v.wrong_tokens == v.total_tokens) {
    v.status = AttackStatus::Full;
    v.error_class = classify_errors(span, gold, predicted);
  } else if (2 * v.wrong_tokens >= v.total_tokens && v.wrong_tokens > 0) {
    v.status = AttackStatus::Partial;
  } else {
    v.status = AttackStatus::Failed;
  }
  return v;
}

}  // namespace nerbreaker
