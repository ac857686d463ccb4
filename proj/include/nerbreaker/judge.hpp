#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "nerbreaker/corpus.hpp"

namespace nerbreaker {

enum class AttackStatus { Full, Partial, Failed };
enum class ErrorClass { MissedEntity, TypeError };

std::string status_name(AttackStatus s);
AttackStatus parse_status(const std::string& s);
std::string error_class_name(ErrorClass e);
ErrorClass parse_error_class(const std::string& s);

struct EntityVerdict {
  AttackStatus status = AttackStatus::Failed;
  std::size_t wrong_tokens = 0;
  std::size_t total_tokens = 0;
  std::optional<ErrorClass> error_class;  ///< set iff status == Full

  bool operator==(const EntityVerdict&) const = default;
};

/// Exact match, or gold I-T predicted as B-T (same type).
bool token_correct(const Label& gold, const Label& predicted);

/// Full when every token is wrong, Partial when at least ceil(n/2) are,
/// Failed otherwise. A Full verdict is MissedEntity when every wrong token
/// was predicted O and TypeError otherwise (mixed cases included).
EntityVerdict judge_entity(const EntitySpan& span, const Labels& gold, const Labels& predicted);

/// MissedEntity iff every incorrect token in the span was predicted O;
/// nullopt when no token is wrong.
std::optional<ErrorClass> classify_errors(const EntitySpan& span, const Labels& gold,
                                          const Labels& predicted);

}  // namespace nerbreaker
