#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nerbreaker/adapter.hpp"
#include "nerbreaker/corpus.hpp"
#include "nerbreaker/judge.hpp"
#include "nerbreaker/similarity.hpp"

namespace nerbreaker {

struct EntityAttackConfig {
  double epsilon = 0.8;
  std::size_t max_candidates = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One sampled replacement and what happened to it.
struct CandidateEvaluation {
  Tokens surface;
  double similarity = 0.0;
  bool passed_filter = false;
  bool success = false;
};

struct EntityAttackResult {
  EntitySpan target;
  std::optional<Tokens> replacement;          ///< set iff an adversarial sentence was emitted
  std::optional<EntitySpan> replaced_span;    ///< the replacement's span in the new sentence
  std::optional<Tokens> adversarial_tokens;
  EntityVerdict verdict;                      ///< judged over the replaced span
  std::optional<ErrorClass> error_class;      ///< from the wrong tokens, when emitted
  std::optional<double> similarity;
  std::size_t candidates_tried = 0;
  std::size_t queries_used = 0;
  std::vector<CandidateEvaluation> evaluations;
  std::optional<std::string> aborted;

  bool success() const { return replacement.has_value(); }
};

/// Replaces the span's tokens with `replacement`, relabelling them B-type
/// I-type*. POS of the new tokens copies the span's first POS tag.
std::pair<TaggedSentence, EntitySpan> splice(const TaggedSentence& sentence,
                                             const EntitySpan& span, const Tokens& replacement);

/// Replace the entity with sampled same-type entities from the inventory;
/// keep candidates with similarity >= epsilon that leave at least one
/// replacement token mislabelled, and emit the most similar one.
EntityAttackResult attack_entity(const TaggedSentence& sentence, const EntitySpan& span,
                                 const EntityInventory& inventory, ModelClient& client,
                                 SimilarityScorer& similarity, const EntityAttackConfig& cfg);

/// Stream seed for one (sentence, entity) attack.
std::uint64_t attack_seed(std::uint64_t seed, const std::string& sentence_id, std::size_t start);

}  // namespace nerbreaker
