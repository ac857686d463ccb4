#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nerbreaker/adapter.hpp"
#include "nerbreaker/corpus.hpp"
#include "nerbreaker/judge.hpp"
#include "nerbreaker/lexical.hpp"
#include "nerbreaker/similarity.hpp"

namespace nerbreaker {

struct ContextAttackConfig {
  double epsilon = 0.8;
  double delta = 0.5;
  std::size_t max_synonyms = 50;
  bool use_importance_ranking = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ImportanceEntry {
  std::size_t position = 0;
  std::optional<double> importance;  ///< unset when ranking is ablated
};

struct Perturbation {
  std::size_t position = 0;
  std::string original;
  std::string replacement;
  std::size_t rank = 0;  ///< 1-based order of application

  bool operator==(const Perturbation&) const = default;
};

struct ContextAttackResult {
  EntitySpan target;
  std::vector<Perturbation> perturbations;
  EntityVerdict verdict;
  double similarity = 1.0;
  double words_perturbed_pct = 0.0;
  std::size_t out_of_mention_count = 0;
  std::size_t eligible_words = 0;          ///< outside entities, not stopwords
  std::size_t synonym_eligible_words = 0;  ///< eligible and with >= 1 synonym above delta
  std::size_t queries_used = 0;
  Tokens adversarial_tokens;
  std::optional<std::string> aborted;
};

/// Score the model gives the gold label. For a gold I-T token B-T is also
/// correct, so the larger of the two counts.
double correct_label_score(const Label& gold, const TokenPrediction& prediction);

/// Positions outside every gold entity that are not stopwords.
std::vector<std::size_t> eligible_positions(const Tokens& tokens, const Labels& gold);

/// Tokens outside every gold entity span (stopwords included).
std::size_t out_of_mention_count(const Tokens& tokens, const Labels& gold);

/// Importance of deleting `position` for labelling `span`, given the
/// predictions for the full sentence and for the sentence without that word.
/// Per entity token: the drop in correct-label score, plus, when the token is
/// no longer labelled correctly, the gain of the label it now gets.
double importance_from_predictions(const Labels& gold, const EntitySpan& span,
                                   std::size_t position, const SentencePrediction& full,
                                   const SentencePrediction& deleted);

/// Queries the model for both sentences (no caching).
double token_importance(ModelClient& client, const Tokens& tokens, const Labels& gold,
                        const EntitySpan& span, std::size_t position);

/// Ranking of eligible positions: by importance descending (ties by
/// position), or a seeded shuffle when ranking is disabled. `full` is the
/// prediction for the unmodified sentence.
std::vector<ImportanceEntry> rank_words(ModelClient& client, const Tokens& tokens,
                                        const Labels& gold, const EntitySpan& span,
                                        const SentencePrediction& full,
                                        const ContextAttackConfig& cfg, std::uint64_t shuffle_seed);

struct ContextCandidate {
  SynonymCandidate synonym;
  std::string surface;  ///< synonym with the original word's capitalization
  Tokens sentence;      ///< current sentence with the substitution applied
  double similarity = 0.0;
};

/// Synonyms of current[position] above delta (capped) that keep the POS tag
/// the word has in `current` once substituted and re-tagged in context, and
/// keep similarity to `original` >= epsilon.
std::vector<ContextCandidate> candidate_synonyms(const VectorStore& store, ModelClient& client,
                                                 SimilarityScorer& similarity,
                                                 const Tokens& original, const Tokens& current,
                                                 std::size_t position,
                                                 const ContextAttackConfig& cfg);

struct SynonymChoice {
  std::size_t index = 0;  ///< into the candidate list
  SentencePrediction prediction;
};

/// One greedy substitution decision over all candidates (one batched predict):
///  (a) some candidate mislabels every unresolved token: highest similarity;
///  (b) some flip at least one: most flips, then lowest summed correct-label
///      score over the tokens still correct, then highest similarity;
///  (c) some lower the summed correct-label score of the unresolved tokens:
///      largest reduction, then highest similarity;
///  (d) nothing.
/// Remaining ties go to the earlier candidate.
std::optional<SynonymChoice> select_synonym(ModelClient& client, const Labels& gold,
                                            const std::vector<std::size_t>& unresolved,
                                            const SentencePrediction& current_prediction,
                                            const std::vector<ContextCandidate>& candidates);

/// Greedy synonym substitution around one entity until every entity token is
/// mislabelled or the ranking is exhausted.
ContextAttackResult attack_context(const TaggedSentence& sentence, const EntitySpan& span,
                                   ModelClient& client, const VectorStore& store,
                                   SimilarityScorer& similarity, const ContextAttackConfig& cfg);

}  // namespace nerbreaker
