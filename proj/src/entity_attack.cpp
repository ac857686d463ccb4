#include "nerbreaker/entity_attack.hpp"

#include <stdexcept>

#include "nerbreaker/random.hpp"

namespace nerbreaker {

void EntityAttackConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in (0, 1]");
  if (max_candidates < 1) throw ConfigError("max_candidates must be >= 1");
}

std::uint64_t attack_seed(std::uint64_t seed, const std::string& sentence_id, std::size_t start) {
  return mix_seed(seed, fnv1a64(sentence_id), start);
}

std::pair<TaggedSentence, EntitySpan> splice(const TaggedSentence& sentence,
                                             const EntitySpan& span, const Tokens& replacement) {
  if (replacement.empty()) throw std::invalid_argument("splice: empty replacement");
  if (span.end > sentence.size() || span.start >= span.end) {
    throw std::invalid_argument("splice: span out of range");
  }
  const auto first = static_cast<std::ptrdiff_t>(span.start);
  const auto last = static_cast<std::ptrdiff_t>(span.end);

  TaggedSentence out;
  out.id = sentence.id;
  out.tokens.assign(sentence.tokens.begin(), sentence.tokens.begin() + first);
  out.tokens.insert(out.tokens.end(), replacement.begin(), replacement.end());
  out.tokens.insert(out.tokens.end(), sentence.tokens.begin() + last, sentence.tokens.end());

  out.gold.assign(sentence.gold.begin(), sentence.gold.begin() + first);
  out.gold.push_back(Label::begin(span.type));
  for (std::size_t k = 1; k < replacement.size(); ++k) out.gold.push_back(Label::inside(span.type));
  out.gold.insert(out.gold.end(), sentence.gold.begin() + last, sentence.gold.end());

  if (sentence.pos) {
    const auto& pos = *sentence.pos;
    std::vector<std::string> tags(pos.begin(), pos.begin() + first);
    tags.insert(tags.end(), replacement.size(), pos[span.start]);
    tags.insert(tags.end(), pos.begin() + last, pos.end());
    out.pos = std::move(tags);
  }

  EntitySpan new_span;
  new_span.start = span.start;
  new_span.end = span.start + replacement.size();
  new_span.type = span.type;
  new_span.surface = replacement;
  return {std::move(out), std::move(new_span)};
}

EntityAttackResult attack_entity(const TaggedSentence& sentence, const EntitySpan& span,
                                 const EntityInventory& inventory, ModelClient& client,
                                 SimilarityScorer& similarity, const EntityAttackConfig& cfg) {
  cfg.validate();
  EntityAttackResult result;
  result.target = span;
  result.verdict.total_tokens = span.length();
  const std::size_t queries_before = client.queries();

  std::vector<Tokens> pool;
  if (auto it = inventory.by_type.find(span.type); it != inventory.by_type.end()) {
    for (const auto& [surface, count] : it->second) {
      if (surface != span.surface) pool.push_back(surface);
    }
  }
  if (pool.empty()) return result;

  Rng rng(attack_seed(cfg.seed, sentence.id, span.start));
  const auto sampled = sample_without_replacement(std::move(pool), cfg.max_candidates, rng);
  result.candidates_tried = sampled.size();

  try {
    std::vector<std::pair<TaggedSentence, EntitySpan>> spliced;
    std::vector<TokenPair> pairs;
    spliced.reserve(sampled.size());
    for (const auto& surface : sampled) {
      spliced.push_back(splice(sentence, span, surface));
      pairs.emplace_back(sentence.tokens, spliced.back().first.tokens);
    }
    const auto sims = similarity.score(pairs);

    std::vector<std::size_t> survivors;
    result.evaluations.resize(sampled.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
      result.evaluations[i].surface = sampled[i];
      result.evaluations[i].similarity = sims[i];
      result.evaluations[i].passed_filter = sims[i] >= cfg.epsilon;
      if (result.evaluations[i].passed_filter) survivors.push_back(i);
    }

    std::vector<Tokens> batch;
    batch.reserve(survivors.size());
    for (auto i : survivors) batch.push_back(spliced[i].first.tokens);
    const auto predictions = client.predict_batch(batch);

    std::optional<std::size_t> best;
    std::optional<Labels> best_labels;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      const std::size_t i = survivors[k];
      const auto& [cand, cand_span] = spliced[i];
      const Labels predicted = predicted_labels(predictions[k]);
      bool any_wrong = false;
      for (std::size_t t = cand_span.start; t < cand_span.end; ++t) {
        if (!token_correct(cand.gold[t], predicted[t])) any_wrong = true;
      }
      result.evaluations[i].success = any_wrong;
      if (any_wrong && (!best || sims[i] > sims[*best])) {
        best = i;
        best_labels = predicted;
      }
    }

    if (best) {
      const auto& [cand, cand_span] = spliced[*best];
      result.replacement = sampled[*best];
      result.replaced_span = cand_span;
      result.adversarial_tokens = cand.tokens;
      result.similarity = sims[*best];
      result.verdict = judge_entity(cand_span, cand.gold, *best_labels);
      result.error_class = classify_errors(cand_span, cand.gold, *best_labels);
    }
  } catch (const AdapterError& e) {
    result = EntityAttackResult{};
    result.target = span;
    result.verdict.total_tokens = span.length();
    result.candidates_tried = sampled.size();
    result.aborted = e.what();
  }
  result.queries_used = client.queries() - queries_before;
  return result;
}

}  // namespace nerbreaker
