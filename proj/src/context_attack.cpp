#include "nerbreaker/context_attack.hpp"

#include <algorithm>

#include "nerbreaker/entity_attack.hpp"
#include "nerbreaker/random.hpp"
#include "nerbreaker/text.hpp"

namespace nerbreaker {

void ContextAttackConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in (0, 1]");
  if (!(delta >= -1.0 && delta < 1.0)) throw ConfigError("delta must be in [-1, 1)");
  if (max_synonyms < 1) throw ConfigError("max_synonyms must be >= 1");
}

double correct_label_score(const Label& gold, const TokenPrediction& prediction) {
  double s = prediction.score(gold);
  if (gold.kind() == LabelKind::Inside) {
    auto it = prediction.scores.find(Label::begin(gold.type()));
    if (it != prediction.scores.end()) s = std::max(s, it->second);
  }
  return s;
}

namespace {

std::vector<bool> inside_any_entity(const Tokens& tokens, const Labels& gold) {
  std::vector<bool> mask(tokens.size(), false);
  for (const auto& s : extract_spans(tokens, gold)) {
    for (std::size_t i = s.start; i < s.end; ++i) mask[i] = true;
  }
  return mask;
}

Tokens without(const Tokens& tokens, std::size_t position) {
  Tokens out;
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i != position) out.push_back(tokens[i]);
  }
  return out;
}

double summed_correct(const Labels& gold, const std::vector<std::size_t>& tokens,
                      const SentencePrediction& prediction) {
  double sum = 0.0;
  for (auto t : tokens) sum += correct_label_score(gold[t], prediction[t]);
  return sum;
}

}  // namespace

std::vector<std::size_t> eligible_positions(const Tokens& tokens, const Labels& gold) {
  const auto mask = inside_any_entity(tokens, gold);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!mask[i] && !is_stopword(tokens[i])) out.push_back(i);
  }
  return out;
}

std::size_t out_of_mention_count(const Tokens& tokens, const Labels& gold) {
  const auto mask = inside_any_entity(tokens, gold);
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), false));
}

double importance_from_predictions(const Labels& gold, const EntitySpan& span,
                                   std::size_t position, const SentencePrediction& full,
                                   const SentencePrediction& deleted) {
  double total = 0.0;
  for (std::size_t t = span.start; t < span.end; ++t) {
    const std::size_t shifted = position < t ? t - 1 : t;
    const auto& before = full.at(t);
    const auto& after = deleted.at(shifted);
    double contribution = correct_label_score(gold[t], before) - correct_label_score(gold[t], after);
    if (!token_correct(gold[t], after.predicted)) {
      const Label& wrong = after.predicted;
      contribution += after.score(wrong) - before.score(wrong);
    }
    total += contribution;
  }
  return total;
}

double token_importance(ModelClient& client, const Tokens& tokens, const Labels& gold,
                        const EntitySpan& span, std::size_t position) {
  if (span.contains(position)) throw std::invalid_argument("position lies inside the entity");
  auto preds = client.predict_batch({tokens, without(tokens, position)});
  return importance_from_predictions(gold, span, position, preds[0], preds[1]);
}

std::vector<ImportanceEntry> rank_words(ModelClient& client, const Tokens& tokens,
                                        const Labels& gold, const EntitySpan& span,
                                        const SentencePrediction& full,
                                        const ContextAttackConfig& cfg,
                                        std::uint64_t shuffle_seed) {
  const auto positions = eligible_positions(tokens, gold);
  std::vector<ImportanceEntry> ranking;
  ranking.reserve(positions.size());

  if (!cfg.use_importance_ranking) {
    auto order = positions;
    Rng rng(shuffle_seed);
    shuffle(order, rng);
    for (auto p : order) ranking.push_back({p, std::nullopt});
    return ranking;
  }

  std::vector<Tokens> deleted;
  deleted.reserve(positions.size());
  for (auto p : positions) deleted.push_back(without(tokens, p));
  const auto preds = client.predict_batch(deleted);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    ranking.push_back(
        {positions[k], importance_from_predictions(gold, span, positions[k], full, preds[k])});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    return *a.importance > *b.importance;
  });
  return ranking;
}

std::vector<ContextCandidate> candidate_synonyms(const VectorStore& store, ModelClient& client,
                                                 SimilarityScorer& similarity,
                                                 const Tokens& original, const Tokens& current,
                                                 std::size_t position,
                                                 const ContextAttackConfig& cfg) {
  const std::string& word = current.at(position);
  std::vector<ContextCandidate> cands;
  for (auto& syn : synonyms(store, word, cfg.delta, cfg.max_synonyms)) {
    ContextCandidate c;
    c.surface = match_case(syn.word, word);
    if (c.surface == word) continue;
    c.synonym = std::move(syn);
    c.sentence = current;
    c.sentence[position] = c.surface;
    cands.push_back(std::move(c));
  }
  if (cands.empty()) return cands;

  std::vector<Tokens> to_tag;
  to_tag.reserve(cands.size() + 1);
  to_tag.push_back(current);
  for (const auto& c : cands) to_tag.push_back(c.sentence);
  const auto tags = client.pos_tag(to_tag);
  const std::string& want = tags[0][position];

  std::vector<ContextCandidate> same_pos;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (tags[i + 1][position] == want) same_pos.push_back(std::move(cands[i]));
  }
  if (same_pos.empty()) return same_pos;

  std::vector<TokenPair> pairs;
  pairs.reserve(same_pos.size());
  for (const auto& c : same_pos) pairs.emplace_back(original, c.sentence);
  const auto sims = similarity.score(pairs);

  std::vector<ContextCandidate> out;
  for (std::size_t i = 0; i < same_pos.size(); ++i) {
    if (sims[i] < cfg.epsilon) continue;
    same_pos[i].similarity = sims[i];
    out.push_back(std::move(same_pos[i]));
  }
  return out;
}

std::optional<SynonymChoice> select_synonym(ModelClient& client, const Labels& gold,
                                            const std::vector<std::size_t>& unresolved,
                                            const SentencePrediction& current_prediction,
                                            const std::vector<ContextCandidate>& candidates) {
  if (candidates.empty() || unresolved.empty()) return std::nullopt;
  std::vector<Tokens> batch;
  batch.reserve(candidates.size());
  for (const auto& c : candidates) batch.push_back(c.sentence);
  auto preds = client.predict_batch(batch);

  struct Outcome {
    std::size_t flips = 0;
    double remaining = 0.0;  // summed correct score over unresolved tokens still correct
    double summed = 0.0;     // summed correct score over all unresolved tokens
  };
  std::vector<Outcome> outcomes(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (auto t : unresolved) {
      const double s = correct_label_score(gold[t], preds[i][t]);
      outcomes[i].summed += s;
      if (token_correct(gold[t], preds[i][t].predicted)) {
        outcomes[i].remaining += s;
      } else {
        ++outcomes[i].flips;
      }
    }
  }

  std::optional<std::size_t> best;
  auto pick = [&](auto eligible, auto better) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!eligible(i)) continue;
      if (!best || better(i, *best)) best = i;
    }
  };
  auto sim = [&](std::size_t i) { return candidates[i].similarity; };

  // (a) full flip of everything still unresolved
  pick([&](std::size_t i) { return outcomes[i].flips == unresolved.size(); },
       [&](std::size_t i, std::size_t b) { return sim(i) > sim(b); });

  // (b) partial flips
  if (!best) {
    pick([&](std::size_t i) { return outcomes[i].flips > 0; },
         [&](std::size_t i, std::size_t b) {
           if (outcomes[i].flips != outcomes[b].flips) return outcomes[i].flips > outcomes[b].flips;
           if (outcomes[i].remaining != outcomes[b].remaining) {
             return outcomes[i].remaining < outcomes[b].remaining;
           }
           return sim(i) > sim(b);
         });
  }

  // (c) score reduction
  if (!best) {
    const double baseline = summed_correct(gold, unresolved, current_prediction);
    pick([&](std::size_t i) { return outcomes[i].summed < baseline; },
         [&](std::size_t i, std::size_t b) {
           if (outcomes[i].summed != outcomes[b].summed) return outcomes[i].summed < outcomes[b].summed;
           return sim(i) > sim(b);
         });
  }

  if (!best) return std::nullopt;
  return SynonymChoice{*best, std::move(preds[*best])};
}

ContextAttackResult attack_context(const TaggedSentence& sentence, const EntitySpan& span,
                                   ModelClient& client, const VectorStore& store,
                                   SimilarityScorer& similarity, const ContextAttackConfig& cfg) {
  cfg.validate();
  if (!client.has(Capability::Pos)) {
    throw ConfigError("context attack needs an endpoint with the pos capability");
  }
  ContextAttackResult result;
  result.target = span;
  result.verdict.total_tokens = span.length();
  result.adversarial_tokens = sentence.tokens;
  result.out_of_mention_count = out_of_mention_count(sentence.tokens, sentence.gold);
  const auto eligible = eligible_positions(sentence.tokens, sentence.gold);
  result.eligible_words = eligible.size();
  for (auto p : eligible) {
    if (!synonyms(store, sentence.tokens[p], cfg.delta, 1).empty()) ++result.synonym_eligible_words;
  }
  const std::size_t queries_before = client.queries();

  try {
    const Tokens& original = sentence.tokens;
    Tokens current = original;
    SentencePrediction prediction = client.predict(original);

    std::vector<std::size_t> unresolved;
    for (std::size_t t = span.start; t < span.end; ++t) {
      if (token_correct(sentence.gold[t], prediction[t].predicted)) unresolved.push_back(t);
    }

    const auto ranking =
        rank_words(client, original, sentence.gold, span, prediction, cfg,
                   attack_seed(cfg.seed, sentence.id, span.start));

    for (const auto& entry : ranking) {
      if (unresolved.empty()) break;
      const auto cands =
          candidate_synonyms(store, client, similarity, original, current, entry.position, cfg);
      if (cands.empty()) continue;
      auto choice = select_synonym(client, sentence.gold, unresolved, prediction, cands);
      if (!choice) continue;

      const auto& chosen = cands[choice->index];
      result.perturbations.push_back({entry.position, current[entry.position], chosen.surface,
                                      result.perturbations.size() + 1});
      current = chosen.sentence;
      prediction = std::move(choice->prediction);
      std::erase_if(unresolved, [&](std::size_t t) {
        return !token_correct(sentence.gold[t], prediction[t].predicted);
      });
    }

    result.adversarial_tokens = current;
    result.verdict = judge_entity(span, sentence.gold, predicted_labels(prediction));
    result.similarity = similarity.score(original, current);
  } catch (const AdapterError& e) {
    result.perturbations.clear();
    result.adversarial_tokens = sentence.tokens;
    result.verdict = EntityVerdict{};
    result.verdict.total_tokens = span.length();
    result.similarity = 1.0;
    result.aborted = e.what();
  }
  if (result.out_of_mention_count > 0) {
    result.words_perturbed_pct = 100.0 * static_cast<double>(result.perturbations.size()) /
                                 static_cast<double>(result.out_of_mention_count);
  }
  result.queries_used = client.queries() - queries_before;
  return result;
}

}  // namespace nerbreaker
