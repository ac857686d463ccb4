#include <gtest/gtest.h>

#include <algorithm>

#include "bench.hpp"
#include "nerbreaker/context_attack.hpp"
#include "nerbreaker/text.hpp"
#include "scripted.hpp"

using namespace nerbreaker;
using nbtest::make_prediction;

namespace {

MockModelSpec per_spec() {
  MockModelSpec spec;
  spec.entity_types = {"PER"};
  return spec;
}

const Labels& per_tags() {
  static const Labels tags = mock_tag_set(per_spec());
  return tags;
}

TokenPrediction token(const char* predicted, std::map<std::string, double> scores) {
  TokenPrediction p;
  p.predicted = Label::parse(predicted);
  for (const auto& l : per_tags()) p.scores[l] = 0.0;
  for (const auto& [k, v] : scores) p.scores[Label::parse(k)] = v;
  return p;
}

Labels labels(std::initializer_list<const char*> xs) {
  Labels out;
  for (const char* x : xs) out.push_back(Label::parse(x));
  return out;
}

ContextCandidate candidate(const std::string& text, double similarity) {
  ContextCandidate c;
  c.sentence = split_words(text);
  c.similarity = similarity;
  return c;
}

}  // namespace

TEST(CorrectScore, InsideAlsoCountsBegin) {
  const auto p = token("B-PER", {{"B-PER", 3.0}, {"I-PER", 1.0}});
  EXPECT_DOUBLE_EQ(correct_label_score(Label::parse("I-PER"), p), 3.0);
  EXPECT_DOUBLE_EQ(correct_label_score(Label::parse("B-PER"), p), 3.0);
  const auto q = token("I-PER", {{"B-PER", 1.0}, {"I-PER", 2.5}});
  EXPECT_DOUBLE_EQ(correct_label_score(Label::parse("I-PER"), q), 2.5);
  EXPECT_DOUBLE_EQ(correct_label_score(Label::parse("B-PER"), q), 1.0);
}

TEST(Importance, ScoreDropWhileStillCorrect) {
  const auto gold = labels({"O", "B-PER", "O"});
  const auto span = extract_spans({"a", "John", "c"}, gold).at(0);
  const SentencePrediction full = {token("O", {{"O", 1}}), token("B-PER", {{"B-PER", 2}}), token("O", {{"O", 1}})};
  const SentencePrediction del = {token("B-PER", {{"B-PER", 1}}), token("O", {{"O", 1}})};
  EXPECT_DOUBLE_EQ(importance_from_predictions(gold, span, 0, full, del), 1.0);
}

TEST(Importance, FlipAddsGainOfNewLabel) {
  const auto gold = labels({"O", "B-PER", "O"});
  const auto span = extract_spans({"a", "John", "c"}, gold).at(0);
  const SentencePrediction full = {token("O", {{"O", 1}}), token("B-PER", {{"B-PER", 2}}), token("O", {{"O", 1}})};
  // Deleting the word after the entity: the entity token keeps index 1.
  const SentencePrediction del = {token("O", {{"O", 1}}), token("O", {{"O", 3}, {"B-PER", 1}})};
  // (2 - 1) lost on B-PER plus (3 - 0) gained by O.
  EXPECT_DOUBLE_EQ(importance_from_predictions(gold, span, 2, full, del), 4.0);
}

TEST(Importance, SumsOverEntityTokens) {
  const auto gold = labels({"O", "B-PER", "I-PER"});
  const auto span = extract_spans({"a", "Jo", "Smith"}, gold).at(0);
  const SentencePrediction full = {token("O", {{"O", 1}}), token("B-PER", {{"B-PER", 2}}),
                                   token("I-PER", {{"I-PER", 2}, {"B-PER", 1}})};
  // Second token now predicted B-PER, which is still correct for I-PER.
  const SentencePrediction del = {token("B-PER", {{"B-PER", 1.5}}), token("B-PER", {{"B-PER", 0.5}, {"I-PER", 0.25}})};
  EXPECT_DOUBLE_EQ(importance_from_predictions(gold, span, 0, full, del), 0.5 + 1.5);
}

TEST(Importance, QueriesModelTwice) {
  const Tokens tokens = split_words("Yesterday John sprinted");
  const auto gold = labels({"O", "B-PER", "O"});
  const auto span = extract_spans(tokens, gold).at(0);
  std::map<Tokens, SentencePrediction> script;
  script[tokens] = make_prediction(labels({"O", "B-PER", "O"}), per_tags(), 0, 2);
  script[split_words("John sprinted")] = {token("O", {{"O", 3}, {"B-PER", 1}}), token("O", {{"O", 1}})};
  auto ep = std::make_unique<nbtest::ScriptedEndpoint>(per_spec(), script);
  auto* raw = ep.get();
  ModelClient client(std::move(ep));
  EXPECT_DOUBLE_EQ(token_importance(client, tokens, gold, span, 0), 4.0);
  EXPECT_EQ(client.queries(), 2u);
  EXPECT_EQ(raw->predict_calls(), 1u);
  EXPECT_THROW(token_importance(client, tokens, gold, span, 1), std::invalid_argument);
}

TEST(Ranking, ByImportanceThenPosition) {
  const Tokens tokens = split_words("Yesterday John sprinted quickly");
  const auto gold = labels({"O", "B-PER", "O", "O"});
  const auto span = extract_spans(tokens, gold).at(0);
  const auto full = make_prediction(gold, per_tags(), 0, 2);
  const auto o = token("O", {{"O", 1}});
  const auto weaker = token("B-PER", {{"B-PER", 1}});
  const auto flipped = token("O", {{"O", 3}, {"B-PER", 1}});
  std::map<Tokens, SentencePrediction> script;
  script[split_words("John sprinted quickly")] = {weaker, o, o};          // 1
  script[split_words("Yesterday John quickly")] = {o, flipped, o};        // 1 + 3
  script[split_words("Yesterday John sprinted")] = {o, weaker, o};        // 1
  ModelClient client(std::make_unique<nbtest::ScriptedEndpoint>(per_spec(), script));

  ContextAttackConfig cfg;
  const auto ranked = rank_words(client, tokens, gold, span, full, cfg, 1);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].position, 2u);
  EXPECT_DOUBLE_EQ(*ranked[0].importance, 4.0);
  EXPECT_EQ(ranked[1].position, 0u);
  EXPECT_EQ(ranked[2].position, 3u);
  EXPECT_DOUBLE_EQ(*ranked[1].importance, *ranked[2].importance);
}

TEST(Ranking, AblatedOrderIsSeededShuffle) {
  const Tokens tokens = split_words("Yesterday John sprinted very quickly home again");
  const auto gold = labels({"O", "B-PER", "O", "O", "O", "O", "O"});
  const auto span = extract_spans(tokens, gold).at(0);
  ModelClient client(std::make_unique<MockEndpoint>(per_spec()));
  const auto full = client.predict(tokens);
  const std::size_t before = client.queries();

  ContextAttackConfig cfg;
  cfg.use_importance_ranking = false;
  const auto a = rank_words(client, tokens, gold, span, full, cfg, 11);
  EXPECT_EQ(client.queries(), before);
  std::vector<std::size_t> pos;
  for (const auto& e : a) {
    EXPECT_FALSE(e.importance);
    pos.push_back(e.position);
  }
  auto sorted = pos;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, eligible_positions(tokens, gold));

  const auto b = rank_words(client, tokens, gold, span, full, cfg, 11);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].position, b[i].position);
  bool differs = false;
  for (std::uint64_t s = 12; s < 20 && !differs; ++s) {
    const auto c = rank_words(client, tokens, gold, span, full, cfg, s);
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].position != c[i].position;
  }
  EXPECT_TRUE(differs);
}

TEST(Eligibility, SkipsEntitiesAndStopwords) {
  const Tokens tokens = split_words("The man from Acme Corp bought the shares");
  const auto gold = labels({"O", "O", "O", "B-ORG", "I-ORG", "O", "O", "O"});
  EXPECT_EQ(eligible_positions(tokens, gold), (std::vector<std::size_t>{1, 5, 7}));
  EXPECT_EQ(out_of_mention_count(tokens, gold), 6u);
}

namespace {

MockModelSpec tagged_spec() {
  MockModelSpec spec;
  spec.entity_types = {"PER"};
  spec.pos_lexicon = {{"bought", "VBD"}, {"purchased", "VBD"}, {"obtained", "VBN"}, {"the", "DT"}};
  return spec;
}

}  // namespace

TEST(Candidates, FilterByPosAndSimilarity) {
  const auto store = load_vectors(nbtest::source_path("tests/data/vectors_fixture.txt"));
  ModelClient client(std::make_unique<MockEndpoint>(tagged_spec()));
  SimilarityScorer scorer(&client, &store);
  const Tokens s = split_words("John bought flowers .");
  ContextAttackConfig cfg;

  // Above delta: purchased (VBD), obtained (VBN), the (DT).
  EXPECT_EQ(synonyms(store, "bought", cfg.delta, 50).size(), 3u);
  auto cands = candidate_synonyms(store, client, scorer, s, s, 1, cfg);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0].surface, "purchased");
  EXPECT_EQ(cands[0].sentence, split_words("John purchased flowers ."));
  EXPECT_DOUBLE_EQ(cands[0].similarity, 1.0 - 0.5 / 4);

  cfg.epsilon = 0.9;
  EXPECT_TRUE(candidate_synonyms(store, client, scorer, s, s, 1, cfg).empty());

  cfg.epsilon = 0.8;
  cfg.delta = 0.995;
  EXPECT_TRUE(candidate_synonyms(store, client, scorer, s, s, 1, cfg).empty());
}

TEST(Candidates, KeepCapitalizationAndMeasureAgainstOriginal) {
  const auto store = load_vectors(nbtest::source_path("tests/data/vectors_fixture.txt"));
  ModelClient client(std::make_unique<MockEndpoint>(tagged_spec()));
  SimilarityScorer scorer(&client, &store);
  const Tokens original = split_words("Bought the cat , John did");
  Tokens current = original;
  current[2] = "puss";
  ContextAttackConfig cfg;
  cfg.epsilon = 0.5;
  const auto cands = candidate_synonyms(store, client, scorer, original, current, 0, cfg);
  ASSERT_FALSE(cands.empty());
  EXPECT_EQ(cands[0].surface, "Purchased");
  // Two edits against the original sentence of six tokens.
  EXPECT_DOUBLE_EQ(cands[0].similarity, 1.0 - 0.5 * 2 / 6);
}

TEST(Select, FullFlipPrefersHigherSimilarity) {
  const auto gold = labels({"O", "B-PER", "O"});
  std::map<Tokens, SentencePrediction> script;
  script[split_words("a John c")] = make_prediction(labels({"O", "O", "O"}), per_tags());
  script[split_words("b John c")] = make_prediction(labels({"O", "O", "O"}), per_tags());
  script[split_words("d John c")] = make_prediction(gold, per_tags());
  ModelClient client(std::make_unique<nbtest::ScriptedEndpoint>(per_spec(), script));
  const auto current = make_prediction(gold, per_tags());
  const std::vector<ContextCandidate> cands = {candidate("d John c", 0.99), candidate("a John c", 0.87),
                                               candidate("b John c", 0.91)};
  const auto choice = select_synonym(client, gold, {1}, current, cands);
  ASSERT_TRUE(choice);
  EXPECT_EQ(choice->index, 2u);
  EXPECT_EQ(choice->prediction, script[split_words("b John c")]);
  EXPECT_EQ(client.queries(), 3u);
}

TEST(Select, PartialFlipPrefersMoreFlipsThenLowerRemainder) {
  const auto gold = labels({"B-PER", "I-PER", "I-PER", "O"});
  const std::vector<std::size_t> unresolved = {0, 1, 2};
  auto pred = [&](std::initializer_list<const char*> p, double margin) {
    return make_prediction(labels(p), per_tags(), 0, margin);
  };
  std::map<Tokens, SentencePrediction> script;
  script[split_words("A B C w")] = pred({"O", "I-PER", "I-PER", "O"}, 1.5);  // 1 flip, remainder 3.0
  script[split_words("A B C x")] = pred({"O", "I-PER", "I-PER", "O"}, 1.0);  // 1 flip, remainder 2.0
  script[split_words("A B C y")] = pred({"O", "O", "I-PER", "O"}, 3.0);      // 2 flips
  script[split_words("A B C z")] = pred({"B-PER", "I-PER", "I-PER", "O"}, 0.1);
  ModelClient client(std::make_unique<nbtest::ScriptedEndpoint>(per_spec(), script));
  const auto current = pred({"B-PER", "I-PER", "I-PER", "O"}, 2.0);

  auto choice = select_synonym(client, gold, unresolved, current,
                               {candidate("A B C w", 0.95), candidate("A B C x", 0.85), candidate("A B C z", 0.99)});
  ASSERT_TRUE(choice);
  EXPECT_EQ(choice->index, 1u);

  choice = select_synonym(client, gold, unresolved, current,
                          {candidate("A B C w", 0.95), candidate("A B C y", 0.81), candidate("A B C x", 0.85)});
  ASSERT_TRUE(choice);
  EXPECT_EQ(choice->index, 1u);
}

TEST(Select, ScoreReductionWhenNothingFlips) {
  const auto gold = labels({"O", "B-PER", "O"});
  auto pred = [&](double margin) { return make_prediction(gold, per_tags(), 0, margin); };
  std::map<Tokens, SentencePrediction> script;
  script[split_words("a John c")] = pred(5.0);
  script[split_words("b John c")] = pred(4.9);
  script[split_words("d John c")] = pred(5.3);
  script[split_words("e John c")] = pred(4.9);
  ModelClient client(std::make_unique<nbtest::ScriptedEndpoint>(per_spec(), script));
  const auto current = pred(5.2);

  auto choice = select_synonym(client, gold, {1}, current,
                               {candidate("a John c", 0.99), candidate("b John c", 0.85),
                                candidate("d John c", 0.99), candidate("e John c", 0.85)});
  ASSERT_TRUE(choice);
  // 5.2 -> 4.9 is the largest reduction; the tie with the last goes to the earlier one.
  EXPECT_EQ(choice->index, 1u);

  EXPECT_FALSE(select_synonym(client, gold, {1}, current, {candidate("d John c", 0.99)}));
  EXPECT_FALSE(select_synonym(client, gold, {1}, current, {}));
  EXPECT_FALSE(select_synonym(client, gold, {}, current, {candidate("b John c", 0.9)}));
}

namespace {

MockModelSpec trigger_spec() {
  MockModelSpec spec;
  spec.triggers["visited"] = TriggerRule{"LOC", 2};
  spec.pos_lexicon = {{"visited", "VBD"}, {"toured", "VBD"}};
  return spec;
}

TaggedSentence visited_sentence() {
  TaggedSentence s;
  s.tokens = split_words("Alice visited Xanadu");
  s.gold = labels({"O", "O", "B-LOC"});
  s.id = "v1";
  return s;
}

}  // namespace

TEST(ContextAttack, SwapsTriggerForPlainSynonym) {
  const auto store = parse_vectors("visited 1 0\ntoured 0.9 0.1\n");
  ModelClient client(std::make_unique<MockEndpoint>(trigger_spec()));
  SimilarityScorer scorer(&client, &store);
  const auto s = visited_sentence();
  const auto r = attack_context(s, extract_spans(s).at(0), client, store, scorer, {});
  ASSERT_FALSE(r.aborted);
  ASSERT_EQ(r.perturbations.size(), 1u);
  EXPECT_EQ(r.perturbations[0], (Perturbation{1, "visited", "toured", 1}));
  EXPECT_EQ(r.adversarial_tokens, split_words("Alice toured Xanadu"));
  EXPECT_EQ(r.verdict.status, AttackStatus::Full);
  EXPECT_EQ(r.verdict.error_class, ErrorClass::MissedEntity);
  EXPECT_DOUBLE_EQ(r.similarity, 1.0 - 0.5 / 3);
  EXPECT_EQ(r.eligible_words, 2u);
  EXPECT_EQ(r.synonym_eligible_words, 1u);
  EXPECT_EQ(r.out_of_mention_count, 2u);
  EXPECT_DOUBLE_EQ(r.words_perturbed_pct, 50.0);
  // Original, two deletions, one candidate.
  EXPECT_EQ(r.queries_used, 4u);
}

TEST(ContextAttack, NoSynonymsLeavesSentenceAlone) {
  const auto store = parse_vectors("visited 1 0\nbanana 0 1\n");
  ModelClient client(std::make_unique<MockEndpoint>(trigger_spec()));
  SimilarityScorer scorer(&client, &store);
  const auto s = visited_sentence();
  const auto r = attack_context(s, extract_spans(s).at(0), client, store, scorer, {});
  EXPECT_TRUE(r.perturbations.empty());
  EXPECT_EQ(r.verdict.status, AttackStatus::Failed);
  EXPECT_EQ(r.adversarial_tokens, s.tokens);
  EXPECT_DOUBLE_EQ(r.similarity, 1.0);
  EXPECT_DOUBLE_EQ(r.words_perturbed_pct, 0.0);
}

TEST(ContextAttack, NeedsPosCapability) {
  const auto store = parse_vectors("visited 1 0\ntoured 0.9 0.1\n");
  ModelClient client(std::make_unique<MockEndpoint>(trigger_spec(), std::set<Capability>{Capability::Predict}));
  SimilarityScorer scorer(&client, &store);
  const auto s = visited_sentence();
  EXPECT_THROW(attack_context(s, extract_spans(s).at(0), client, store, scorer, {}), ConfigError);
}

TEST(ContextAttack, AdapterFailureAborts) {
  const auto store = parse_vectors("visited 1 0\ntoured 0.9 0.1\n");
  for (std::size_t budget : {0u, 1u, 2u}) {
    ModelClient client(std::make_unique<nbtest::FlakyEndpoint>(std::make_unique<MockEndpoint>(trigger_spec()), budget));
    SimilarityScorer scorer(&client, &store);
    const auto s = visited_sentence();
    const auto r = attack_context(s, extract_spans(s).at(0), client, store, scorer, {});
    ASSERT_TRUE(r.aborted) << budget;
    EXPECT_TRUE(r.perturbations.empty());
    EXPECT_EQ(r.adversarial_tokens, s.tokens);
    EXPECT_EQ(r.verdict.status, AttackStatus::Failed);
  }
}

TEST(ContextAttack, ConfigValidation) {
  ContextAttackConfig cfg;
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.delta = 0.5;
  cfg.max_synonyms = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.max_synonyms = 1;
  cfg.epsilon = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
