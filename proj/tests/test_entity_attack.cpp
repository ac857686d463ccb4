#include <gtest/gtest.h>

#include <set>

#include "bench.hpp"
#include "nerbreaker/entity_attack.hpp"
#include "nerbreaker/text.hpp"
#include "scripted.hpp"

using namespace nerbreaker;

namespace {

MockModelSpec golden() { return load_mock_spec(nbtest::source_path("tests/golden/mock_spec.json")); }

TaggedSentence sentence(const std::string& text, std::initializer_list<const char*> gold,
                        const std::string& id = "s1") {
  TaggedSentence s;
  s.tokens = split_words(text);
  for (const char* g : gold) s.gold.push_back(Label::parse(g));
  s.id = id;
  return s;
}

EntityInventory loc_inventory(std::initializer_list<const char*> surfaces) {
  EntityInventory inv;
  for (const char* s : surfaces) inv.by_type["LOC"][split_words(s)] = 1;
  return inv;
}

struct Harness {
  explicit Harness(std::unique_ptr<Endpoint> ep) : client(std::move(ep)), scorer(&client, &store) {}
  explicit Harness(const MockModelSpec& spec) : Harness(std::make_unique<MockEndpoint>(spec)) {}

  EntityAttackResult run(const TaggedSentence& s, const EntityInventory& inv, EntityAttackConfig cfg = {}) {
    return attack_entity(s, extract_spans(s).at(0), inv, client, scorer, cfg);
  }

  VectorStore store;
  ModelClient client;
  SimilarityScorer scorer;
};

}  // namespace

TEST(EntityAttack, UnseenNameWithoutTriggerIsMissed) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  const auto r = h.run(s, loc_inventory({"Paris", "Xanadu", "New York"}));
  ASSERT_TRUE(r.success());
  EXPECT_EQ(*r.replacement, Tokens{"Xanadu"});
  EXPECT_EQ(*r.adversarial_tokens, split_words("I love Xanadu ."));
  // One substitution in four tokens at penalty 0.5.
  EXPECT_DOUBLE_EQ(*r.similarity, 1.0 - 0.5 / 4);
  EXPECT_EQ(r.verdict.status, AttackStatus::Full);
  EXPECT_EQ(r.error_class, ErrorClass::MissedEntity);
  EXPECT_EQ(r.candidates_tried, 2u);
  // "New York" sits exactly on epsilon: kept, predicted correctly.
  EXPECT_EQ(r.queries_used, 2u);
  EXPECT_FALSE(r.aborted);
}

TEST(EntityAttack, TriggerProtectsUnseenName) {
  Harness h(golden());
  const auto s = sentence("He visited Paris", {"O", "O", "B-LOC"});
  const auto r = h.run(s, loc_inventory({"Paris", "Xanadu"}));
  EXPECT_FALSE(r.success());
  ASSERT_EQ(r.evaluations.size(), 1u);
  EXPECT_TRUE(r.evaluations[0].passed_filter);
  EXPECT_FALSE(r.evaluations[0].success);
  EXPECT_EQ(r.verdict.status, AttackStatus::Failed);
}

TEST(EntityAttack, WrongTypeIsTypeError) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  const auto r = h.run(s, loc_inventory({"Paris", "Acme"}));
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.error_class, ErrorClass::TypeError);
}

TEST(EntityAttack, OnlyOriginalSurfaceMeansNoCandidates) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  const auto r = h.run(s, loc_inventory({"Paris"}));
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.candidates_tried, 0u);
  EXPECT_EQ(r.queries_used, 0u);
  EXPECT_FALSE(r.aborted);
}

TEST(EntityAttack, EpsilonFiltersBeforePredicting) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  EntityAttackConfig cfg;
  cfg.epsilon = 0.9;
  const auto r = h.run(s, loc_inventory({"Paris", "Xanadu", "New York"}), cfg);
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.candidates_tried, 2u);
  EXPECT_EQ(r.queries_used, 0u);
  for (const auto& e : r.evaluations) EXPECT_FALSE(e.passed_filter);
}

TEST(EntityAttack, PrefersMostSimilarSuccess) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  // "Gray Rock" costs two edits (0.8), "Xanadu" one (0.875); both fool the model.
  const auto r = h.run(s, loc_inventory({"Paris", "Gray Rock", "Xanadu"}));
  ASSERT_TRUE(r.success());
  EXPECT_EQ(*r.replacement, Tokens{"Xanadu"});
  std::size_t successes = 0;
  for (const auto& e : r.evaluations) successes += e.success;
  EXPECT_EQ(successes, 2u);
}

TEST(EntityAttack, TiesGoToFirstDrawn) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  const auto inv = loc_inventory({"Paris", "Xanadu", "Zembla", "Quux", "Ruritania", "Elbonia"});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EntityAttackConfig cfg;
    cfg.seed = seed;
    const auto r = h.run(s, inv, cfg);
    ASSERT_TRUE(r.success());
    ASSERT_EQ(r.evaluations.size(), 5u);
    EXPECT_EQ(*r.replacement, r.evaluations.front().surface);
  }
}

TEST(EntityAttack, CandidateCapAndDeterminism) {
  Harness h(golden());
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  EntityInventory inv;
  inv.by_type["LOC"][{"Paris"}] = 4;
  for (int i = 0; i < 200; ++i) inv.by_type["LOC"][{"Place" + std::to_string(i)}] = 1;
  inv.by_type["PER"][{"Alice"}] = 1;

  EntityAttackConfig cfg;
  cfg.seed = 5;
  const auto a = h.run(s, inv, cfg);
  EXPECT_EQ(a.candidates_tried, 50u);
  std::set<Tokens> seen;
  for (const auto& e : a.evaluations) {
    EXPECT_NE(e.surface, Tokens{"Paris"});
    EXPECT_EQ(e.surface.front().rfind("Place", 0), 0u);
    seen.insert(e.surface);
  }
  EXPECT_EQ(seen.size(), 50u);

  const auto b = h.run(s, inv, cfg);
  ASSERT_EQ(a.evaluations.size(), b.evaluations.size());
  for (std::size_t i = 0; i < a.evaluations.size(); ++i) EXPECT_EQ(a.evaluations[i].surface, b.evaluations[i].surface);

  cfg.seed = 6;
  const auto c = h.run(s, inv, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.evaluations.size(); ++i) differs |= a.evaluations[i].surface != c.evaluations[i].surface;
  EXPECT_TRUE(differs);

  cfg.max_candidates = 7;
  EXPECT_EQ(h.run(s, inv, cfg).candidates_tried, 7u);
}

TEST(EntityAttack, SeedDependsOnSentenceAndPosition) {
  EXPECT_EQ(attack_seed(1, "a", 2), attack_seed(1, "a", 2));
  EXPECT_NE(attack_seed(1, "a", 2), attack_seed(1, "b", 2));
  EXPECT_NE(attack_seed(1, "a", 2), attack_seed(1, "a", 3));
  EXPECT_NE(attack_seed(1, "a", 2), attack_seed(2, "a", 2));
}

TEST(EntityAttack, AdapterFailureAborts) {
  Harness h(std::make_unique<nbtest::FlakyEndpoint>(std::make_unique<MockEndpoint>(golden()), 0));
  const auto s = sentence("I love Paris .", {"O", "O", "B-LOC", "O"});
  const auto r = h.run(s, loc_inventory({"Paris", "Xanadu"}));
  ASSERT_TRUE(r.aborted);
  EXPECT_FALSE(r.success());
  EXPECT_TRUE(r.evaluations.empty());
}

TEST(EntityAttack, ConfigValidation) {
  EntityAttackConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.epsilon = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.epsilon = 1.0;
  cfg.max_candidates = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Splice, ShorterReplacement) {
  auto s = sentence("A B C D", {"O", "B-PER", "I-PER", "O"});
  s.pos = std::vector<std::string>{"DT", "NNP", "NNP", "VBD"};
  const auto [out, span] = splice(s, extract_spans(s).at(0), {"X"});
  EXPECT_EQ(out.tokens, split_words("A X D"));
  EXPECT_EQ(out.gold, (Labels{Label::outside(), Label::begin("PER"), Label::outside()}));
  EXPECT_EQ(*out.pos, (std::vector<std::string>{"DT", "NNP", "VBD"}));
  EXPECT_EQ(out.id, s.id);
  EXPECT_EQ(span.start, 1u);
  EXPECT_EQ(span.end, 2u);
  EXPECT_EQ(span.surface, Tokens{"X"});
}

TEST(Splice, LongerReplacementAndInverse) {
  auto s = sentence("A B D", {"O", "B-LOC", "O"});
  s.pos = std::vector<std::string>{"DT", "NNP", "VBD"};
  const auto [longer, span] = splice(s, extract_spans(s).at(0), {"X", "Y", "Z"});
  EXPECT_EQ(longer.tokens, split_words("A X Y Z D"));
  EXPECT_EQ(longer.gold[3], Label::inside("LOC"));
  EXPECT_EQ(extract_spans(longer).at(0), span);
  const auto [back, back_span] = splice(longer, span, {"B"});
  EXPECT_EQ(back, s);
  EXPECT_EQ(back_span, extract_spans(s).at(0));
}

TEST(Splice, RejectsBadInput) {
  const auto s = sentence("A B", {"O", "B-LOC"});
  EXPECT_THROW(splice(s, extract_spans(s).at(0), {}), std::invalid_argument);
  EntitySpan far;
  far.start = 1;
  far.end = 5;
  EXPECT_THROW(splice(s, far, {"X"}), std::invalid_argument);
}
