#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerbreaker/adapter.hpp"

namespace nerbreaker {

struct TriggerRule {
  std::string type;
  int window = 1;

  bool operator==(const TriggerRule&) const = default;
};

/// Deterministic stand-in NER model with a known, designed vulnerability.
///
/// Scoring for token i, every label starts at base_score, then:
///  - gazetteer match (longest first, left to right): B-t on the first token
///    and I-t on the rest get +margin;
///  - a trigger word for type t within its window of i (j != i, matched
///    lowercase) adds margin/2 to both B-t and I-t;
///  - context jitter adds the same offset to every label of token i, computed
///    from the words within jitter_window. It moves raw scores but never the
///    argmax.
/// The prediction of token i therefore depends only on tokens within
/// max(trigger windows, jitter_window, longest gazetteer entry - 1).
struct MockModelSpec {
  std::map<Tokens, std::string> gazetteer;
  std::map<std::string, TriggerRule> triggers;
  double base_score = 0.0;
  double margin = 2.0;
  std::uint64_t seed = 0;

  std::map<std::string, std::string> pos_lexicon;  ///< word -> tag, unknown words get NN
  std::vector<std::string> entity_types;            ///< extra types for the tag set
  double context_jitter = 0.0;
  int jitter_window = 2;
  double similarity_penalty = 0.5;

  bool operator==(const MockModelSpec&) const = default;
};

MockModelSpec mock_spec_from_json(const nlohmann::json& j);
nlohmann::json mock_spec_to_json(const MockModelSpec& spec);
MockModelSpec load_mock_spec(const std::string& path);

/// "O" plus B-/I- for every type in the gazetteer, triggers and entity_types,
/// in canonical order.
Labels mock_tag_set(const MockModelSpec& spec);

SentencePrediction mock_predict(const MockModelSpec& spec, const Tokens& sentence);
std::vector<std::string> mock_pos(const MockModelSpec& spec, const Tokens& sentence);

/// 1 - penalty * levenshtein(a, b) / max(|a|, |b|), clamped to [0, 1].
double mock_similarity(const MockModelSpec& spec, const Tokens& a, const Tokens& b);

/// Largest distance at which one token can influence another's prediction.
int mock_influence_radius(const MockModelSpec& spec);

class MockEndpoint : public Endpoint {
 public:
  explicit MockEndpoint(MockModelSpec spec,
                        std::set<Capability> caps = {Capability::Predict, Capability::Pos,
                                                     Capability::Similarity});

  Handshake handshake() override;
  std::vector<SentencePrediction> predict(const std::vector<Tokens>& sentences) override;
  std::vector<std::vector<std::string>> pos(const std::vector<Tokens>& sentences) override;
  std::vector<double> similarity(const std::vector<TokenPair>& pairs) override;

  const MockModelSpec& spec() const { return spec_; }

 private:
  MockModelSpec spec_;
  std::set<Capability> caps_;
};

}  // namespace nerbreaker
