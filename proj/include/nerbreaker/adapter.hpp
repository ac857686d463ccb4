#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nerbreaker/label.hpp"

namespace nerbreaker {

/// Predicted label plus the raw (unnormalized) score of every label in the
/// model's tag set.
struct TokenPrediction {
  Label predicted;
  std::map<Label, double> scores;

  /// Score of `label`; throws ProtocolError when the label is missing.
  double score(const Label& label) const;
  /// Highest-scoring label, ties to the earliest in canonical label order.
  Label argmax() const;

  bool operator==(const TokenPrediction&) const = default;
};

using SentencePrediction = std::vector<TokenPrediction>;

Labels predicted_labels(const SentencePrediction& prediction);

enum class Capability { Predict, Pos, Similarity };

std::string capability_name(Capability c);
Capability parse_capability(const std::string& name);

struct Handshake {
  Labels tag_set;
  std::set<Capability> capabilities;
  bool deterministic = true;

  bool has(Capability c) const { return capabilities.count(c) != 0; }
};

using TokenPair = std::pair<Tokens, Tokens>;

/// Transport-level failure: unreachable endpoint, timeout, dead process.
class AdapterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent reply.
class ProtocolError : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

/// A black-box model. Implementations only move requests and replies; the
/// validation and batching contract lives in ModelClient.
class Endpoint {
 public:
  virtual ~Endpoint() = default;

  virtual Handshake handshake() = 0;
  virtual std::vector<SentencePrediction> predict(const std::vector<Tokens>& sentences) = 0;
  virtual std::vector<std::vector<std::string>> pos(const std::vector<Tokens>& sentences) = 0;
  virtual std::vector<double> similarity(const std::vector<TokenPair>& pairs) = 0;
};

/// Session over one Endpoint: caches the handshake, splits batches, checks
/// every reply and counts predicted sentences.
class ModelClient {
 public:
  explicit ModelClient(std::unique_ptr<Endpoint> endpoint, std::size_t max_batch = 64);

  const Handshake& handshake();
  const Labels& tag_set() { return handshake().tag_set; }
  bool has(Capability c) { return handshake().has(c); }

  std::vector<SentencePrediction> predict_batch(const std::vector<Tokens>& sentences);
  SentencePrediction predict(const Tokens& sentence);

  std::vector<std::vector<std::string>> pos_tag(const std::vector<Tokens>& sentences);

  /// Remote similarity for each pair; requires the similarity capability.
  std::vector<double> similarity(const std::vector<TokenPair>& pairs);

  /// Sentences sent to predict so far.
  std::size_t queries() const { return queries_; }

  Endpoint& endpoint() { return *endpoint_; }

 private:
  std::unique_ptr<Endpoint> endpoint_;
  std::size_t max_batch_;
  std::optional<Handshake> handshake_;
  std::size_t queries_ = 0;
};

}  // namespace nerbreaker
