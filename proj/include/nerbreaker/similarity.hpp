#pragma once

#include <vector>

#include "nerbreaker/adapter.hpp"
#include "nerbreaker/lexical.hpp"

namespace nerbreaker {

/// Sentence similarity in [0, 1]: the endpoint's encoder when it advertises
/// the similarity capability, else fallback_similarity over `store`.
/// Identical token lists always score 1.0.
class SimilarityScorer {
 public:
  SimilarityScorer(ModelClient* client, const VectorStore* store);

  std::vector<double> score(const std::vector<TokenPair>& pairs);
  double score(const Tokens& a, const Tokens& b);

  bool uses_remote() const { return remote_; }

 private:
  std::vector<double> local(const std::vector<TokenPair>& pairs) const;

  ModelClient* client_;
  const VectorStore* store_;
  bool remote_ = false;
};

}  // namespace nerbreaker
