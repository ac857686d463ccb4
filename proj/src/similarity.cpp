#include "nerbreaker/similarity.hpp"

#include <iostream>

#include "nerbreaker/corpus.hpp"

namespace nerbreaker {

SimilarityScorer::SimilarityScorer(ModelClient* client, const VectorStore* store)
    : client_(client), store_(store) {
  remote_ = client_ != nullptr && client_->has(Capability::Similarity);
  if (!remote_ && store_ == nullptr) {
    throw ConfigError("similarity: endpoint has no encoder and no word vectors were given");
  }
}

std::vector<double> SimilarityScorer::local(const std::vector<TokenPair>& pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(fallback_similarity(*store_, a, b));
  return out;
}

std::vector<double> SimilarityScorer::score(const std::vector<TokenPair>& pairs) {
  std::vector<double> out(pairs.size(), 1.0);
  std::vector<TokenPair> pending;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first == pairs[i].second) continue;
    pending.push_back(pairs[i]);
    where.push_back(i);
  }
  if (pending.empty()) return out;

  std::vector<double> got;
  if (remote_) {
    try {
      got = client_->similarity(pending);
    } catch (const AdapterError& e) {
      if (store_ == nullptr) throw;
      std::clog << "warning: remote similarity failed (" << e.what()
                << "), using lexical fallback\n";
      got = local(pending);
    }
  } else {
    got = local(pending);
  }
  for (std::size_t k = 0; k < where.size(); ++k) out[where[k]] = got[k];
  return out;
}

double SimilarityScorer::score(const Tokens& a, const Tokens& b) {
  return score(std::vector<TokenPair>{{a, b}}).front();
}

}  // namespace nerbreaker
