#include "nerbreaker/adapter.hpp"

#include <algorithm>

#include "nerbreaker/corpus.hpp"

namespace nerbreaker {

double TokenPrediction::score(const Label& label) const {
  auto it = scores.find(label);
  if (it == scores.end()) throw ProtocolError("no score for label " + label.str());
  return it->second;
}

Label TokenPrediction::argmax() const {
  if (scores.empty()) throw ProtocolError("empty score map");
  // std::map iterates in canonical order, so strict > keeps the earliest tie.
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

Labels predicted_labels(const SentencePrediction& prediction) {
  Labels out;
  out.reserve(prediction.size());
  for (const auto& p : prediction) out.push_back(p.predicted);
  return out;
}

std::string capability_name(Capability c) {
  switch (c) {
    case Capability::Predict:
      return "predict";
    case Capability::Pos:
      return "pos";
    case Capability::Similarity:
      return "similarity";
  }
  return "predict";
}

Capability parse_capability(const std::string& name) {
  if (name == "predict") return Capability::Predict;
  if (name == "pos") return Capability::Pos;
  if (name == "similarity") return Capability::Similarity;
  throw ProtocolError("unknown capability '" + name + "'");
}

ModelClient::ModelClient(std::unique_ptr<Endpoint> endpoint, std::size_t max_batch)
    : endpoint_(std::move(endpoint)), max_batch_(max_batch == 0 ? 1 : max_batch) {}

const Handshake& ModelClient::handshake() {
  if (!handshake_) {
    Handshake h = endpoint_->handshake();
    if (!h.has(Capability::Predict)) throw ProtocolError("endpoint does not offer predict");
    if (std::find(h.tag_set.begin(), h.tag_set.end(), Label::outside()) == h.tag_set.end()) {
      throw ProtocolError("tag set must contain O");
    }
    handshake_ = std::move(h);
  }
  return *handshake_;
}

std::vector<SentencePrediction> ModelClient::predict_batch(const std::vector<Tokens>& sentences) {
  const auto& tags = tag_set();
  std::vector<SentencePrediction> out;
  out.reserve(sentences.size());
  for (std::size_t begin = 0; begin < sentences.size(); begin += max_batch_) {
    const std::size_t end = std::min(sentences.size(), begin + max_batch_);
    std::vector<Tokens> chunk(sentences.begin() + static_cast<std::ptrdiff_t>(begin),
                              sentences.begin() + static_cast<std::ptrdiff_t>(end));
    for (const auto& s : chunk) {
      if (s.empty()) throw std::invalid_argument("predict: empty sentence");
    }
    auto reply = endpoint_->predict(chunk);
    queries_ += chunk.size();
    if (reply.size() != chunk.size()) {
      throw ProtocolError("predict: asked for " + std::to_string(chunk.size()) +
                          " sentences, got " + std::to_string(reply.size()));
    }
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      if (reply[i].size() != chunk[i].size()) {
        throw ProtocolError("predict: token count mismatch (" + std::to_string(chunk[i].size()) +
                            " vs " + std::to_string(reply[i].size()) + ")");
      }
      for (const auto& tp : reply[i]) {
        for (const auto& label : tags) {
          if (!tp.scores.count(label)) throw ProtocolError("reply lacks score for " + label.str());
        }
        if (tp.argmax() != tp.predicted) {
          throw ProtocolError("predicted label " + tp.predicted.str() +
                              " is not the argmax of its scores");
        }
      }
      out.push_back(std::move(reply[i]));
    }
  }
  return out;
}

SentencePrediction ModelClient::predict(const Tokens& sentence) {
  return std::move(predict_batch({sentence}).front());
}

std::vector<std::vector<std::string>> ModelClient::pos_tag(const std::vector<Tokens>& sentences) {
  if (!has(Capability::Pos)) throw ConfigError("endpoint has no pos capability");
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (std::size_t begin = 0; begin < sentences.size(); begin += max_batch_) {
    const std::size_t end = std::min(sentences.size(), begin + max_batch_);
    std::vector<Tokens> chunk(sentences.begin() + static_cast<std::ptrdiff_t>(begin),
                              sentences.begin() + static_cast<std::ptrdiff_t>(end));
    auto reply = endpoint_->pos(chunk);
    if (reply.size() != chunk.size()) throw ProtocolError("pos: sentence count mismatch");
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      if (reply[i].size() != chunk[i].size()) throw ProtocolError("pos: token count mismatch");
      out.push_back(std::move(reply[i]));
    }
  }
  return out;
}

std::vector<double> ModelClient::similarity(const std::vector<TokenPair>& pairs) {
  if (!has(Capability::Similarity)) throw AdapterError("endpoint has no similarity capability");
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t begin = 0; begin < pairs.size(); begin += max_batch_) {
    const std::size_t end = std::min(pairs.size(), begin + max_batch_);
    std::vector<TokenPair> chunk(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                                 pairs.begin() + static_cast<std::ptrdiff_t>(end));
    auto reply = endpoint_->similarity(chunk);
    if (reply.size() != chunk.size()) throw ProtocolError("similarity: pair count mismatch");
    for (double v : reply) {
      if (!(v >= 0.0 && v <= 1.0)) throw ProtocolError("similarity outside [0,1]");
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace nerbreaker
