#pragma once

// Newline-delimited JSON adapter protocol, version 1. See docs/protocol.md.

#include <string>
#include <vector>

#include <json.hpp>

#include "nerbreaker/adapter.hpp"

namespace nerbreaker::protocol {

using nlohmann::json;

inline constexpr int kVersion = 1;

json handshake_request();
json predict_request(const std::vector<Tokens>& sentences);
json pos_request(const std::vector<Tokens>& sentences);
json similarity_request(const std::vector<TokenPair>& pairs);

json handshake_reply(const Handshake& h);
json predict_reply(const std::vector<SentencePrediction>& predictions);
json pos_reply(const std::vector<std::vector<std::string>>& tags);
json similarity_reply(const std::vector<double>& scores);
json error_reply(const std::string& message);

// Decoders throw ProtocolError on malformed input or on an error reply.
Handshake parse_handshake_reply(const json& reply);
std::vector<SentencePrediction> parse_predict_reply(const json& reply);
std::vector<std::vector<std::string>> parse_pos_reply(const json& reply);
std::vector<double> parse_similarity_reply(const json& reply);

/// Server side: dispatches one request to `endpoint` and never throws; any
/// failure becomes an error reply.
json handle_request(Endpoint& endpoint, const json& request);

/// handle_request over one text line; the reply is a single line without the
/// trailing newline.
std::string handle_line(Endpoint& endpoint, const std::string& line);

/// Client-side Endpoint over any request/reply exchange.
class JsonEndpoint : public Endpoint {
 public:
  Handshake handshake() override;
  std::vector<SentencePrediction> predict(const std::vector<Tokens>& sentences) override;
  std::vector<std::vector<std::string>> pos(const std::vector<Tokens>& sentences) override;
  std::vector<double> similarity(const std::vector<TokenPair>& pairs) override;

 protected:
  /// Sends one request, returns the parsed reply.
  virtual json exchange(const json& request) = 0;
};

}  // namespace nerbreaker::protocol
