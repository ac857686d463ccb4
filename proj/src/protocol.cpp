#include "nerbreaker/protocol.hpp"

namespace nerbreaker::protocol {

namespace {

json tokens_array(const std::vector<Tokens>& sentences) {
  json arr = json::array();
  for (const auto& s : sentences) arr.push_back(s);
  return arr;
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object()) throw ProtocolError("reply is not a JSON object");
  auto it = obj.find(name);
  if (it == obj.end()) throw ProtocolError(std::string("reply lacks field '") + name + "'");
  return *it;
}

void expect_op(const json& reply, const std::string& op) {
  const auto& got = field(reply, "op");
  if (got == "error") {
    auto msg = reply.value("message", std::string("unspecified"));
    throw ProtocolError("endpoint error: " + msg);
  }
  if (got != op) throw ProtocolError("expected op '" + op + "', got " + got.dump());
}

std::vector<Tokens> parse_sentences(const json& arr) {
  if (!arr.is_array()) throw ProtocolError("'sentences' must be an array");
  std::vector<Tokens> out;
  for (const auto& s : arr) {
    if (!s.is_array()) throw ProtocolError("sentence must be an array of strings");
    Tokens tokens;
    for (const auto& t : s) {
      if (!t.is_string()) throw ProtocolError("token must be a string");
      tokens.push_back(t.get<std::string>());
    }
    out.push_back(std::move(tokens));
  }
  return out;
}

}  // namespace

json handshake_request() { return json{{"op", "handshake"}}; }

json predict_request(const std::vector<Tokens>& sentences) {
  return json{{"op", "predict"}, {"sentences", tokens_array(sentences)}};
}

json pos_request(const std::vector<Tokens>& sentences) {
  return json{{"op", "pos"}, {"sentences", tokens_array(sentences)}};
}

json similarity_request(const std::vector<TokenPair>& pairs) {
  json arr = json::array();
  for (const auto& [a, b] : pairs) arr.push_back(json::array({a, b}));
  return json{{"op", "similarity"}, {"pairs", std::move(arr)}};
}

json handshake_reply(const Handshake& h) {
  json tags = json::array();
  for (const auto& l : h.tag_set) tags.push_back(l.str());
  json caps = json::array();
  for (auto c : h.capabilities) caps.push_back(capability_name(c));
  return json{{"op", "handshake"},
              {"protocol", kVersion},
              {"tag_set", std::move(tags)},
              {"capabilities", std::move(caps)},
              {"deterministic", h.deterministic}};
}

json predict_reply(const std::vector<SentencePrediction>& predictions) {
  json sents = json::array();
  for (const auto& sentence : predictions) {
    json toks = json::array();
    for (const auto& tp : sentence) {
      json scores = json::object();
      for (const auto& [label, value] : tp.scores) scores[label.str()] = value;
      toks.push_back(json{{"label", tp.predicted.str()}, {"scores", std::move(scores)}});
    }
    sents.push_back(std::move(toks));
  }
  return json{{"op", "predict"}, {"predictions", std::move(sents)}};
}

json pos_reply(const std::vector<std::vector<std::string>>& tags) {
  return json{{"op", "pos"}, {"tags", tags}};
}

json similarity_reply(const std::vector<double>& scores) {
  return json{{"op", "similarity"}, {"scores", scores}};
}

json error_reply(const std::string& message) {
  return json{{"op", "error"}, {"message", message}};
}

Handshake parse_handshake_reply(const json& reply) {
  expect_op(reply, "handshake");
  const auto& version = field(reply, "protocol");
  if (!version.is_number_integer() || version.get<int>() != kVersion) {
    throw ProtocolError("unsupported protocol version " + version.dump());
  }
  Handshake h;
  try {
    for (const auto& t : field(reply, "tag_set")) h.tag_set.push_back(Label::parse(t.get<std::string>()));
    for (const auto& c : field(reply, "capabilities")) h.capabilities.insert(parse_capability(c.get<std::string>()));
    h.deterministic = reply.value("deterministic", false);
  } catch (const LabelError& e) {
    throw ProtocolError(e.what());
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed handshake: ") + e.what());
  }
  if (h.tag_set.empty()) throw ProtocolError("empty tag set");
  return h;
}

std::vector<SentencePrediction> parse_predict_reply(const json& reply) {
  expect_op(reply, "predict");
  std::vector<SentencePrediction> out;
  try {
    for (const auto& sent : field(reply, "predictions")) {
      SentencePrediction sp;
      for (const auto& tok : sent) {
        TokenPrediction tp;
        tp.predicted = Label::parse(tok.at("label").get<std::string>());
        for (const auto& [name, value] : tok.at("scores").items()) {
          tp.scores[Label::parse(name)] = value.get<double>();
        }
        sp.push_back(std::move(tp));
      }
      out.push_back(std::move(sp));
    }
  } catch (const LabelError& e) {
    throw ProtocolError(e.what());
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed predict reply: ") + e.what());
  }
  return out;
}

std::vector<std::vector<std::string>> parse_pos_reply(const json& reply) {
  expect_op(reply, "pos");
  try {
    return field(reply, "tags").get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed pos reply: ") + e.what());
  }
}

std::vector<double> parse_similarity_reply(const json& reply) {
  expect_op(reply, "similarity");
  try {
    return field(reply, "scores").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed similarity reply: ") + e.what());
  }
}

json handle_request(Endpoint& endpoint, const json& request) {
  try {
    if (!request.is_object() || !request.contains("op")) return error_reply("request lacks 'op'");
    const std::string op = request.at("op").get<std::string>();
    if (op == "handshake") return handshake_reply(endpoint.handshake());
    if (op == "predict") return predict_reply(endpoint.predict(parse_sentences(request.at("sentences"))));
    if (op == "pos") return pos_reply(endpoint.pos(parse_sentences(request.at("sentences"))));
    if (op == "similarity") {
      std::vector<TokenPair> pairs;
      for (const auto& p : request.at("pairs")) {
        if (!p.is_array() || p.size() != 2) return error_reply("pair must have two sentences");
        auto both = parse_sentences(p);
        pairs.emplace_back(std::move(both[0]), std::move(both[1]));
      }
      return similarity_reply(endpoint.similarity(pairs));
    }
    return error_reply("unknown op '" + op + "'");
  } catch (const std::exception& e) {
    return error_reply(e.what());
  }
}

std::string handle_line(Endpoint& endpoint, const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return error_reply(std::string("invalid JSON: ") + e.what()).dump();
  }
  return handle_request(endpoint, request).dump();
}

Handshake JsonEndpoint::handshake() { return parse_handshake_reply(exchange(handshake_request())); }

std::vector<SentencePrediction> JsonEndpoint::predict(const std::vector<Tokens>& sentences) {
  if (sentences.empty()) return {};
  return parse_predict_reply(exchange(predict_request(sentences)));
}

std::vector<std::vector<std::string>> JsonEndpoint::pos(const std::vector<Tokens>& sentences) {
  if (sentences.empty()) return {};
  return parse_pos_reply(exchange(pos_request(sentences)));
}

std::vector<double> JsonEndpoint::similarity(const std::vector<TokenPair>& pairs) {
  if (pairs.empty()) return {};
  return parse_similarity_reply(exchange(similarity_request(pairs)));
}

}  // namespace nerbreaker::protocol
