#include "nerbreaker/mock_model.hpp"

#include <algorithm>
#include <fstream>

#include "nerbreaker/corpus.hpp"
#include "nerbreaker/random.hpp"
#include "nerbreaker/text.hpp"

namespace nerbreaker {

using nlohmann::json;

MockModelSpec mock_spec_from_json(const json& j) {
  MockModelSpec spec;
  try {
    if (j.contains("gazetteer")) {
      for (const auto& [surface, type] : j.at("gazetteer").items()) {
        auto words = split_words(surface);
        if (words.empty()) throw ConfigError("mock spec: empty gazetteer entry");
        spec.gazetteer[words] = type.get<std::string>();
      }
    }
    if (j.contains("triggers")) {
      for (const auto& [word, rule] : j.at("triggers").items()) {
        spec.triggers[to_lower(word)] =
            TriggerRule{rule.at("type").get<std::string>(), rule.at("window").get<int>()};
      }
    }
    spec.base_score = j.value("base_score", spec.base_score);
    spec.margin = j.value("margin", spec.margin);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("pos_lexicon")) {
      spec.pos_lexicon = j.at("pos_lexicon").get<std::map<std::string, std::string>>();
    }
    if (j.contains("entity_types")) {
      spec.entity_types = j.at("entity_types").get<std::vector<std::string>>();
    }
    spec.context_jitter = j.value("context_jitter", spec.context_jitter);
    spec.jitter_window = j.value("jitter_window", spec.jitter_window);
    spec.similarity_penalty = j.value("similarity_penalty", spec.similarity_penalty);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock spec: ") + e.what());
  }
  if (!(spec.margin > 0.0)) throw ConfigError("mock spec: margin must be > 0");
  for (const auto& [word, rule] : spec.triggers) {
    if (rule.window < 1) throw ConfigError("mock spec: trigger window must be >= 1");
  }
  return spec;
}

json mock_spec_to_json(const MockModelSpec& spec) {
  json gaz = json::object();
  for (const auto& [surface, type] : spec.gazetteer) gaz[join(surface)] = type;
  json trig = json::object();
  for (const auto& [word, rule] : spec.triggers) {
    trig[word] = json{{"type", rule.type}, {"window", rule.window}};
  }
  return json{{"gazetteer", gaz},
              {"triggers", trig},
              {"base_score", spec.base_score},
              {"margin", spec.margin},
              {"seed", spec.seed},
              {"pos_lexicon", spec.pos_lexicon},
              {"entity_types", spec.entity_types},
              {"context_jitter", spec.context_jitter},
              {"jitter_window", spec.jitter_window},
              {"similarity_penalty", spec.similarity_penalty}};
}

MockModelSpec load_mock_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read mock spec '" + path + "'");
  try {
    return mock_spec_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("mock spec '" + path + "': " + e.what());
  }
}

Labels mock_tag_set(const MockModelSpec& spec) {
  std::set<std::string> types(spec.entity_types.begin(), spec.entity_types.end());
  for (const auto& [surface, type] : spec.gazetteer) types.insert(type);
  for (const auto& [word, rule] : spec.triggers) types.insert(rule.type);
  std::set<Label> labels{Label::outside()};
  for (const auto& t : types) {
    labels.insert(Label::begin(t));
    labels.insert(Label::inside(t));
  }
  return Labels(labels.begin(), labels.end());
}

namespace {

double word_noise(std::uint64_t seed, const std::string& word) {
  const std::uint64_t h = mix_seed(seed, fnv1a64(word));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

SentencePrediction mock_predict(const MockModelSpec& spec, const Tokens& sentence) {
  const Labels tags = mock_tag_set(spec);
  const std::size_t n = sentence.size();
  std::vector<std::map<Label, double>> scores(n);
  for (auto& s : scores) {
    for (const auto& l : tags) s[l] = spec.base_score;
  }

  std::size_t longest = 0;
  for (const auto& [surface, type] : spec.gazetteer) longest = std::max(longest, surface.size());
  for (std::size_t i = 0; i < n;) {
    std::size_t matched = 0;
    const std::string* type = nullptr;
    for (std::size_t len = std::min(longest, n - i); len >= 1; --len) {
      Tokens window(sentence.begin() + static_cast<std::ptrdiff_t>(i),
                    sentence.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto it = spec.gazetteer.find(window);
      if (it != spec.gazetteer.end()) {
        matched = len;
        type = &it->second;
        break;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    scores[i][Label::begin(*type)] += spec.margin;
    for (std::size_t k = i + 1; k < i + matched; ++k) scores[k][Label::inside(*type)] += spec.margin;
    i += matched;
  }

  std::vector<std::string> lowered;
  lowered.reserve(n);
  for (const auto& t : sentence) lowered.push_back(to_lower(t));

  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> boosted;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto it = spec.triggers.find(lowered[j]);
      if (it == spec.triggers.end()) continue;
      const std::size_t dist = i > j ? i - j : j - i;
      if (dist <= static_cast<std::size_t>(it->second.window)) boosted.insert(it->second.type);
    }
    for (const auto& t : boosted) {
      scores[i][Label::begin(t)] += spec.margin / 2.0;
      scores[i][Label::inside(t)] += spec.margin / 2.0;
    }

    if (spec.context_jitter != 0.0) {
      double offset = 0.0;
      const std::size_t w = static_cast<std::size_t>(std::max(0, spec.jitter_window));
      const std::size_t lo = i >= w ? i - w : 0;
      const std::size_t hi = std::min(n - 1, i + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j != i) offset += word_noise(spec.seed, lowered[j]);
      }
      for (auto& [label, value] : scores[i]) value += spec.context_jitter * offset;
    }
  }

  SentencePrediction out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].scores = std::move(scores[i]);
    out[i].predicted = out[i].argmax();
  }
  return out;
}

std::vector<std::string> mock_pos(const MockModelSpec& spec, const Tokens& sentence) {
  std::vector<std::string> tags;
  tags.reserve(sentence.size());
  for (const auto& t : sentence) {
    auto it = spec.pos_lexicon.find(t);
    if (it == spec.pos_lexicon.end()) it = spec.pos_lexicon.find(to_lower(t));
    tags.push_back(it == spec.pos_lexicon.end() ? "NN" : it->second);
  }
  return tags;
}

namespace {

std::size_t levenshtein(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double mock_similarity(const MockModelSpec& spec, const Tokens& a, const Tokens& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const double d = static_cast<double>(levenshtein(a, b));
  return std::clamp(1.0 - spec.similarity_penalty * d / static_cast<double>(longest), 0.0, 1.0);
}

int mock_influence_radius(const MockModelSpec& spec) {
  int r = spec.context_jitter != 0.0 ? spec.jitter_window : 0;
  for (const auto& [word, rule] : spec.triggers) r = std::max(r, rule.window);
  for (const auto& [surface, type] : spec.gazetteer) {
    r = std::max(r, static_cast<int>(surface.size()) - 1);
  }
  return r;
}

MockEndpoint::MockEndpoint(MockModelSpec spec, std::set<Capability> caps)
    : spec_(std::move(spec)), caps_(std::move(caps)) {
  caps_.insert(Capability::Predict);
}

Handshake MockEndpoint::handshake() {
  Handshake h;
  h.tag_set = mock_tag_set(spec_);
  h.capabilities = caps_;
  h.deterministic = true;
  return h;
}

std::vector<SentencePrediction> MockEndpoint::predict(const std::vector<Tokens>& sentences) {
  std::vector<SentencePrediction> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(mock_predict(spec_, s));
  return out;
}

std::vector<std::vector<std::string>> MockEndpoint::pos(const std::vector<Tokens>& sentences) {
  if (!caps_.count(Capability::Pos)) throw AdapterError("mock: pos capability disabled");
  std::vector<std::vector<std::string>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(mock_pos(spec_, s));
  return out;
}

std::vector<double> MockEndpoint::similarity(const std::vector<TokenPair>& pairs) {
  if (!caps_.count(Capability::Similarity)) {
    throw AdapterError("mock: similarity capability disabled");
  }
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(mock_similarity(spec_, a, b));
  return out;
}

}  // namespace nerbreaker
