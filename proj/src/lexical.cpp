#include "nerbreaker/lexical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nerbreaker/random.hpp"
#include "nerbreaker/text.hpp"

namespace nerbreaker {

using namespace std::string_view_literals;

VectorStore::VectorStore(std::vector<std::string> words, Matrix vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size()) {
    throw LoadError("vector store: word count and row count differ");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double norm = vectors_.row(row).norm();
    if (!(norm > 0.0)) throw LoadError("vector store: zero vector for '" + words_[i] + "'");
    vectors_.row(row) /= norm;
    index_[words_[i]] = i;
  }
}

bool VectorStore::contains(std::string_view word) const { return index(word).has_value(); }

std::optional<std::size_t> VectorStore::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double VectorStore::cosine(std::string_view a, std::string_view b) const {
  auto ia = index(a);
  auto ib = index(b);
  if (!ia || !ib) return 0.0;
  return vectors_.row(static_cast<Eigen::Index>(*ia)).dot(vectors_.row(static_cast<Eigen::Index>(*ib)));
}

namespace {

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::string tmp(s);
  std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

}  // namespace

VectorStore parse_vectors(std::string_view text,
                          const std::optional<std::set<std::string>>& vocab_filter) {
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    auto cols = split_words(line);
    if (cols.empty()) continue;
    if (line_no == 1 && cols.size() == 2 && is_number(cols[0]) && is_number(cols[1])) continue;
    if (cols.size() < 2) throw LoadError("vectors line " + std::to_string(line_no) + ": no values");
    const std::size_t d = cols.size() - 1;
    if (dim == 0) dim = d;
    if (d != dim) {
      throw LoadError("vectors line " + std::to_string(line_no) + ": dimension " +
                      std::to_string(d) + ", expected " + std::to_string(dim));
    }
    if (vocab_filter && !vocab_filter->count(cols[0])) continue;
    std::vector<double> values(d);
    for (std::size_t k = 0; k < d; ++k) {
      char* end = nullptr;
      values[k] = std::strtod(cols[k + 1].c_str(), &end);
      if (end != cols[k + 1].c_str() + cols[k + 1].size()) {
        throw LoadError("vectors line " + std::to_string(line_no) + ": bad number '" +
                        cols[k + 1] + "'");
      }
    }
    if (auto it = seen.find(cols[0]); it != seen.end()) {
      std::clog << "warning: vectors line " << line_no << ": duplicate word '" << cols[0]
                << "', keeping the last occurrence\n";
      rows[it->second] = std::move(values);
      continue;
    }
    seen[cols[0]] = words.size();
    words.push_back(cols[0]);
    rows.push_back(std::move(values));
  }
  VectorStore::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return VectorStore(std::move(words), std::move(m));
}

VectorStore load_vectors(const std::string& path,
                         const std::optional<std::set<std::string>>& vocab_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read vectors file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vectors(buf.str(), vocab_filter);
}

std::vector<SynonymCandidate> synonyms(const VectorStore& store, std::string_view word,
                                       double delta, std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("synonyms: cap must be >= 1");
  const std::string key = to_lower(word);
  auto row = store.index(key);
  if (!row) return {};
  const Eigen::VectorXd cosines = store.matrix() * store.vector(*row);
  std::vector<SynonymCandidate> out;
  for (Eigen::Index i = 0; i < cosines.size(); ++i) {
    if (static_cast<std::size_t>(i) == *row) continue;
    const auto& w = store.words()[static_cast<std::size_t>(i)];
    if (w == key) continue;
    if (cosines[i] > delta) out.push_back({w, cosines[i]});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.word < b.word;
  });
  if (out.size() > cap) out.resize(cap);
  return out;
}

namespace {

std::optional<Eigen::VectorXd> mean_vector(const VectorStore& store, const Tokens& tokens) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(store.dimension()));
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    auto row = store.index(to_lower(t));
    if (!row) continue;
    sum += store.vector(*row);
    ++hits;
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

}  // namespace

double fallback_similarity(const VectorStore& store, const Tokens& a, const Tokens& b) {
  if (store.size() == 0) return 0.5;
  auto ma = mean_vector(store, a);
  auto mb = mean_vector(store, b);
  if (!ma || !mb) return 0.5;
  if (a == b) return 1.0;
  const double na = ma->norm();
  const double nb = mb->norm();
  if (na == 0.0 || nb == 0.0) return 0.5;
  const double cos = std::clamp(ma->dot(*mb) / (na * nb), -1.0, 1.0);
  return (cos + 1.0) / 2.0;
}

namespace {

// NLTK English stopword list (179 entries), mirrored in data/stopwords_en.txt.
constexpr std::array kStopwords = {
    "i"sv, "me"sv, "my"sv, "myself"sv, "we"sv, "our"sv, "ours"sv, "ourselves"sv, "you"sv,
    "you're"sv, "you've"sv, "you'll"sv, "you'd"sv, "your"sv, "yours"sv, "yourself"sv,
    "yourselves"sv, "he"sv, "him"sv, "his"sv, "himself"sv, "she"sv, "she's"sv, "her"sv,
    "hers"sv, "herself"sv, "it"sv, "it's"sv, "its"sv, "itself"sv, "they"sv, "them"sv,
    "their"sv, "theirs"sv, "themselves"sv, "what"sv, "which"sv, "who"sv, "whom"sv, "this"sv,
    "that"sv, "that'll"sv, "these"sv, "those"sv, "am"sv, "is"sv, "are"sv, "was"sv, "were"sv,
    "be"sv, "been"sv, "being"sv, "have"sv, "has"sv, "had"sv, "having"sv, "do"sv, "does"sv,
    "did"sv, "doing"sv, "a"sv, "an"sv, "the"sv, "and"sv, "but"sv, "if"sv, "or"sv, "because"sv,
    "as"sv, "until"sv, "while"sv, "of"sv, "at"sv, "by"sv, "for"sv, "with"sv, "about"sv,
    "against"sv, "between"sv, "into"sv, "through"sv, "during"sv, "before"sv, "after"sv,
    "above"sv, "below"sv, "to"sv, "from"sv, "up"sv, "down"sv, "in"sv, "out"sv, "on"sv, "off"sv,
    "over"sv, "under"sv, "again"sv, "further"sv, "then"sv, "once"sv, "here"sv, "there"sv,
    "when"sv, "where"sv, "why"sv, "how"sv, "all"sv, "any"sv, "both"sv, "each"sv, "few"sv,
    "more"sv, "most"sv, "other"sv, "some"sv, "such"sv, "no"sv, "nor"sv, "not"sv, "only"sv,
    "own"sv, "same"sv, "so"sv, "than"sv, "too"sv, "very"sv, "s"sv, "t"sv, "can"sv, "will"sv,
    "just"sv, "don"sv, "don't"sv, "should"sv, "should've"sv, "now"sv, "d"sv, "ll"sv, "m"sv,
    "o"sv, "re"sv, "ve"sv, "y"sv, "ain"sv, "aren"sv, "aren't"sv, "couldn"sv, "couldn't"sv,
    "didn"sv, "didn't"sv, "doesn"sv, "doesn't"sv, "hadn"sv, "hadn't"sv, "hasn"sv, "hasn't"sv,
    "haven"sv, "haven't"sv, "isn"sv, "isn't"sv, "ma"sv, "mightn"sv, "mightn't"sv, "mustn"sv,
    "mustn't"sv, "needn"sv, "needn't"sv, "shan"sv, "shan't"sv, "shouldn"sv, "shouldn't"sv,
    "wasn"sv, "wasn't"sv, "weren"sv, "weren't"sv, "won"sv, "won't"sv, "wouldn"sv, "wouldn't"sv,
};

}  // namespace

std::span<const std::string_view> stopword_list() { return kStopwords; }

bool is_stopword(std::string_view word) {
  const std::string lower = to_lower(word);
  return std::find(kStopwords.begin(), kStopwords.end(), lower) != kStopwords.end();
}

std::uint64_t stopword_digest() {
  std::string joined;
  for (std::size_t i = 0; i < kStopwords.size(); ++i) {
    if (i) joined += '\n';
    joined += kStopwords[i];
  }
  return fnv1a64(joined);
}

}  // namespace nerbreaker
