#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "nerbreaker/label.hpp"

namespace nerbreaker {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Word embeddings, L2-normalized at load, one row per word.
class VectorStore {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::VectorXd;

  VectorStore() = default;
  /// Rows are normalized here; zero rows are rejected.
  VectorStore(std::vector<std::string> words, Matrix vectors);

  std::size_t dimension() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

  /// Row index of `word` (exact match), if present.
  std::optional<std::size_t> index(std::string_view word) const;
  Vector vector(std::size_t row) const { return vectors_.row(static_cast<Eigen::Index>(row)).transpose(); }
  const Matrix& matrix() const { return vectors_; }

  double cosine(std::string_view a, std::string_view b) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix vectors_;
};

/// Reads "word v1 ... vd" lines. A leading "<count> <dim>" header line is
/// skipped. Duplicate words: the last line wins, with a warning on stderr.
/// When `vocab_filter` is given only those words are kept.
VectorStore load_vectors(const std::string& path,
                         const std::optional<std::set<std::string>>& vocab_filter = std::nullopt);
VectorStore parse_vectors(std::string_view text,
                          const std::optional<std::set<std::string>>& vocab_filter = std::nullopt);

struct SynonymCandidate {
  std::string word;
  double cosine = 0.0;

  bool operator==(const SynonymCandidate&) const = default;
};

/// Neighbours of lowercase(word) with cosine > delta, best first (ties by
/// word), at most `cap`, never the word itself. Out of vocabulary -> empty.
std::vector<SynonymCandidate> synonyms(const VectorStore& store, std::string_view word,
                                       double delta, std::size_t cap);

/// Cosine between the mean in-vocabulary vectors of the two sentences,
/// mapped from [-1, 1] to [0, 1]. 0.5 when either side has no vector.
double fallback_similarity(const VectorStore& store, const Tokens& a, const Tokens& b);

bool is_stopword(std::string_view word);
std::span<const std::string_view> stopword_list();
/// FNV-1a 64 over the list joined with '\n'.
std::uint64_t stopword_digest();

}  // namespace nerbreaker
