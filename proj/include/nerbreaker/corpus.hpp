#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nerbreaker/label.hpp"

namespace nerbreaker {

class ModelClient;

/// Half-open token range [start, end) labelled B-type I-type*.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;
  Tokens surface;

  std::size_t length() const { return end - start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  bool operator==(const EntitySpan&) const = default;
};

struct TaggedSentence {
  Tokens tokens;
  Labels gold;
  std::optional<std::vector<std::string>> pos;
  std::string id;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TaggedSentence&) const = default;
};

/// Column indices, 0-based. A negative label index counts from the end of the
/// row; nullopt POS means "column 1 when the row has at least 3 columns".
struct ColumnSpec {
  int token = 0;
  int label = -1;
  std::optional<int> pos;
  bool auto_pos = true;
  bool strict = false;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses blank-line separated column text. "-DOCSTART-" lines are skipped.
/// Sentence ids are the zero-padded sentence ordinal ("000000", ...).
std::vector<TaggedSentence> parse_conll(std::string_view text, const ColumnSpec& spec = {});
std::vector<TaggedSentence> read_conll_file(const std::string& path, const ColumnSpec& spec = {});

/// Emits "token [pos] label" rows separated by single spaces, sentences
/// separated by one blank line.
std::string serialize_conll(const std::vector<TaggedSentence>& sentences);

std::string sentence_id_for(std::size_t ordinal);

/// Dangling I- (after O or a different type) becomes B-. Returns the number of
/// repaired labels.
std::size_t normalize_iob(Labels& labels);
bool is_iob_valid(const Labels& labels);

std::vector<EntitySpan> extract_spans(const TaggedSentence& sentence);
std::vector<EntitySpan> extract_spans(const Tokens& tokens, const Labels& labels);

/// Entity surfaces per type with occurrence counts.
struct EntityInventory {
  std::map<std::string, std::map<Tokens, std::size_t>> by_type;

  std::size_t count(const std::string& type, const Tokens& surface) const;
  bool operator==(const EntityInventory&) const = default;
};

EntityInventory build_inventory(const std::vector<TaggedSentence>& corpus);

/// Penn "VB*" or universal "VERB".
bool is_verb_tag(std::string_view tag);

/// Uniform sample without replacement of min(n, eligible) sentences that have
/// at least one entity and one verb, returned in corpus order. POS comes from
/// the corpus when every sentence carries it, else from `pos_source`.
std::vector<TaggedSentence> select_eligible(const std::vector<TaggedSentence>& corpus,
                                            std::size_t n, std::uint64_t seed,
                                            ModelClient* pos_source = nullptr);

}  // namespace nerbreaker
