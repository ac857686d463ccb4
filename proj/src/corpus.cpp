#include "nerbreaker/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nerbreaker/adapter.hpp"
#include "nerbreaker/random.hpp"

namespace nerbreaker {

namespace {

std::vector<std::string_view> split_columns(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) cols.push_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::size_t resolve(int index, std::size_t ncols) {
  return index < 0 ? ncols - static_cast<std::size_t>(-index) : static_cast<std::size_t>(index);
}

struct SentenceBuilder {
  TaggedSentence sentence;
  std::vector<std::string> pos;
  bool has_pos = false;
  std::size_t first_line = 0;

  bool empty() const { return sentence.tokens.empty(); }
};

}  // namespace

std::string sentence_id_for(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", ordinal);
  return buf;
}

std::size_t normalize_iob(Labels& labels) {
  std::size_t repaired = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].kind() != LabelKind::Inside) continue;
    const bool continues = i > 0 && !labels[i - 1].is_outside() &&
                           labels[i - 1].type() == labels[i].type();
    if (!continues) {
      labels[i] = Label::begin(labels[i].type());
      ++repaired;
    }
  }
  return repaired;
}

bool is_iob_valid(const Labels& labels) {
  Labels copy = labels;
  return normalize_iob(copy) == 0;
}

std::vector<TaggedSentence> parse_conll(std::string_view text, const ColumnSpec& spec) {
  std::vector<TaggedSentence> out;
  SentenceBuilder current;
  std::size_t expected_cols = 0;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (current.empty()) return;
    if (spec.strict && !is_iob_valid(current.sentence.gold)) {
      throw ParseError(current.first_line, "invalid IOB sequence (strict mode)");
    }
    normalize_iob(current.sentence.gold);
    if (current.has_pos) current.sentence.pos = std::move(current.pos);
    current.sentence.id = sentence_id_for(out.size());
    out.push_back(std::move(current.sentence));
    current = SentenceBuilder{};
  };

  std::size_t pos_at = 0;
  while (pos_at <= text.size()) {
    std::size_t nl = text.find('\n', pos_at);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos_at, nl - pos_at);
    pos_at = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      flush();
      continue;
    }
    auto cols = split_columns(line);
    if (cols.front() == "-DOCSTART-") continue;

    if (expected_cols == 0) {
      expected_cols = cols.size();
      if (expected_cols < 2) throw ParseError(line_no, "need at least token and label columns");
    }
    if (cols.size() != expected_cols) {
      throw ParseError(line_no, "expected " + std::to_string(expected_cols) + " columns, got " +
                                    std::to_string(cols.size()));
    }
    const std::size_t token_col = resolve(spec.token, cols.size());
    const std::size_t label_col = resolve(spec.label, cols.size());
    std::optional<std::size_t> pos_col;
    if (spec.pos) {
      pos_col = resolve(*spec.pos, cols.size());
    } else if (spec.auto_pos && cols.size() >= 3) {
      pos_col = 1;
    }
    if (token_col >= cols.size() || label_col >= cols.size() ||
        (pos_col && *pos_col >= cols.size())) {
      throw ParseError(line_no, "column index out of range");
    }

    if (current.empty()) current.first_line = line_no;
    current.sentence.tokens.emplace_back(cols[token_col]);
    try {
      current.sentence.gold.push_back(Label::parse(cols[label_col]));
    } catch (const LabelError& e) {
      throw ParseError(line_no, e.what());
    }
    if (pos_col) {
      current.has_pos = true;
      current.pos.emplace_back(cols[*pos_col]);
    }
    if (nl == text.size()) break;
  }
  flush();
  return out;
}

std::vector<TaggedSentence> read_conll_file(const std::string& path, const ColumnSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_conll(buf.str(), spec);
}

std::string serialize_conll(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sent = sentences[s];
    if (s > 0) out += '\n';
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      out += sent.tokens[i];
      if (sent.pos) {
        out += ' ';
        out += (*sent.pos)[i];
      }
      out += ' ';
      out += sent.gold[i].str();
      out += '\n';
    }
  }
  return out;
}

std::vector<EntitySpan> extract_spans(const Tokens& tokens, const Labels& labels) {
  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i].kind() != LabelKind::Begin) {
      ++i;
      continue;
    }
    EntitySpan span;
    span.start = i;
    span.type = labels[i].type();
    std::size_t j = i + 1;
    while (j < labels.size() && labels[j].kind() == LabelKind::Inside &&
           labels[j].type() == span.type) {
      ++j;
    }
    span.end = j;
    span.surface.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(j));
    spans.push_back(std::move(span));
    i = j;
  }
  return spans;
}

std::vector<EntitySpan> extract_spans(const TaggedSentence& sentence) {
  return extract_spans(sentence.tokens, sentence.gold);
}

std::size_t EntityInventory::count(const std::string& type, const Tokens& surface) const {
  auto t = by_type.find(type);
  if (t == by_type.end()) return 0;
  auto s = t->second.find(surface);
  return s == t->second.end() ? 0 : s->second;
}

EntityInventory build_inventory(const std::vector<TaggedSentence>& corpus) {
  EntityInventory inv;
  for (const auto& sentence : corpus) {
    for (auto& span : extract_spans(sentence)) ++inv.by_type[span.type][span.surface];
  }
  return inv;
}

bool is_verb_tag(std::string_view tag) {
  return tag.starts_with("VB") || tag == "VERB";
}

std::vector<TaggedSentence> select_eligible(const std::vector<TaggedSentence>& corpus,
                                            std::size_t n, std::uint64_t seed,
                                            ModelClient* pos_source) {
  const bool corpus_has_pos =
      std::all_of(corpus.begin(), corpus.end(), [](const auto& s) { return s.pos.has_value(); });
  std::vector<std::vector<std::string>> tags;
  if (corpus_has_pos) {
    tags.reserve(corpus.size());
    for (const auto& s : corpus) tags.push_back(*s.pos);
  } else if (pos_source != nullptr) {
    std::vector<Tokens> batch;
    batch.reserve(corpus.size());
    for (const auto& s : corpus) batch.push_back(s.tokens);
    tags = pos_source->pos_tag(batch);
  } else {
    throw ConfigError("eligibility needs POS tags: corpus has none and no POS-capable adapter");
  }

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool has_entity = !extract_spans(corpus[i]).empty();
    const bool has_verb = std::any_of(tags[i].begin(), tags[i].end(),
                                      [](const std::string& t) { return is_verb_tag(t); });
    if (has_entity && has_verb) eligible.push_back(i);
  }

  Rng rng(seed);
  auto picked = sample_without_replacement(std::move(eligible), n, rng);
  std::sort(picked.begin(), picked.end());
  std::vector<TaggedSentence> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back(corpus[i]);
  return out;
}

}  // namespace nerbreaker
