#include "bench.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nerbreaker/text.hpp"

namespace nbtest {

namespace {

struct Cluster {
  std::string tag;
  std::vector<std::string> words;
};

// Fillers with synonyms. The first word of each cluster is used in
// sentences; the others only exist as substitutes.
const std::vector<Cluster> kFillers = {
    {"RB", {"quietly", "silently", "softly"}},
    {"RB", {"recently", "lately", "newly"}},
    {"RB", {"often", "frequently", "regularly"}},
    {"JJ", {"brave", "bold", "daring"}},
    {"JJ", {"tired", "weary", "exhausted"}},
    {"JJ", {"happy", "glad", "cheerful"}},
    {"NN", {"people", "folks", "persons"}},
    {"NN", {"group", "team", "crew"}},
    {"NN", {"week", "weekend", "fortnight"}},
    {"RB", {"again", "anew", "afresh"}},
    {"JJ", {"young", "youthful", "juvenile"}},
    {"NN", {"visitors", "guests", "tourists"}},
};

struct TriggerCluster {
  std::string type;
  std::vector<std::string> words;  // words[0] is the trigger
};

const std::vector<TriggerCluster> kTriggers = {
    {"LOC", {"visited", "explored", "reached"}},
    {"LOC", {"toured", "roamed", "traversed"}},
    {"PER", {"met", "encountered", "greeted"}},
    {"PER", {"interviewed", "questioned", "consulted"}},
    {"ORG", {"joined", "entered", "enlisted"}},
    {"ORG", {"sued", "prosecuted", "charged"}},
};

// Plain verbs for sentences without a trigger.
const std::vector<std::string> kPlainVerbs = {"praised", "mentioned", "described"};

const std::map<std::string, std::vector<std::string>> kKnown = {
    {"LOC", {"Paris", "London", "Berlin", "Madrid", "New York", "Buenos Aires", "Republic of China"}},
    {"PER", {"John Smith", "Maria", "Angela Merkel", "Obama", "Li Wei"}},
    {"ORG", {"Acme Corp", "Google", "United Nations", "Siemens"}},
};

const std::map<std::string, std::vector<std::string>> kUnseen = {
    {"LOC", {"Xanadu", "Atlantis", "Zembla", "El Dorado", "Lilliput", "Narnia", "Shangri La"}},
    {"PER", {"Zorbo Quint", "Yarrow", "Tess Ombe", "Quillan", "Mira Voss"}},
    {"ORG", {"Globex", "Initech Labs", "Vandelay Industries", "Hooli", "Umbrella Group"}},
};

const std::vector<std::string> kTypes = {"LOC", "ORG", "PER"};

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(uniform_index(rng, v.size()))];
}

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

void append_entity(TaggedSentence& s, const std::string& surface, const std::string& type) {
  const auto words = split_words(surface);
  for (std::size_t k = 0; k < words.size(); ++k) {
    s.tokens.push_back(words[k]);
    s.gold.push_back(k == 0 ? Label::begin(type) : Label::inside(type));
  }
}

void append_word(TaggedSentence& s, const std::string& w) {
  s.tokens.push_back(w);
  s.gold.push_back(Label::outside());
}

}  // namespace

Bench make_bench(std::uint64_t seed, std::size_t n) {
  Bench b;
  Rng rng(mix_seed(seed, 0xbe7c4ULL));

  b.spec.base_score = 0.0;
  b.spec.margin = 2.0;
  b.spec.seed = seed;
  b.spec.context_jitter = 0.1;
  b.spec.jitter_window = 2;
  b.spec.similarity_penalty = 1.5;
  b.spec.entity_types = kTypes;
  for (const auto& [type, surfaces] : kKnown) {
    for (const auto& s : surfaces) b.spec.gazetteer[split_words(s)] = type;
  }
  for (const auto& t : kTriggers) {
    b.spec.triggers[t.words[0]] = TriggerRule{t.type, 2};
    for (const auto& w : t.words) b.spec.pos_lexicon[w] = "VBD";
  }
  for (const auto& v : kPlainVerbs) b.spec.pos_lexicon[v] = "VBD";
  for (const auto& c : kFillers) {
    for (const auto& w : c.words) b.spec.pos_lexicon[w] = c.tag;
  }
  b.spec.pos_lexicon["the"] = "DT";
  b.spec.pos_lexicon["and"] = "CC";
  b.spec.pos_lexicon["."] = ".";

  auto make_sentence = [&](std::size_t ordinal) {
    TaggedSentence s;
    s.id = sentence_id_for(ordinal);
    const std::string& type = pick(kTypes, rng);
    // 0: unseen entity + trigger, 1: known entity + trigger, 2: known entity, plain verb
    const std::uint64_t kind = uniform_index(rng, 10) < 5 ? 0 : (uniform_index(rng, 5) < 3 ? 1 : 2);
    std::vector<const TriggerCluster*> triggers;
    for (const auto& t : kTriggers) {
      if (t.type == type) triggers.push_back(&t);
    }
    const std::string verb = kind == 2 ? pick(kPlainVerbs, rng) : pick(triggers, rng)->words[0];
    const std::string surface = kind == 0 ? pick(kUnseen.at(type), rng) : pick(kKnown.at(type), rng);

    std::vector<std::string> fill;
    for (int k = 0; k < 6; ++k) fill.push_back(pick(kFillers, rng).words[0]);
    append_word(s, match_case(fill[0], "X"));
    append_word(s, "the");
    append_word(s, fill[1]);
    append_word(s, fill[2]);
    append_word(s, verb);
    append_entity(s, surface, type);
    append_word(s, fill[3]);
    append_word(s, fill[4]);
    append_word(s, "and");
    append_word(s, fill[5]);
    append_word(s, ".");
    s.pos = mock_pos(b.spec, s.tokens);
    return s;
  };

  for (std::size_t i = 0; i < n; ++i) b.test.push_back(make_sentence(i));

  // Training data: every surface at least once, known ones more often.
  std::size_t ordinal = 0;
  for (const auto* table : {&kKnown, &kUnseen}) {
    for (const auto& [type, surfaces] : *table) {
      for (const auto& surface : surfaces) {
        const std::size_t copies = table == &kKnown ? 3 : 1;
        for (std::size_t c = 0; c < copies; ++c) {
          TaggedSentence s;
          s.id = sentence_id_for(ordinal++);
          append_word(s, "They");
          append_word(s, kPlainVerbs[c % kPlainVerbs.size()]);
          append_entity(s, surface, type);
          append_word(s, ".");
          s.pos = mock_pos(b.spec, s.tokens);
          b.train.push_back(std::move(s));
        }
      }
    }
  }

  // Vectors: a random direction per cluster, members perturbed around it.
  constexpr int kDim = 16;
  std::ostringstream vec;
  auto emit_cluster = [&](const std::vector<std::string>& words) {
    std::vector<double> base(kDim);
    for (auto& x : base) x = unit(rng);
    for (const auto& w : words) {
      vec << w;
      for (int d = 0; d < kDim; ++d) vec << ' ' << base[static_cast<std::size_t>(d)] + 0.15 * unit(rng);
      vec << '\n';
    }
  };
  for (const auto& c : kFillers) emit_cluster(c.words);
  for (const auto& t : kTriggers) emit_cluster(t.words);
  emit_cluster(kPlainVerbs);
  b.vectors_text = vec.str();
  b.vectors = parse_vectors(b.vectors_text);
  return b;
}

std::string make_temp_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  std::string pattern = (fs::temp_directory_path() / ("nerbreaker-" + tag + "-XXXXXX")).string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  return pattern;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BenchFiles write_bench(const Bench& bench, const std::string& tag) {
  BenchFiles f;
  f.dir = make_temp_dir(tag);
  f.test = f.dir + "/test.txt";
  f.train = f.dir + "/train.txt";
  f.vectors = f.dir + "/vectors.txt";
  f.spec = f.dir + "/mock.json";
  write_file(f.test, serialize_conll(bench.test));
  write_file(f.train, serialize_conll(bench.train));
  write_file(f.vectors, bench.vectors_text);
  write_file(f.spec, mock_spec_to_json(bench.spec).dump(2));
  return f;
}

std::vector<TaggedSentence> random_corpus(Rng& rng, std::size_t n, bool with_pos) {
  static const std::vector<std::string> words = {"the", "cat", "Paris", "runs", "quickly", "of",
                                                 "a", "New", "York", "said", "42", "U.S.",
                                                 "don't", "e-mail", "(", ")", ",", "Ü-bahn"};
  static const std::vector<std::string> types = {"LOC", "PER", "ORG", "MISC", "creative-work"};
  static const std::vector<std::string> tags = {"NN", "NNP", "VBD", "DT", "IN", "JJ", ","};
  std::vector<TaggedSentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    TaggedSentence s;
    s.id = sentence_id_for(i);
    const std::size_t len = 1 + static_cast<std::size_t>(uniform_index(rng, 20));
    std::string prev_type;
    for (std::size_t t = 0; t < len; ++t) {
      std::string w = pick(words, rng);
      if (w == "-DOCSTART-") w = "x";
      s.tokens.push_back(w);
      const auto r = uniform_index(rng, 4);
      if (r == 0 || (r == 1 && prev_type.empty())) {
        prev_type = pick(types, rng);
        s.gold.push_back(Label::begin(prev_type));
      } else if (r == 1) {
        s.gold.push_back(Label::inside(prev_type));
      } else {
        prev_type.clear();
        s.gold.push_back(Label::outside());
      }
    }
    if (with_pos) {
      std::vector<std::string> p;
      for (std::size_t t = 0; t < len; ++t) p.push_back(pick(tags, rng));
      s.pos = std::move(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string source_path(const std::string& rel) { return std::string(NERBREAKER_SOURCE_DIR) + "/" + rel; }

}  // namespace nbtest
