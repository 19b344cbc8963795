#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clprobe/corpus/conllu.hpp"
#include "clprobe/corpus/frequency.hpp"
#include "clprobe/ndiff/rng.hpp"

namespace clprobe::corpus {

// Synthetic annotated corpus with deliberate strata, so that every probing
// task finds enough eligible sentences offline:
//   - SVO clauses carrying Number and Tense features (subject/object number,
//     tense, and general frequency mass),
//   - coordinated clauses with cc/conj structure (coordination inversion),
//   - chain trees of exact depth per length bin (tree depth),
//   - flat sentences of every length 5..28 (sentence length),
//   - templated adjective-noun-verb sentences over small pools, so bigrams
//     repeat often enough to admit frequency-matched substitutions,
//   - sentences holding exactly one word from a dedicated mid-frequency band
//     (word content).
// The vocabulary is tiered by construction: a fixed closed-class/template set
// whose members all end up more frequent than the band, the band itself at an
// exact per-word count, and a long tail strictly below it. generate_corpus
// verifies the tiers after building and fails loudly if the design is ever
// violated, so the band's rank window is a constant callers can rely on.

struct SynthConfig {
  uint64_t seed = 1;
  double scale = 1.0;  // multiplies every stratum size

  void validate() const {
    // below 0.1 the organic high-band counts collapse into the pinned
    // mid-band count and the frequency-band postcondition cannot hold
    if (scale < 0.1 || scale > 100.0) fail("synth: scale must be in [0.1, 100]");
  }
};

struct SynthInfo {
  size_t sentences = 0;
  size_t tokens = 0;
  RankWindow wc_window;   // ranks the mid-frequency band occupies
  size_t wc_words = 0;    // band size
  size_t wc_count = 0;    // exact per-band-word occurrence count
};

namespace synthdetail {

// Deterministic pseudo-Latin stems enumerated in mixed radix; no RNG, so pool
// membership never depends on draw order.
class WordMint {
 public:
  explicit WordMint(std::set<std::string>& used) : used_(used) {}

  std::string next(const std::string& suffix = "") {
    while (true) {
      std::string w = word(counter_++) + suffix;
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> pool(size_t n, const std::string& suffix = "") {
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(next(suffix));
    return out;
  }

 private:
  static std::string syllable(size_t i) {
    static const std::vector<std::string> onset = {
        "b",  "d",  "f",  "g",  "k",  "l",  "m",  "n",  "p",  "r",
        "s",  "t",  "v",  "z",  "bl", "br", "dr", "fl", "gr", "kl",
        "kr", "pl", "pr", "sk", "sl", "sm", "sn", "sp", "st", "tr"};
    static const std::vector<std::string> vowel = {"a", "e", "i", "o", "u"};
    static const std::vector<std::string> coda = {"", "l", "m", "n", "r", "s", "t"};
    return onset[i % onset.size()] + vowel[(i / onset.size()) % vowel.size()] +
           coda[(i / (onset.size() * vowel.size())) % coda.size()];
  }

  static std::string word(size_t c) {
    constexpr size_t kSyllables = 30 * 5 * 7;
    return syllable(c % kSyllables) + syllable((c / kSyllables) % kSyllables);
  }

  std::set<std::string>& used_;
  size_t counter_ = 0;
};

// Fixed closed-class inventory. Everything here must end up above the
// mid-frequency band; generate_corpus enforces that.
struct Fillers {
  std::vector<std::string> det = {"the", "a", "this", "these", "that", "those", "my", "our"};
  std::vector<std::string> prep = {"near", "under", "over", "behind",
                                   "beside", "along", "within", "around"};
  std::vector<std::string> adv = {"often", "never", "soon", "today",
                                  "again", "slowly", "quickly", "quietly"};
  std::vector<std::string> conj = {"and", "or", "but", "so"};

  std::vector<std::string> all() const {
    std::vector<std::string> out;
    for (auto* v : {&det, &prep, &adv, &conj})
      out.insert(out.end(), v->begin(), v->end());
    out.push_back(".");
    out.push_back(",");
    return out;
  }
};

inline const std::string& pick(const std::vector<std::string>& pool, ndiff::Rng& rng) {
  return pool[rng.index(pool.size())];
}

// Sequential token builder; surface order equals creation order.
struct Build {
  std::vector<Token> toks;

  int add(const std::string& form, const std::string& upos, int head, const std::string& rel,
          std::map<std::string, std::string> feats = {}) {
    Token t;
    t.id = static_cast<int>(toks.size()) + 1;
    t.form = form;
    t.lemma = form;
    t.upos = upos;
    t.head = head;
    t.deprel = rel;
    t.feats = std::move(feats);
    toks.push_back(std::move(t));
    return static_cast<int>(toks.size());
  }

  Sentence done() {
    Sentence s;
    s.tokens = std::move(toks);
    return s;
  }
};

struct Pools {
  Fillers fill;
  std::vector<std::string> somo_adj, somo_noun, somo_verb;  // high band
  std::vector<std::string> mid;                             // the WC band
  std::vector<std::string> noun, verb, adj;                 // low tail
};

inline std::string noun_form(const std::string& base, bool plural) {
  return plural ? base + "s" : base;
}

inline std::string verb_form(const std::string& base, bool past, bool plural_subject) {
  if (past) return base + "ed";
  return plural_subject ? base : base + "s";
}

inline std::map<std::string, std::string> num_feat(bool plural) {
  return {{"Number", plural ? std::string("Plur") : std::string("Sing")}};
}

inline std::map<std::string, std::string> tense_feat(bool past) {
  return {{"Tense", past ? std::string("Past") : std::string("Pres")},
          {"VerbForm", "Fin"}};
}

// det (adj)? NOUN as dependents of `head_of_np` once the noun id is known;
// returns the noun id. Emits tokens in surface order.
inline int noun_phrase(Build& b, const Pools& p, ndiff::Rng& rng, int head, const std::string& rel,
                       bool with_adj, bool plural, bool number_feat) {
  int det_id = b.add(pick(p.fill.det, rng), "DET", 0, "det");
  int adj_id = with_adj ? b.add(pick(p.adj, rng), "ADJ", 0, "amod") : 0;
  int noun_id = b.add(noun_form(pick(p.noun, rng), plural), "NOUN", head, rel,
                      number_feat ? num_feat(plural) : std::map<std::string, std::string>{});
  b.toks[det_id - 1].head = noun_id;
  if (adj_id) b.toks[adj_id - 1].head = noun_id;
  return noun_id;
}

// [NP-subj] VERB [NP-obj] (adv)? (prep NP-obl)? .
inline Sentence svo(const Pools& p, ndiff::Rng& rng) {
  bool subj_plur = rng.coin(), obj_plur = rng.coin(), past = rng.coin();
  bool subj_adj = rng.uniform() < 0.35, obj_adj = rng.uniform() < 0.35;
  bool adv = rng.uniform() < 0.30, pp = rng.uniform() < 0.40;

  Build b;
  int subj = noun_phrase(b, p, rng, 0, "nsubj", subj_adj, subj_plur, true);
  int verb = b.add(verb_form(pick(p.verb, rng), past, subj_plur), "VERB", 0, "root",
                   tense_feat(past));
  b.toks[subj - 1].head = verb;
  noun_phrase(b, p, rng, verb, "obj", obj_adj, obj_plur, true);
  if (adv) b.add(pick(p.fill.adv, rng), "ADV", verb, "advmod");
  if (pp) {
    int prep = b.add(pick(p.fill.prep, rng), "ADP", 0, "case");
    int obl = noun_phrase(b, p, rng, verb, "obl", false, rng.coin(), false);
    b.toks[prep - 1].head = obl;
  }
  b.add(".", "PUNCT", verb, "punct");
  return b.done();
}

// Exactly one band word per sentence, in subject or object position; no
// Number/Tense features, so the stratum stays dedicated to word content.
inline Sentence wc_sentence(const Pools& p, const std::string& mid, ndiff::Rng& rng) {
  bool mid_as_subj = rng.coin();
  bool pp = rng.uniform() < 0.5;

  Build b;
  auto np = [&](int head, const std::string& rel, bool use_mid) {
    int det_id = b.add(pick(p.fill.det, rng), "DET", 0, "det");
    int noun_id = b.add(use_mid ? mid : pick(p.noun, rng), "NOUN", head, rel);
    b.toks[det_id - 1].head = noun_id;
    return noun_id;
  };
  int subj = np(0, "nsubj", mid_as_subj);
  int verb = b.add(pick(p.verb, rng) + "s", "VERB", 0, "root");
  b.toks[subj - 1].head = verb;
  np(verb, "obj", !mid_as_subj);
  if (pp) {
    int prep = b.add(pick(p.fill.prep, rng), "ADP", 0, "case");
    int obl = np(verb, "obl", false);
    b.toks[prep - 1].head = obl;
  }
  b.add(".", "PUNCT", verb, "punct");
  return b.done();
}

// "the A N V the A2 N2 (prep the N3)? ." over small pools, so both bigrams of
// every interior content token recur corpus-wide.
inline Sentence somo_sentence(const Pools& p, ndiff::Rng& rng) {
  bool pp = rng.coin();

  Build b;
  int det1 = b.add("the", "DET", 0, "det");
  int a1 = b.add(pick(p.somo_adj, rng), "ADJ", 0, "amod");
  int n1 = b.add(pick(p.somo_noun, rng), "NOUN", 0, "nsubj");
  b.toks[det1 - 1].head = n1;
  b.toks[a1 - 1].head = n1;
  int verb = b.add(pick(p.somo_verb, rng), "VERB", 0, "root");
  b.toks[n1 - 1].head = verb;
  int det2 = b.add("the", "DET", 0, "det");
  int a2 = b.add(pick(p.somo_adj, rng), "ADJ", 0, "amod");
  int n2 = b.add(pick(p.somo_noun, rng), "NOUN", verb, "obj");
  b.toks[det2 - 1].head = n2;
  b.toks[a2 - 1].head = n2;
  if (pp) {
    int prep = b.add(pick(p.fill.prep, rng), "ADP", 0, "case");
    int det3 = b.add("the", "DET", 0, "det");
    int n3 = b.add(pick(p.somo_noun, rng), "NOUN", verb, "obl");
    b.toks[prep - 1].head = n3;
    b.toks[det3 - 1].head = n3;
  }
  b.add(".", "PUNCT", verb, "punct");
  return b.done();
}

// clause A , conj clause B .  Root in A, the second conjunct a contiguous
// cc-introduced block, so the two conjuncts can be swapped mechanically.
inline Sentence coord_sentence(const Pools& p, ndiff::Rng& rng) {
  Build b;
  auto clause = [&](int head, const std::string& rel, bool wide) {
    bool plur = rng.coin(), past = rng.coin();
    int subj = noun_phrase(b, p, rng, 0, "nsubj", wide && rng.coin(), plur, true);
    int verb = b.add(verb_form(pick(p.verb, rng), past, plur), "VERB", head, rel,
                     tense_feat(past));
    b.toks[subj - 1].head = verb;
    if (rng.uniform() < 0.8)
      noun_phrase(b, p, rng, verb, "obj", wide && rng.coin(), rng.coin(), true);
    if (wide && rng.coin()) b.add(pick(p.fill.adv, rng), "ADV", verb, "advmod");
    if (wide && rng.coin()) {
      int prep = b.add(pick(p.fill.prep, rng), "ADP", 0, "case");
      int obl = noun_phrase(b, p, rng, verb, "obl", false, rng.coin(), false);
      b.toks[prep - 1].head = obl;
    }
    return verb;
  };

  bool wide = rng.coin();
  int verb_a = clause(0, "root", wide);
  int comma = b.add(",", "PUNCT", 0, "punct");
  int cc = b.add(pick(p.fill.conj, rng), "CCONJ", 0, "cc");
  int verb_b = clause(verb_a, "conj", wide);
  b.toks[comma - 1].head = verb_b;
  b.toks[cc - 1].head = verb_b;
  b.add(".", "PUNCT", verb_a, "punct");
  return b.done();
}

// Chain of `depth` edges under the root, remaining tokens flat at depth 1;
// the longest root-to-leaf path is exactly `depth`.
inline Sentence depth_sentence(const Pools& p, size_t depth, size_t len, ndiff::Rng& rng) {
  if (len < depth + 1) fail("synth: depth " + std::to_string(depth) + " needs at least " +
                            std::to_string(depth + 1) + " tokens");
  static const std::vector<std::string> upos = {"NOUN", "VERB", "ADJ", "ADV"};
  Build b;
  auto form = [&] {
    switch (rng.index(3)) {
      case 0: return pick(p.noun, rng);
      case 1: return pick(p.verb, rng);
      default: return pick(p.adj, rng);
    }
  };
  b.add(form(), pick(upos, rng), 0, "root");
  for (size_t i = 1; i <= depth; ++i)
    b.add(form(), pick(upos, rng), static_cast<int>(i), "dep");
  for (size_t i = depth + 1; i < len; ++i) b.add(form(), pick(upos, rng), 1, "dep");
  return b.done();
}

// Exactly `len` tokens, flat tree of depth 1: reserved supply for the length
// task, invisible to the tree-depth extractor.
inline Sentence len_sentence(const Pools& p, size_t len, ndiff::Rng& rng) {
  Build b;
  b.add(pick(p.noun, rng), "NOUN", 0, "root");
  for (size_t i = 1; i < len; ++i) {
    switch (rng.index(4)) {
      case 0: b.add(pick(p.noun, rng), "NOUN", 1, "dep"); break;
      case 1: b.add(pick(p.verb, rng), "VERB", 1, "dep"); break;
      case 2: b.add(pick(p.adj, rng), "ADJ", 1, "dep"); break;
      default: b.add(pick(p.fill.det, rng), "DET", 1, "dep"); break;
    }
  }
  return b.done();
}

}  // namespace synthdetail

inline std::vector<Sentence> generate_corpus(const SynthConfig& cfg, SynthInfo* info = nullptr) {
  cfg.validate();
  using namespace synthdetail;

  auto scaled = [&](size_t base) {
    auto v = static_cast<size_t>(base * cfg.scale + 0.5);
    return v < 1 ? size_t{1} : v;
  };
  const size_t n_svo = scaled(26000);
  const size_t n_somo = scaled(6000);
  const size_t n_coord = scaled(5000);
  const size_t per_depth_cell = scaled(180);   // per (depth, length-bin)
  const size_t per_length = scaled(125);       // per exact length 5..28
  const size_t wc_count = scaled(75);          // exact occurrences per band word
  const size_t kMidWords = 80;

  Pools p;
  std::set<std::string> used;
  for (auto& w : p.fill.all())
    if (!used.insert(w).second) fail("synth: duplicate closed-class form " + w);
  WordMint mint(used);
  p.somo_adj = mint.pool(30);
  p.somo_noun = mint.pool(30);
  p.somo_verb = mint.pool(30);
  p.mid = mint.pool(kMidWords, "ix");  // suffix no inflected form can produce
  p.noun = mint.pool(12000);
  p.verb = mint.pool(6000);
  p.adj = mint.pool(6000);

  ndiff::Rng rng(ndiff::derive_seed(cfg.seed, "synth"));
  std::vector<Sentence> corpus;

  for (size_t i = 0; i < n_svo; ++i) corpus.push_back(svo(p, rng));
  for (auto& mid : p.mid)
    for (size_t i = 0; i < wc_count; ++i) corpus.push_back(wc_sentence(p, mid, rng));
  for (size_t i = 0; i < n_somo; ++i) corpus.push_back(somo_sentence(p, rng));
  for (size_t i = 0; i < n_coord; ++i) corpus.push_back(coord_sentence(p, rng));
  const std::vector<std::pair<size_t, size_t>> bins = {{5, 8},   {9, 12},  {13, 16},
                                                       {17, 20}, {21, 25}, {26, 28}};
  for (size_t depth : {3, 4, 5, 6})
    for (auto& [lo, hi] : bins) {
      size_t min_len = std::max(lo, depth + 1);
      if (min_len > hi) fail("synth: empty depth/length cell");
      for (size_t i = 0; i < per_depth_cell; ++i)
        corpus.push_back(depth_sentence(p, depth, min_len + rng.index(hi - min_len + 1), rng));
    }
  for (size_t len = 5; len <= 28; ++len)
    for (size_t i = 0; i < per_length; ++i) corpus.push_back(len_sentence(p, len, rng));

  ndiff::Rng order(ndiff::derive_seed(cfg.seed, "synth-order"));
  order.shuffle(corpus);
  size_t tokens = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", i + 1);
    corpus[i].source_id = id;
    corpus[i].comments = {std::string("# sent_id = ") + id};
    tokens += corpus[i].size();
  }

  // Postcondition: the designed tiers hold exactly, so the band's rank window
  // is [high, high + kMidWords) with no stragglers on either boundary.
  FrequencyTable t = build_frequency_tables(corpus);
  std::set<std::string> high(used.begin(), used.end());
  for (auto& w : p.mid) high.erase(w);
  for (const auto* pool : {&p.noun, &p.verb, &p.adj})
    for (auto& w : *pool) high.erase(w);
  for (auto& w : high)
    if (t.uni_count(w) <= wc_count)
      fail("synth: closed-class form '" + w + "' fell to count " +
           std::to_string(t.uni_count(w)) + ", band requires > " + std::to_string(wc_count));
  std::set<std::string> mid_set(p.mid.begin(), p.mid.end());
  for (auto& w : p.mid)
    if (t.uni_count(w) != wc_count)
      fail("synth: band word '" + w + "' has count " + std::to_string(t.uni_count(w)) +
           ", expected exactly " + std::to_string(wc_count));
  for (auto& [w, c] : t.unigram)
    if (c >= wc_count && !high.count(w) && !mid_set.count(w))
      fail("synth: tail form '" + w + "' reached count " + std::to_string(c) +
           ", band requires < " + std::to_string(wc_count));

  if (info) {
    info->sentences = corpus.size();
    info->tokens = tokens;
    info->wc_window = {high.size(), high.size() + kMidWords};
    info->wc_words = kMidWords;
    info->wc_count = wc_count;
  }
  return corpus;
}

}  // namespace clprobe::corpus
