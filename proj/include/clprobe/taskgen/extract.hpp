#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clprobe/corpus/tree.hpp"
#include "clprobe/ndiff/rng.hpp"
#include "clprobe/taskgen/config.hpp"
#include "clprobe/taskgen/example.hpp"
#include "clprobe/taskgen/somo.hpp"

namespace clprobe::taskgen {

using corpus::FrequencyTable;
using corpus::Sentence;
using ndiff::Rng;

namespace detail {

// Ingestion guard shared by every extractor. Tokens that would corrupt the
// TSV output (tab/newline/space/empty) disqualify the whole sentence.
inline bool ingestible(const Sentence& s, const TaskConfig& cfg) {
  if (s.tokens.empty() || s.size() > cfg.max_sentence_len) return false;
  for (auto& t : s.tokens) {
    if (t.form.empty()) return false;
    if (t.form.find('\t') != std::string::npos || t.form.find('\n') != std::string::npos ||
        t.form.find(' ') != std::string::npos)
      return false;
  }
  return true;
}

inline std::string fold(const std::string& form, const TaskConfig& cfg) {
  return cfg.case_fold ? ascii_lower(form) : form;
}

[[noreturn]] inline void shortfall_error(const std::string& task,
                                         const std::map<std::string, size_t>& missing) {
  std::string msg = task + ": corpus exhausted before quotas filled; shortfall:";
  for (auto& [label, n] : missing) msg += " " + label + "=" + std::to_string(n);
  fail(msg);
}

// Shuffle one class pool and deal it into train/valid/test slices.
inline void deal_splits(std::vector<ProbingExample>& pool, size_t n_train, size_t n_valid,
                        size_t n_test, Rng& rng, std::vector<ProbingExample>& out) {
  if (pool.size() != n_train + n_valid + n_test)
    fail("deal_splits: pool size " + std::to_string(pool.size()) + " != quota " +
         std::to_string(n_train + n_valid + n_test));
  rng.shuffle(pool);
  size_t i = 0;
  for (size_t k = 0; k < n_train; ++k) pool[i++].split = Split::train;
  for (size_t k = 0; k < n_valid; ++k) pool[i++].split = Split::valid;
  for (size_t k = 0; k < n_test; ++k) pool[i++].split = Split::test;
  for (auto& e : pool) out.push_back(std::move(e));
}

// Driver for tasks whose label is a pure function of the sentence: fills one
// pool per class in corpus order, then deals splits per class.
inline std::vector<ProbingExample> fill_labeled(
    const std::string& task, const std::vector<Sentence>& corpus, const TaskConfig& cfg,
    ExtractionRegistry& reg, Rng& rng, const std::vector<std::string>& classes,
    const std::function<std::optional<ProbingExample>(const Sentence&)>& classify) {
  cfg.check_divisible(task, classes.size());
  const size_t per_class = cfg.sizes.total() / classes.size();
  std::map<std::string, std::vector<ProbingExample>> pools;
  for (auto& c : classes) pools[c] = {};

  size_t open = classes.size();
  for (auto& s : corpus) {
    if (open == 0) break;
    if (!ingestible(s, cfg) || reg.contains(s.source_id)) continue;
    auto ex = classify(s);
    if (!ex) continue;
    auto it = pools.find(ex->label);
    if (it == pools.end()) continue;  // label outside the configured class set
    if (it->second.size() >= per_class) continue;
    ex->task = task;
    ex->source_id = s.source_id;
    reg.claim(s.source_id);
    it->second.push_back(std::move(*ex));
    if (it->second.size() == per_class) --open;
  }

  std::map<std::string, size_t> missing;
  for (auto& c : classes)
    if (pools[c].size() < per_class) missing[c] = per_class - pools[c].size();
  if (!missing.empty()) shortfall_error(task, missing);

  std::vector<ProbingExample> out;
  out.reserve(cfg.sizes.total());
  for (auto& c : classes)
    deal_splits(pools[c], cfg.sizes.train / classes.size(), cfg.sizes.valid / classes.size(),
                cfg.sizes.test / classes.size(), rng, out);
  return out;
}

// Driver for the transformation tasks (two labels, positive side mutates the
// sentence). `make` is called with the wanted polarity and returns the
// example, or nullopt when the sentence cannot serve that polarity.
inline std::vector<ProbingExample> fill_binary(
    const std::string& task, const std::vector<Sentence>& corpus, const TaskConfig& cfg,
    ExtractionRegistry& reg, Rng& rng, const std::string& pos_label, const std::string& neg_label,
    const std::function<std::optional<ProbingExample>(const Sentence&, bool positive)>& make) {
  cfg.check_divisible(task, 2);
  const size_t per_class = cfg.sizes.total() / 2;
  std::vector<ProbingExample> pos_pool, neg_pool;

  for (auto& s : corpus) {
    if (pos_pool.size() == per_class && neg_pool.size() == per_class) break;
    if (!ingestible(s, cfg) || reg.contains(s.source_id)) continue;

    bool pos_open = pos_pool.size() < per_class;
    bool neg_open = neg_pool.size() < per_class;
    std::optional<ProbingExample> ex;
    if (pos_open && neg_open) {
      // probe the positive transform first so the coin is only spent on
      // sentences that could take either label
      ex = make(s, true);
      if (ex) {
        if (!rng.coin()) ex = make(s, false);
      } else {
        ex = make(s, false);
      }
    } else if (pos_open) {
      ex = make(s, true);
    } else {
      ex = make(s, false);
    }
    if (!ex) continue;
    bool is_pos = ex->label == pos_label;
    if (!is_pos && ex->label != neg_label)
      fail(task + ": extractor produced unknown label " + ex->label);
    auto& pool = is_pos ? pos_pool : neg_pool;
    if (pool.size() >= per_class) continue;
    ex->task = task;
    ex->source_id = s.source_id;
    reg.claim(s.source_id);
    pool.push_back(std::move(*ex));
  }

  std::map<std::string, size_t> missing;
  if (pos_pool.size() < per_class) missing[pos_label] = per_class - pos_pool.size();
  if (neg_pool.size() < per_class) missing[neg_label] = per_class - neg_pool.size();
  if (!missing.empty()) shortfall_error(task, missing);

  std::vector<ProbingExample> out;
  out.reserve(cfg.sizes.total());
  // label order fixed: positive pool first, then negative
  deal_splits(pos_pool, cfg.sizes.train / 2, cfg.sizes.valid / 2, cfg.sizes.test / 2, rng, out);
  deal_splits(neg_pool, cfg.sizes.train / 2, cfg.sizes.valid / 2, cfg.sizes.test / 2, rng, out);
  return out;
}

}  // namespace detail

// ---- SentLen ----

inline std::vector<ProbingExample> extract_sentlen(const std::vector<Sentence>& corpus,
                                                   const FrequencyTable&, const TaskConfig& cfg,
                                                   ExtractionRegistry& reg, Rng& rng) {
  std::vector<std::string> classes;
  for (size_t i = 0; i < cfg.sentlen_bins.size(); ++i) classes.push_back(std::to_string(i));
  return detail::fill_labeled("sentlen", corpus, cfg, reg, rng, classes,
                              [&](const Sentence& s) -> std::optional<ProbingExample> {
                                int bin = cfg.bin_of(s.size());
                                if (bin < 0) return std::nullopt;
                                ProbingExample e;
                                e.label = std::to_string(bin);
                                e.tokens = s.forms();
                                return e;
                              });
}

// ---- WC ----

inline std::vector<ProbingExample> extract_wc(const std::vector<Sentence>& corpus,
                                              const FrequencyTable& freq, const TaskConfig& cfg,
                                              ExtractionRegistry& reg, Rng& rng) {
  std::vector<std::string> targets = corpus::select_target_vocabulary(freq, cfg.wc_window, cfg.wc_n);
  std::set<std::string> target_set(targets.begin(), targets.end());
  return detail::fill_labeled(
      "wc", corpus, cfg, reg, rng, targets,
      [&](const Sentence& s) -> std::optional<ProbingExample> {
        // accepted iff exactly one occurrence of exactly one target word
        std::string hit;
        for (auto& t : s.tokens) {
          std::string f = detail::fold(t.form, cfg);
          if (!target_set.count(f)) continue;
          if (!hit.empty()) return std::nullopt;  // second occurrence or second target
          hit = f;
        }
        if (hit.empty()) return std::nullopt;
        ProbingExample e;
        e.label = hit;
        e.tokens = s.forms();
        return e;
      });
}

// ---- TreeDepth ----

inline std::vector<ProbingExample> extract_treedepth(const std::vector<Sentence>& corpus,
                                                     const FrequencyTable&, const TaskConfig& cfg,
                                                     ExtractionRegistry& reg, Rng& rng) {
  const std::string task = "treedepth";
  const size_t n_classes = cfg.treedepth_classes.size();
  const size_t n_bins = cfg.sentlen_bins.size();
  cfg.check_divisible(task, n_classes);

  // per-split class quota, dealt across length bins; remainders go to the
  // lowest-indexed bins so cell counts within a class differ by at most one
  auto cell_quota = [&](int split, size_t bin) {
    size_t class_quota = cfg.sizes.of(split) / n_classes;
    return class_quota / n_bins + (bin < class_quota % n_bins ? 1 : 0);
  };
  auto cell_total = [&](size_t bin) {
    return cell_quota(0, bin) + cell_quota(1, bin) + cell_quota(2, bin);
  };

  std::map<int, size_t> class_index;
  for (size_t i = 0; i < n_classes; ++i) class_index[cfg.treedepth_classes[i]] = i;

  std::vector<std::vector<std::vector<ProbingExample>>> cells(
      n_classes, std::vector<std::vector<ProbingExample>>(n_bins));
  size_t remaining = 0;
  for (size_t b = 0; b < n_bins; ++b) remaining += n_classes * cell_total(b);
  for (auto& s : corpus) {
    if (remaining == 0) break;
    if (!detail::ingestible(s, cfg) || reg.contains(s.source_id)) continue;
    int bin = cfg.bin_of(s.size());
    if (bin < 0) continue;
    if (!corpus::is_tree(s)) continue;
    auto ci = class_index.find(corpus::tree_depth(s));
    if (ci == class_index.end()) continue;
    auto& cell = cells[ci->second][bin];
    if (cell.size() >= cell_total(bin)) continue;
    ProbingExample e;
    e.task = task;
    e.label = std::to_string(ci->first);
    e.tokens = s.forms();
    e.source_id = s.source_id;
    reg.claim(s.source_id);
    cell.push_back(std::move(e));
    --remaining;
  }

  std::map<std::string, size_t> missing;
  for (size_t c = 0; c < n_classes; ++c) {
    size_t short_total = 0;
    for (size_t b = 0; b < n_bins; ++b)
      if (cells[c][b].size() < cell_total(b)) short_total += cell_total(b) - cells[c][b].size();
    if (short_total)
      missing["depth" + std::to_string(cfg.treedepth_classes[c])] = short_total;
  }
  if (!missing.empty()) detail::shortfall_error(task, missing);

  std::vector<ProbingExample> out;
  out.reserve(cfg.sizes.total());
  for (size_t c = 0; c < n_classes; ++c)
    for (size_t b = 0; b < n_bins; ++b)
      detail::deal_splits(cells[c][b], cell_quota(0, b), cell_quota(1, b), cell_quota(2, b), rng,
                          out);
  return out;
}

// ---- BiShift ----

namespace detail {
// adjacent positions whose forms differ, neither token punctuation
inline std::vector<size_t> bishift_pairs(const Sentence& s) {
  std::vector<size_t> out;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    if (s.tokens[i].form == s.tokens[i + 1].form) continue;
    if (s.tokens[i].upos == "PUNCT" || s.tokens[i + 1].upos == "PUNCT") continue;
    out.push_back(i);
  }
  return out;
}
}  // namespace detail

inline std::vector<ProbingExample> extract_bishift(const std::vector<Sentence>& corpus,
                                                   const FrequencyTable&, const TaskConfig& cfg,
                                                   ExtractionRegistry& reg, Rng& rng) {
  return detail::fill_binary(
      "bishift", corpus, cfg, reg, rng, "I", "O",
      [&](const Sentence& s, bool positive) -> std::optional<ProbingExample> {
        if (s.size() < 4) return std::nullopt;
        auto pairs = detail::bishift_pairs(s);
        if (pairs.empty()) return std::nullopt;  // required for both labels
        ProbingExample e;
        e.tokens = s.forms();
        if (positive) {
          size_t i = pairs[rng.index(pairs.size())];
          std::swap(e.tokens[i], e.tokens[i + 1]);
          e.label = "I";
          e.op_a = static_cast<int>(i);
        } else {
          e.label = "O";
        }
        return e;
      });
}

// ---- CoordInv ----

struct CoordSegments {
  size_t a_len = 0;      // first conjunct (sentence prefix, contains the root)
  size_t fixed_len = 0;  // optional punctuation run + the cc token
  size_t b_len = 0;      // second conjunct (the conj child's remaining span)
                         // anything after is a punctuation-only suffix
};

// Eligibility probe: root with exactly one conj child, that child with exactly
// one cc child; the conj subtree must be a contiguous block [punct* cc B],
// preceded by the first conjunct and followed only by punctuation.
inline std::optional<CoordSegments> coord_segments(const Sentence& s) {
  if (!corpus::is_tree(s)) return std::nullopt;
  int root = corpus::root_id(s);
  auto conj = corpus::children_with_deprel(s, root, "conj");
  if (conj.size() != 1) return std::nullopt;
  auto cc = corpus::children_with_deprel(s, conj[0], "cc");
  if (cc.size() != 1) return std::nullopt;
  corpus::Span c2 = corpus::subtree_span(s, conj[0]);
  if (!c2.contiguous) return std::nullopt;
  int cc_id = cc[0];
  if (cc_id < c2.lo || cc_id > c2.hi) return std::nullopt;
  for (int i = c2.lo; i < cc_id; ++i)  // prefix of the block: punctuation only
    if (s.tokens[i - 1].upos != "PUNCT") return std::nullopt;
  if (cc_id >= c2.hi) return std::nullopt;  // second conjunct must be non-empty
  if (c2.lo < 2) return std::nullopt;       // first conjunct must be non-empty
  if (root >= c2.lo) return std::nullopt;   // ...and hold the root
  for (int i = c2.hi + 1; i <= static_cast<int>(s.size()); ++i)
    if (s.tokens[i - 1].upos != "PUNCT") return std::nullopt;
  CoordSegments seg;
  seg.a_len = static_cast<size_t>(c2.lo - 1);
  seg.fixed_len = static_cast<size_t>(cc_id - c2.lo + 1);
  seg.b_len = static_cast<size_t>(c2.hi - cc_id);
  return seg;
}

// [A | fixed | B | suffix] -> [B | fixed | A | suffix]; applying the result's
// recorded segmentation (b, fixed, a) swaps back.
inline std::vector<std::string> apply_coord_swap(const std::vector<std::string>& forms,
                                                 size_t a_len, size_t fixed_len, size_t b_len) {
  if (a_len + fixed_len + b_len > forms.size()) fail("apply_coord_swap: segments exceed sentence");
  std::vector<std::string> out;
  out.reserve(forms.size());
  auto at = forms.begin();
  out.insert(out.end(), at + a_len + fixed_len, at + a_len + fixed_len + b_len);   // B
  out.insert(out.end(), at + a_len, at + a_len + fixed_len);                       // fixed
  out.insert(out.end(), at, at + a_len);                                           // A
  out.insert(out.end(), at + a_len + fixed_len + b_len, forms.end());              // suffix
  return out;
}

inline std::vector<ProbingExample> extract_coordinv(const std::vector<Sentence>& corpus,
                                                    const FrequencyTable&, const TaskConfig& cfg,
                                                    ExtractionRegistry& reg, Rng& rng) {
  return detail::fill_binary(
      "coordinv", corpus, cfg, reg, rng, "I", "O",
      [&](const Sentence& s, bool positive) -> std::optional<ProbingExample> {
        auto seg = coord_segments(s);
        if (!seg) return std::nullopt;
        auto forms = s.forms();
        auto swapped = apply_coord_swap(forms, seg->a_len, seg->fixed_len, seg->b_len);
        if (swapped == forms) return std::nullopt;  // swap must be visible
        ProbingExample e;
        if (positive) {
          e.tokens = std::move(swapped);
          e.label = "I";
          e.op_a = static_cast<int>(seg->a_len);
          e.op_b = static_cast<int>(seg->fixed_len);
          e.op_c = static_cast<int>(seg->b_len);
        } else {
          e.tokens = std::move(forms);
          e.label = "O";
        }
        return e;
      });
}

// ---- SubjNum / ObjNum ----

namespace detail {
inline std::vector<ProbingExample> extract_number(const std::string& task, const std::string& rel,
                                                  const std::vector<Sentence>& corpus,
                                                  const TaskConfig& cfg, ExtractionRegistry& reg,
                                                  Rng& rng) {
  return fill_labeled(task, corpus, cfg, reg, rng, {"Plur", "Sing"},
                      [&, rel](const Sentence& s) -> std::optional<ProbingExample> {
                        if (!corpus::is_tree(s)) return std::nullopt;
                        auto kids = corpus::children_with_deprel(s, corpus::root_id(s), rel);
                        if (kids.size() != 1) return std::nullopt;
                        const std::string* num = s.by_id(kids[0]).feat("Number");
                        if (!num || (*num != "Sing" && *num != "Plur")) return std::nullopt;
                        ProbingExample e;
                        e.label = *num;
                        e.tokens = s.forms();
                        return e;
                      });
}
}  // namespace detail

inline std::vector<ProbingExample> extract_subjnum(const std::vector<Sentence>& corpus,
                                                   const FrequencyTable&, const TaskConfig& cfg,
                                                   ExtractionRegistry& reg, Rng& rng) {
  return detail::extract_number("subjnum", "nsubj", corpus, cfg, reg, rng);
}

inline std::vector<ProbingExample> extract_objnum(const std::vector<Sentence>& corpus,
                                                  const FrequencyTable&, const TaskConfig& cfg,
                                                  ExtractionRegistry& reg, Rng& rng) {
  return detail::extract_number("objnum", "obj", corpus, cfg, reg, rng);
}

// ---- Tense ----

inline std::vector<ProbingExample> extract_tense(const std::vector<Sentence>& corpus,
                                                 const FrequencyTable&, const TaskConfig& cfg,
                                                 ExtractionRegistry& reg, Rng& rng) {
  return detail::fill_labeled(
      "tense", corpus, cfg, reg, rng, {"Past", "Pres"},
      [&](const Sentence& s) -> std::optional<ProbingExample> {
        if (!corpus::is_tree(s)) return std::nullopt;
        const corpus::Token& root = s.by_id(corpus::root_id(s));
        const std::string* tense = nullptr;
        if (const std::string* t = root.feat("Tense")) {
          if (root.upos != "VERB") return std::nullopt;  // only verbal roots label directly
          tense = t;
        } else {
          auto aux = corpus::children_with_deprel(s, root.id, "aux");
          if (aux.size() != 1) return std::nullopt;
          tense = s.by_id(aux[0]).feat("Tense");
          if (!tense) return std::nullopt;
        }
        if (*tense != "Past" && *tense != "Pres") return std::nullopt;
        ProbingExample e;
        e.label = *tense;
        e.tokens = s.forms();
        return e;
      });
}

// ---- SOMO ----

inline std::vector<ProbingExample> extract_somo(const std::vector<Sentence>& corpus,
                                                const FrequencyTable& freq, const TaskConfig& cfg,
                                                ExtractionRegistry& reg, Rng& rng) {
  return detail::fill_binary(
      "somo", corpus, cfg, reg, rng, "C", "O",
      [&](const Sentence& s, bool positive) -> std::optional<ProbingExample> {
        if (s.size() < 3) return std::nullopt;  // needs a non-initial, non-final position
        ProbingExample e;
        e.tokens = s.forms();
        if (!positive) {
          e.label = "O";  // a sentence with no replaceable position still serves as original
          return e;
        }
        std::vector<std::pair<size_t, std::vector<std::string>>> eligible;
        for (size_t i = 1; i + 1 < s.size(); ++i) {
          auto cands = somo_candidates(detail::fold(e.tokens[i - 1], cfg),
                                       detail::fold(e.tokens[i], cfg),
                                       detail::fold(e.tokens[i + 1], cfg), freq, cfg);
          if (!cands.empty())
            eligible.emplace_back(i, std::vector<std::string>(cands.begin(), cands.end()));
        }
        if (eligible.empty()) return std::nullopt;
        auto& [pos, cands] = eligible[rng.index(eligible.size())];
        e.op_a = static_cast<int>(pos);
        e.op_form = e.tokens[pos];
        e.tokens[pos] = cands[rng.index(cands.size())];
        e.label = "C";
        return e;
      });
}

// ---- whole-run driver ----

inline std::vector<ProbingExample> extract_task(const std::string& task,
                                                const std::vector<Sentence>& corpus,
                                                const FrequencyTable& freq, const TaskConfig& cfg,
                                                ExtractionRegistry& reg, Rng& rng) {
  if (task == "sentlen") return extract_sentlen(corpus, freq, cfg, reg, rng);
  if (task == "wc") return extract_wc(corpus, freq, cfg, reg, rng);
  if (task == "treedepth") return extract_treedepth(corpus, freq, cfg, reg, rng);
  if (task == "bishift") return extract_bishift(corpus, freq, cfg, reg, rng);
  if (task == "subjnum") return extract_subjnum(corpus, freq, cfg, reg, rng);
  if (task == "objnum") return extract_objnum(corpus, freq, cfg, reg, rng);
  if (task == "coordinv") return extract_coordinv(corpus, freq, cfg, reg, rng);
  if (task == "somo") return extract_somo(corpus, freq, cfg, reg, rng);
  if (task == "tense") return extract_tense(corpus, freq, cfg, reg, rng);
  fail("extract_task: unknown task " + task);
}

// Runs every task in cfg.task_order against a shared registry; each task gets
// an independent stream derived from the run seed, so adding or removing a
// task never perturbs the others.
inline std::map<std::string, std::vector<ProbingExample>> run_extraction(
    const std::vector<Sentence>& corpus, const FrequencyTable& freq, const TaskConfig& cfg) {
  cfg.validate();
  ExtractionRegistry reg;
  std::map<std::string, std::vector<ProbingExample>> out;
  for (auto& task : cfg.task_order) {
    if (out.count(task)) fail("run_extraction: duplicate task " + task);
    Rng rng(ndiff::derive_seed(cfg.seed, task));
    out[task] = extract_task(task, corpus, freq, cfg, reg, rng);
  }
  return out;
}

}  // namespace clprobe::taskgen
