// Acceptance gate: ten end-to-end criteria, one pass/fail line each.
//
//   acceptance          run all ten
//   acceptance N        run criterion N only
//
// Exit 0 iff every executed criterion passes. Tolerances and runtime budgets
// are pinned here, next to the check they gate. Criteria 4/5 share one
// synthetic-corpus extraction and 9/10 share one trained encoder, computed
// lazily so single-criterion runs stay cheap.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clprobe/corpus/frequency.hpp"
#include "clprobe/corpus/io.hpp"
#include "clprobe/corpus/synth.hpp"
#include "clprobe/encoders/embedding.hpp"
#include "clprobe/encoders/encoder.hpp"
#include "clprobe/encoders/nli.hpp"
#include "clprobe/ndiff/gradcheck.hpp"
#include "clprobe/probe/runner.hpp"
#include "clprobe/report/matrix.hpp"
#include "clprobe/report/report.hpp"
#include "clprobe/report/spearman.hpp"
#include "clprobe/taskgen/extract.hpp"
#include "clprobe/taskgen/manifest.hpp"
#include "clprobe/taskgen/somo.hpp"
#include "clprobe/trainer/align.hpp"
#include "clprobe/trainer/data.hpp"
#include "clprobe/trainer/nli_trainer.hpp"
#include "clprobe/trainer/procrustes.hpp"

namespace {

using namespace clprobe;
using ndiff::Rng;
using ndiff::Tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// ---------- criterion 1: per-task mean/stddev from the published accuracies ----------

Outcome criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  report::ResultMatrix m;
  report::load_results_tsv(m, read_file("data/reference_results.tsv"));
  auto stats = report::task_stats(m);

  const std::map<std::string, std::pair<double, double>> expected = {
      {"bishift", {0.558, 0.013}},  {"coordinv", {0.656, 0.111}}, {"objnum", {0.605, 0.073}},
      {"somo", {0.505, 0.011}},     {"tense", {0.708, 0.124}},    {"sentlen", {0.523, 0.259}},
      {"subjnum", {0.643, 0.099}},  {"wc", {0.152, 0.115}},       {"treedepth", {0.330, 0.082}}};
  const double tol = 0.002;

  if (stats.size() != expected.size())
    return {false, "expected 9 tasks, got " + std::to_string(stats.size())};
  double worst = 0.0;
  std::string worst_cell;
  for (auto& s : stats) {
    auto it = expected.find(s.task);
    if (it == expected.end()) return {false, "unexpected task " + s.task};
    double dm = std::fabs(s.mean - it->second.first);
    double ds = std::fabs(s.stddev - it->second.second);
    if (dm > worst) worst = dm, worst_cell = s.task + " mean";
    if (ds > worst) worst = ds, worst_cell = s.task + " stddev";
  }
  double secs = seconds_since(t0);
  bool pass = worst <= tol && secs < 1.0;
  return {pass, "9 task stats vs published table, worst |delta| " + fmt(worst) + " (" +
                    worst_cell + ", tol " + fmt(tol) + "), " + fmt(secs, 2) + "s (budget 1s)"};
}

// ---------- criterion 2: relative-to-English matrix spot checks ----------

Outcome criterion2() {
  report::ResultMatrix m;
  report::load_results_tsv(m, read_file("data/reference_results.tsv"));
  auto rel = report::relative_matrix(m, "en");

  auto cell = rel.get("sentlen", "attn_max", "de");
  if (!cell) return {false, "de/attn_max/sentlen cell undefined"};
  double want = 0.85 / 0.70;
  if (std::fabs(*cell - want) > 0.001)
    return {false, "de attn_max sentlen ratio " + fmt(*cell) + " != " + fmt(want) + " +- 0.001"};

  size_t en_cells = 0;
  for (auto& t : rel.tasks)
    for (auto& e : rel.encoders) {
      auto c = rel.get(t, e, "en");
      if (!c) return {false, "en cell " + t + "/" + e + " undefined"};
      if (*c != 1.0) return {false, "en cell " + t + "/" + e + " = " + fmt(*c, 12) + ", not 1.0"};
      ++en_cells;
    }
  return {true, "de attn_max sentlen ratio " + fmt(*cell) + " within 0.001 of " + fmt(want) +
                    "; all " + std::to_string(en_cells) + " English cells exactly 1.0"};
}

// ---------- criterion 3: finite-difference gradients for all six encoders ----------

Outcome criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-3;
  double worst = 0.0;
  std::string worst_at;

  for (auto& kind : encoders::kEncoderKinds) {
    // path 1: encoder -> feature combination -> 3-way classifier loss
    {
      Rng rng(41);
      Tensor prem = Tensor::uniform({4, 16}, -1, 1, rng);
      Tensor hyp = Tensor::uniform({5, 16}, -1, 1, rng);
      encoders::NliModel model(encoders::EncoderConfig::toy(kind), 29);
      auto loss = [&](bool with_grad) {
        ndiff::Tape tape;
        Rng drop(12345);  // reseeded per call so dropout masks replay exactly
        auto l = model.loss(tape, prem, hyp, 1, /*train=*/true, drop);
        if (with_grad) tape.backward(l);
        return tape.value(l).data[0];
      };
      ndiff::GradCheckOptions opt;
      opt.max_entries = 150;
      opt.sample_seed = 1000;
      auto res = ndiff::grad_check(model.store(), loss, opt);
      if (res.max_rel_err > worst) worst = res.max_rel_err, worst_at = kind + "/nli";
    }
    // path 2: target encoder under the contrastive alignment loss
    {
      Rng rng(43);
      auto cfg = encoders::EncoderConfig::toy(kind);
      ndiff::ParamStore store;
      Rng init(23);
      encoders::Encoder target(cfg, store, init, "tgt");
      Tensor e1 = Tensor::uniform({4, 16}, -1, 1, rng);
      Tensor e2 = Tensor::uniform({3, 16}, -1, 1, rng);
      size_t d = cfg.output_dim();
      Tensor sx = Tensor::uniform({d}, -1, 1, rng);
      Tensor sxc = Tensor::uniform({d}, -1, 1, rng);
      auto loss = [&](bool with_grad) {
        ndiff::Tape t;
        Rng dummy(0);
        auto y = target.encode(t, e1, false, dummy);
        auto yc = target.encode(t, e2, false, dummy);
        auto l = trainer::alignment_loss(t, t.constant(sx), y, t.constant(sxc), yc, 0.25);
        if (with_grad) t.backward(l);
        return t.value(l).data[0];
      };
      ndiff::GradCheckOptions opt;
      opt.max_entries = 150;
      opt.sample_seed = 2000;
      auto res = ndiff::grad_check(store, loss, opt);
      if (res.max_rel_err > worst) worst = res.max_rel_err, worst_at = kind + "/align";
    }
  }
  double secs = seconds_since(t0);
  bool pass = worst < tol && secs < 120.0;
  return {pass, "6 encoders x {nli, alignment} paths, worst rel err " + fmt(worst, 6) + " (" +
                    worst_at + ", tol 1e-3), " + fmt(secs, 1) + "s (budget 120s)"};
}

// ---------- shared fixture: synthetic corpus + full extraction (criteria 4, 5) ----------

struct SynthExtraction {
  std::vector<corpus::Sentence> corpus;
  corpus::FrequencyTable freq;
  taskgen::TaskConfig cfg;
  std::map<std::string, std::vector<taskgen::ProbingExample>> tasks;
  double build_secs = 0.0;
};

taskgen::TaskConfig synth_task_config() {
  taskgen::TaskConfig cfg;  // mirrors data/extract_synth.cfg
  cfg.sizes = {600, 60, 60};
  cfg.wc_window = {120, 200};
  cfg.wc_n = 60;
  cfg.treedepth_classes = {3, 4, 5, 6};
  cfg.seed = 1;
  return cfg;
}

const SynthExtraction& synth_extraction() {
  static SynthExtraction fx = [] {
    auto t0 = std::chrono::steady_clock::now();
    SynthExtraction f;
    corpus::SynthConfig sc;
    sc.seed = 1;
    sc.scale = 1.0;
    corpus::SynthInfo info;
    f.corpus = corpus::generate_corpus(sc, &info);
    f.freq = corpus::build_frequency_tables(f.corpus, false);
    f.cfg = synth_task_config();
    f.tasks = taskgen::run_extraction(f.corpus, f.freq, f.cfg);
    f.build_secs = seconds_since(t0);
    return f;
  }();
  return fx;
}

// ---------- criterion 4: dataset invariants on the >=50k synthetic corpus ----------

Outcome criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  const auto& fx = synth_extraction();
  if (fx.corpus.size() < 50000)
    return {false, "synthetic corpus has " + std::to_string(fx.corpus.size()) + " < 50k sentences"};

  // exact class balance and 10:1:1 split sizes per task
  for (auto& [task, examples] : fx.tasks) {
    std::map<taskgen::Split, std::map<std::string, size_t>> counts;
    std::set<std::string> labels;
    for (auto& e : examples) {
      counts[e.split][e.label]++;
      labels.insert(e.label);
    }
    const size_t want[3] = {600, 60, 60};  // configured 100:10:10, scaled
    for (auto split : {taskgen::Split::train, taskgen::Split::valid, taskgen::Split::test}) {
      size_t total = 0, per = want[static_cast<int>(split)] / labels.size();
      for (auto& [label, n] : counts[split]) {
        if (n != per)
          return {false, task + " " + taskgen::split_code(split) + " label " + label + ": " +
                             std::to_string(n) + " != " + std::to_string(per)};
        total += n;
      }
      if (total != want[static_cast<int>(split)])
        return {false, task + " " + taskgen::split_code(split) + " size " + std::to_string(total)};
    }
  }

  // zero cross-task source reuse
  std::map<std::string, std::string> owner;
  for (auto& [task, examples] : fx.tasks)
    for (auto& e : examples) {
      auto [it, fresh] = owner.emplace(e.source_id, task);
      if (!fresh && it->second != task)
        return {false, "source " + e.source_id + " used by " + it->second + " and " + task};
    }

  // byte-identical rerun (same seed, fresh extraction, serialized form)
  auto rerun = taskgen::run_extraction(fx.corpus, fx.freq, fx.cfg);
  auto tmp = std::filesystem::temp_directory_path() / "clprobe-acceptance";
  std::filesystem::create_directories(tmp);
  for (auto& [task, examples] : fx.tasks) {
    auto a = (tmp / (task + ".a.tsv")).string(), b = (tmp / (task + ".b.tsv")).string();
    taskgen::write_dataset(a, examples);
    taskgen::write_dataset(b, rerun.at(task));
    if (read_file(a) != read_file(b)) return {false, task + ": rerun bytes differ"};
  }
  uint64_t fp = corpus::corpus_fingerprint(fx.corpus);
  if (taskgen::build_manifest(fx.cfg, fp, fx.tasks) != taskgen::build_manifest(fx.cfg, fp, rerun))
    return {false, "rerun manifests differ"};

  double secs = seconds_since(t0) + fx.build_secs;
  bool pass = secs < 300.0;
  return {pass, "9 tasks on " + std::to_string(fx.corpus.size()) +
                    " sentences: exact balance, 600/60/60 splits, disjoint sources, " +
                    "byte-identical rerun, " + fmt(secs, 1) + "s (budget 300s)"};
}

// ---------- criterion 5: transformation involutions + substitution revalidation ----------

Outcome criterion5() {
  const auto& fx = synth_extraction();
  std::map<std::string, const corpus::Sentence*> by_id;
  for (auto& s : fx.corpus) by_id[s.source_id] = &s;

  size_t bishift_pos = 0, coord_pos = 0, somo_pos = 0;
  for (auto& e : fx.tasks.at("bishift")) {
    if (e.label != "I") continue;
    ++bishift_pos;
    auto restored = e.tokens;
    if (e.op_a < 0 || static_cast<size_t>(e.op_a) + 1 >= restored.size())
      return {false, "bishift " + e.source_id + ": bad swap index"};
    std::swap(restored[e.op_a], restored[e.op_a + 1]);
    if (restored != by_id.at(e.source_id)->forms())
      return {false, "bishift " + e.source_id + ": reapplied swap does not restore the source"};
  }
  for (auto& e : fx.tasks.at("coordinv")) {
    if (e.label != "I") continue;
    ++coord_pos;
    // the swap wrote [B fixed A suffix]; swapping back exchanges the outer blocks
    auto restored = taskgen::apply_coord_swap(e.tokens, e.op_c, e.op_b, e.op_a);
    if (restored != by_id.at(e.source_id)->forms())
      return {false, "coordinv " + e.source_id + ": reapplied swap does not restore the source"};
  }
  for (auto& e : fx.tasks.at("somo")) {
    if (e.label != "C") continue;
    ++somo_pos;
    size_t pos = static_cast<size_t>(e.op_a);
    if (pos == 0 || pos + 1 >= e.tokens.size())
      return {false, "somo " + e.source_id + ": bad substitution index"};
    auto cands = taskgen::somo_candidates(e.tokens[pos - 1], e.op_form, e.tokens[pos + 1],
                                          fx.freq, fx.cfg);
    if (!cands.count(e.tokens[pos]))
      return {false, "somo " + e.source_id + ": substitute '" + e.tokens[pos] +
                         "' fails the log-frequency predicate"};
  }
  bool pass = bishift_pos == 360 && coord_pos == 360 && somo_pos == 360;
  return {pass, "involutions hold for " + std::to_string(bishift_pos) + " bishift + " +
                    std::to_string(coord_pos) + " coordinv positives; " +
                    std::to_string(somo_pos) + " substitutions revalidated (360 each expected)"};
}

// ---------- criterion 6: substitution candidates equal a brute-force vocabulary scan ----------

Outcome criterion6() {
  // Zipf-ish toy corpus: a small frequent core makes bigrams repeat, a long
  // tail keeps the bigram inventory wide.
  std::vector<std::string> vocab;
  for (int i = 0; i < 12; ++i) vocab.push_back("core" + std::to_string(i));
  for (int i = 0; i < 48; ++i) vocab.push_back("tail" + std::to_string(i));
  Rng rng(7);
  std::vector<corpus::Sentence> corpus;
  for (int n = 0; n < 400; ++n) {
    corpus::Sentence s;
    s.source_id = "toy:" + std::to_string(n);
    for (int i = 1; i <= 6; ++i) {
      size_t pick = rng.index(4) ? rng.index(12) : 12 + rng.index(48);
      corpus::Token t;
      t.id = i;
      t.form = vocab[pick];
      t.lemma = t.form;
      t.upos = "X";
      t.head = i - 1;
      t.deprel = i == 1 ? "root" : "dep";
      s.tokens.push_back(t);
    }
    corpus.push_back(std::move(s));
  }
  auto freq = corpus::build_frequency_tables(corpus, false);
  if (freq.bigram.size() < 500)
    return {false, "toy corpus has only " + std::to_string(freq.bigram.size()) +
                       " distinct bigrams (need >= 500)"};

  taskgen::TaskConfig cfg = synth_task_config();
  size_t positions = 0, nonempty = 0;
  for (auto& s : corpus) {
    auto forms = s.forms();
    for (size_t i = 1; i + 1 < forms.size(); ++i) {
      const auto& prev = forms[i - 1];
      const auto& orig = forms[i];
      const auto& next = forms[i + 1];
      auto got = taskgen::somo_candidates(prev, orig, next, freq, cfg);

      // independent brute force: scan every vocabulary form, apply the
      // definition directly
      std::set<std::string> want;
      uint64_t f_po = freq.bi_count(prev, orig), f_on = freq.bi_count(orig, next);
      if (f_po >= cfg.somo_min_bigram_count && f_on >= cfg.somo_min_bigram_count) {
        for (auto& [c, _] : freq.unigram) {
          if (c == orig) continue;
          uint64_t f_pc = freq.bi_count(prev, c), f_cn = freq.bi_count(c, next);
          if (f_pc < cfg.somo_min_bigram_count || f_cn < cfg.somo_min_bigram_count) continue;
          if (std::fabs(std::log(double(f_pc)) - std::log(double(f_po))) >
              cfg.somo_log_tolerance)
            continue;
          if (std::fabs(std::log(double(f_cn)) - std::log(double(f_on))) >
              cfg.somo_log_tolerance)
            continue;
          want.insert(c);
        }
      }
      ++positions;
      if (!want.empty()) ++nonempty;
      if (got != want)
        return {false, s.source_id + " position " + std::to_string(i) + ": candidate sets differ (" +
                           std::to_string(got.size()) + " vs " + std::to_string(want.size()) + ")"};
    }
  }
  bool pass = nonempty >= 25;
  return {pass, std::to_string(positions) + " positions over " +
                    std::to_string(freq.bigram.size()) + " distinct bigrams match brute force, " +
                    std::to_string(nonempty) + " with non-empty candidates (need >= 25)"};
}

// ---------- criterion 7: orthogonal mapping recovery ----------

Outcome criterion7() {
  Rng rng(51);
  const size_t d = 50, n = 200;
  Tensor q = trainer::random_orthogonal(d, rng);
  Tensor x = Tensor::uniform({n, d}, -1, 1, rng);
  Tensor y = Tensor::zeros({n, d});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) {
      double s = 0;
      for (size_t k = 0; k < d; ++k) s += x.at(i, k) * q.at(k, j);
      y.at(i, j) = s;
    }
  Tensor w = trainer::procrustes_map(x, y);
  double frob = 0;
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) frob += (w.at(i, j) - q.at(i, j)) * (w.at(i, j) - q.at(i, j));
  frob = std::sqrt(frob);
  if (frob >= 1e-6)
    return {false, "planted map not recovered: ||W - Q||_F = " + fmt(frob, 9)};

  // identity dictionary over one embedding table -> identity matrix
  std::vector<std::string> words;
  for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
  Rng erng(53);
  auto table = encoders::random_embeddings(words, 12, erng);
  std::vector<std::pair<std::string, std::string>> dict;
  for (auto& w2 : words) dict.emplace_back(w2, w2);
  auto dm = trainer::dictionary_matrices(dict, table, table);
  Tensor wi = trainer::procrustes_map(dm.x, dm.y);
  double worst = 0;
  for (size_t i = 0; i < 12; ++i)
    for (size_t j = 0; j < 12; ++j)
      worst = std::max(worst, std::fabs(wi.at(i, j) - (i == j ? 1.0 : 0.0)));
  bool pass = worst < 1e-8;
  return {pass, "planted d=50 map: ||W - Q||_F = " + fmt(frob, 9) +
                    " (tol 1e-6); identity dictionary: max |W - I| = " + fmt(worst, 12) +
                    " (tol 1e-8)"};
}

// ---------- criterion 8: rank correlation against a definitional oracle ----------

// independent oracle: positional average ranks by O(n^2) counting, then the
// textbook Pearson formula
double spearman_oracle(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      size_t less = 0, equal = 0;
      for (size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++less;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return r;
  };
  auto rx = ranks(xs), ry = ranks(ys);
  double mx = 0, my = 0;
  for (size_t i = 0; i < rx.size(); ++i) mx += rx[i], my += ry[i];
  mx /= double(rx.size()), my /= double(ry.size());
  double num = 0, dx = 0, dy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

Outcome criterion8() {
  std::vector<double> up, expo, down;
  for (int i = 1; i <= 20; ++i) {
    up.push_back(i);
    expo.push_back(std::exp(0.3 * i));
    down.push_back(-i);
  }
  if (report::spearman(up, expo) != 1.0) return {false, "monotone pair not exactly +1"};
  if (report::spearman(up, down) != -1.0) return {false, "antimonotone pair not exactly -1"};

  const std::vector<std::pair<std::vector<double>, std::vector<double>>> tie_cases = {
      {{1, 2, 2, 4}, {1, 3, 2, 4}},
      {{1, 1, 1, 2, 3}, {5, 4, 4, 4, 1}},
      {{2, 2, 2, 2, 7, 7}, {1, 5, 5, 2, 2, 9}},
      {{0.5, 0.5, 1.5, 1.5, 2.5}, {3, 3, 3, 1, 1}},
      {{10, 9, 9, 8, 8, 8, 7}, {1, 1, 2, 2, 3, 3, 4}},
  };
  double worst = 0;
  for (auto& [xs, ys] : tie_cases)
    worst = std::max(worst, std::fabs(report::spearman(xs, ys) - spearman_oracle(xs, ys)));

  // one hand-checkable pin: ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4) -> 3/sqrt(10)
  double pinned = report::spearman({1, 2, 2, 4}, {1, 3, 2, 4});
  double want = 3.0 / std::sqrt(10.0);
  if (std::fabs(pinned - want) > 1e-15)
    return {false, "tied spot value " + fmt(pinned, 16) + " != 3/sqrt(10)"};

  bool pass = worst <= 1e-12;
  return {pass, "exact +-1 on monotone pairs; " + std::to_string(tie_cases.size()) +
                    " tie cases vs definitional oracle, worst |delta| = " + fmt(worst, 16) +
                    " (tol 1e-12)"};
}

// ---------- shared fixture: trained toy encoder + length dataset (criteria 9, 10) ----------

const std::vector<std::string> kVocab = {
    "not",  "apple", "bird", "cat",  "dog",  "egg",  "fish", "goat",
    "hat",  "ink",   "jam",  "kite", "lamp", "moon", "nest", "owl",
    "pear", "quilt", "rose", "sun",  "tree", "urn",  "vase", "wolf"};

struct E2eFixture {
  encoders::EmbeddingTable table;
  std::unique_ptr<encoders::NliModel> model;
  trainer::NliTrainResult nli;
  std::vector<taskgen::ProbingExample> sentlen;
  probe::ProbeResult src_probe;
  double build_secs = 0.0;
};

std::vector<taskgen::ProbingExample> make_sentlen_dataset(uint64_t seed) {
  const std::vector<std::pair<size_t, size_t>> bins = {{5, 8},   {9, 12},  {13, 16},
                                                       {17, 20}, {21, 25}, {26, 28}};
  const size_t per_class[3] = {200, 40, 100};
  Rng rng(seed);
  std::vector<taskgen::ProbingExample> out;
  size_t id = 0;
  for (int split = 0; split < 3; ++split)
    for (size_t cls = 0; cls < bins.size(); ++cls)
      for (size_t k = 0; k < per_class[split]; ++k) {
        taskgen::ProbingExample e;
        e.task = "sentlen";
        e.split = static_cast<taskgen::Split>(split);
        e.label = std::to_string(cls);
        size_t len = bins[cls].first + rng.index(bins[cls].second - bins[cls].first + 1);
        for (size_t i = 0; i < len; ++i) e.tokens.push_back(kVocab[rng.index(kVocab.size())]);
        e.source_id = "e2e-" + std::to_string(id++);
        out.push_back(std::move(e));
      }
  return out;
}

const E2eFixture& e2e_fixture() {
  static E2eFixture fx = [] {
    auto t0 = std::chrono::steady_clock::now();
    E2eFixture f;
    auto data = trainer::make_toy_nli(kVocab, "not", 5001, ndiff::derive_seed(11, "toy-nli"));
    std::vector<trainer::NliExample> train(data.begin(), data.end() - 500);
    std::vector<trainer::NliExample> valid(data.end() - 500, data.end());

    std::vector<std::string> vocab_sorted(kVocab);
    std::sort(vocab_sorted.begin(), vocab_sorted.end());
    Rng erng(ndiff::derive_seed(11, "embeddings"));
    f.table = encoders::random_embeddings(vocab_sorted, 16, erng);

    f.model = std::make_unique<encoders::NliModel>(encoders::EncoderConfig::toy("rnn_max"),
                                                   ndiff::derive_seed(11, "nli-init"));
    trainer::NliTrainConfig tc;
    tc.epochs = 3;
    tc.batch = 10;
    tc.seed = 11;
    f.nli = trainer::train_nli(*f.model, train, valid, f.table, tc);

    f.sentlen = make_sentlen_dataset(71);
    probe::ProbeConfig pc;
    pc.epochs = 10;
    pc.seed = 5;
    f.src_probe = probe::run_probe(f.sentlen, f.model->encoder(), f.model->store(), f.table, pc,
                                   "", "en")
                      .result;
    f.build_secs = seconds_since(t0);
    return f;
  }();
  return fx;
}

// ---------- criterion 9: desk-scale pipeline end to end ----------

Outcome criterion9() {
  auto t0 = std::chrono::steady_clock::now();
  const auto& fx = e2e_fixture();
  std::ostringstream msg;

  if (fx.nli.best_valid_acc < 0.90)
    return {false, "toy NLI valid acc " + fmt(fx.nli.best_valid_acc) + " < 0.90"};
  msg << "toy NLI valid acc " << fmt(fx.nli.best_valid_acc);

  double src = fx.src_probe.test_acc, base = fx.src_probe.majority;
  if (src < base + 0.10)
    return {false, "length probe " + fmt(src) + " < majority " + fmt(base) + " + 0.10"};
  msg << "; length probe " << fmt(src) << " vs majority " << fmt(base);

  // identity mapping: the same sentences on both sides, fresh target encoder
  Rng prng(77);
  std::vector<trainer::ParallelPair> pairs;
  for (int i = 0; i < 700; ++i) {
    trainer::ParallelPair p;
    size_t len = 5 + prng.index(24);
    for (size_t k = 0; k < len; ++k) p.source.push_back(kVocab[prng.index(kVocab.size())]);
    p.target = p.source;
    pairs.push_back(std::move(p));
  }
  ndiff::ParamStore target_store;
  Rng init(ndiff::derive_seed(77, "map-init"));
  encoders::Encoder target(fx.model->encoder().config(), target_store, init);
  trainer::AlignConfig ac;
  ac.max_epochs = 10;
  auto stats = trainer::train_mapping(pairs, fx.model->encoder(), target, target_store, fx.table,
                                      fx.table, ac, 77);
  if (stats.best_dev_loss > 0.5 * stats.initial_dev_loss)
    return {false, "mapping dev loss " + fmt(stats.best_dev_loss) + " not half of initial " +
                       fmt(stats.initial_dev_loss)};
  msg << "; mapping dev loss " << fmt(stats.initial_dev_loss) << " -> " << fmt(stats.best_dev_loss);

  probe::ProbeConfig pc;
  pc.epochs = 10;
  pc.seed = 5;
  auto mapped = probe::run_probe(fx.sentlen, target, target_store, fx.table, pc, "", "en").result;
  if (std::fabs(mapped.test_acc - src) > 0.05)
    return {false, "mapped probe " + fmt(mapped.test_acc) + " not within 0.05 of source " +
                       fmt(src)};
  msg << "; mapped probe " << fmt(mapped.test_acc) << " (source " << fmt(src) << ")";

  double secs = seconds_since(t0) + fx.build_secs;
  msg << "; " << fmt(secs, 1) << "s (budget 900s)";
  return {secs < 900.0, msg.str()};
}

// ---------- criterion 10: label-shuffle null control ----------

Outcome criterion10() {
  const auto& fx = e2e_fixture();
  auto shuffled = fx.sentlen;
  Rng rng(99);
  for (int split = 0; split < 3; ++split) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < shuffled.size(); ++i)
      if (static_cast<int>(shuffled[i].split) == split) idx.push_back(i);
    std::vector<std::string> labels;
    for (size_t i : idx) labels.push_back(shuffled[i].label);
    rng.shuffle(labels);
    for (size_t k = 0; k < idx.size(); ++k) shuffled[idx[k]].label = labels[k];
  }
  probe::ProbeConfig pc;
  pc.epochs = 10;
  pc.seed = 5;
  auto r = probe::run_probe(shuffled, fx.model->encoder(), fx.model->store(), fx.table, pc, "",
                            "en")
               .result;
  double delta = std::fabs(r.test_acc - r.majority);
  bool pass = delta <= 0.03;
  return {pass, "label-shuffled probe " + fmt(r.test_acc) + " vs majority " + fmt(r.majority) +
                    ", |delta| = " + fmt(delta) + " (tol 0.03)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (!criteria.count(only)) {
      std::fprintf(stderr, "usage: acceptance [1-10]\n");
      return 2;
    }
  }

  bool all_pass = true;
  for (auto& [n, fn] : criteria) {
    if (only != 0 && n != only) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
