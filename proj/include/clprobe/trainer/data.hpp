#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/encoders/nli.hpp"
#include "clprobe/ndiff/rng.hpp"

namespace clprobe::trainer {

struct NliExample {
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;
  std::string label;  // entailment | neutral | contradiction
};

struct ParallelPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

inline void validate_nli_example(const NliExample& ex, const std::string& where) {
  if (ex.premise.empty() || ex.hypothesis.empty()) fail(where + ": empty sentence");
  encoders::nli_label_index(ex.label);  // throws on unknown label
}

// TSV: premise<TAB>hypothesis<TAB>label, tokens space-separated.
inline std::vector<NliExample> parse_nli_tsv(const std::string& text) {
  std::vector<NliExample> out;
  size_t lineno = 0;
  for (auto& line : split(text, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      fail("nli data line " + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
           std::to_string(cols.size()));
    NliExample ex{split_ws(cols[0]), split_ws(cols[1]), trim(cols[2])};
    validate_nli_example(ex, "nli data line " + std::to_string(lineno));
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::string serialize_nli_tsv(const std::vector<NliExample>& data) {
  std::string out;
  for (auto& ex : data) {
    validate_nli_example(ex, "nli example");
    out += join(ex.premise, " ") + "\t" + join(ex.hypothesis, " ") + "\t" + ex.label + "\n";
  }
  return out;
}

inline std::vector<NliExample> load_nli_tsv(const std::string& path) {
  return parse_nli_tsv(read_file(path));
}

// Two aligned files, one tokenized sentence per line. Line counts must match;
// max_pairs = 0 keeps everything.
inline std::vector<ParallelPair> parse_parallel(const std::string& src_text,
                                                const std::string& tgt_text,
                                                size_t max_pairs = 0) {
  auto src_lines = split(src_text, '\n');
  auto tgt_lines = split(tgt_text, '\n');
  while (!src_lines.empty() && src_lines.back().empty()) src_lines.pop_back();
  while (!tgt_lines.empty() && tgt_lines.back().empty()) tgt_lines.pop_back();
  if (src_lines.size() != tgt_lines.size())
    fail("parallel corpus: line counts differ (" + std::to_string(src_lines.size()) + " vs " +
         std::to_string(tgt_lines.size()) + ")");
  std::vector<ParallelPair> out;
  for (size_t i = 0; i < src_lines.size(); ++i) {
    ParallelPair p{split_ws(src_lines[i]), split_ws(tgt_lines[i])};
    if (p.source.empty() || p.target.empty())
      fail("parallel corpus line " + std::to_string(i + 1) + ": empty sentence");
    out.push_back(std::move(p));
    if (max_pairs != 0 && out.size() == max_pairs) break;
  }
  return out;
}

inline std::vector<ParallelPair> load_parallel(const std::string& src_path,
                                               const std::string& tgt_path, size_t max_pairs = 0) {
  return parse_parallel(read_file(src_path), read_file(tgt_path), max_pairs);
}

// TSV: source_word<TAB>target_word.
inline std::vector<std::pair<std::string, std::string>> parse_dictionary(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  size_t lineno = 0;
  for (auto& line : split(text, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      fail("dictionary line " + std::to_string(lineno) + ": expected source<TAB>target");
    out.emplace_back(cols[0], cols[1]);
  }
  return out;
}

// Balanced 3-class data with a latent rule that a linear model can pick up:
// entailment keeps a subset of the premise, contradiction adds the negation
// marker to such a subset, neutral uses disjoint content words. Premises draw
// from the first two thirds of the content vocabulary and neutral hypotheses
// from the last third, so class identity stays recoverable from word identity
// alone even at desk-scale encoder sizes.
inline std::vector<NliExample> make_toy_nli(const std::vector<std::string>& vocabulary,
                                            const std::string& negation_marker, size_t n,
                                            uint64_t seed) {
  if (vocabulary.size() < 20) fail("make_toy_nli: vocabulary must hold at least 20 words");
  if (n % 3 != 0) fail("make_toy_nli: n must be divisible by 3");
  std::vector<std::string> content;
  bool has_marker = false;
  for (auto& w : vocabulary) {
    if (w == negation_marker)
      has_marker = true;
    else
      content.push_back(w);
  }
  if (!has_marker) fail("make_toy_nli: negation marker not in vocabulary");
  size_t n_neutral = content.size() / 3;
  std::vector<std::string> premise_pool(content.begin(), content.end() - n_neutral);
  std::vector<std::string> neutral_pool(content.end() - n_neutral, content.end());

  ndiff::Rng rng(seed);
  std::vector<NliExample> out;
  for (size_t i = 0; i < n / 3; ++i) {
    size_t k = 5 + rng.index(4);  // premise length 5..8
    std::vector<std::string> pool = premise_pool;
    rng.shuffle(pool);
    std::vector<std::string> premise(pool.begin(), pool.begin() + k);

    auto subset = [&] {
      std::vector<std::string> hyp = premise;
      rng.shuffle(hyp);
      hyp.resize(2 + rng.index(k - 2));  // 2..k-1 tokens
      return hyp;
    };

    out.push_back({premise, subset(), "entailment"});

    std::vector<std::string> contra = subset();
    contra.insert(contra.begin() + static_cast<long>(rng.index(contra.size() + 1)),
                  negation_marker);
    out.push_back({premise, contra, "contradiction"});

    std::vector<std::string> rest = neutral_pool;
    rng.shuffle(rest);
    std::vector<std::string> neutral(rest.begin(), rest.begin() + 2 + rng.index(3));
    out.push_back({premise, neutral, "neutral"});
  }
  rng.shuffle(out);
  return out;
}

}  // namespace clprobe::trainer
