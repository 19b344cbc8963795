#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/corpus/conllu.hpp"

namespace clprobe::corpus {

struct FrequencyTable {
  std::map<std::string, uint64_t> unigram;
  std::map<std::pair<std::string, std::string>, uint64_t> bigram;
  uint64_t total_tokens = 0;

  uint64_t uni_count(const std::string& w) const {
    auto it = unigram.find(w);
    return it == unigram.end() ? 0 : it->second;
  }
  uint64_t bi_count(const std::string& a, const std::string& b) const {
    auto it = bigram.find({a, b});
    return it == bigram.end() ? 0 : it->second;
  }

  void merge(const FrequencyTable& other) {
    for (auto& [k, v] : other.unigram) unigram[k] += v;
    for (auto& [k, v] : other.bigram) bigram[k] += v;
    total_tokens += other.total_tokens;
  }
};

struct RankWindow {
  size_t lo = 0;  // inclusive rank
  size_t hi = 0;  // exclusive rank
};

// Counts every surface form and every adjacent within-sentence pair.
// Deterministic under sharding: counting is commutative.
inline FrequencyTable build_frequency_tables(const std::vector<Sentence>& corpus,
                                             bool case_fold = false) {
  if (corpus.empty()) fail("build_frequency_tables: empty corpus");
  FrequencyTable t;
  for (auto& s : corpus) {
    std::string prev;
    bool have_prev = false;
    for (auto& tok : s.tokens) {
      std::string form = case_fold ? ascii_lower(tok.form) : tok.form;
      ++t.unigram[form];
      ++t.total_tokens;
      if (have_prev) ++t.bigram[{prev, form}];
      prev = std::move(form);
      have_prev = true;
    }
  }
  return t;
}

// Forms ordered by descending count, ties lexicographic.
inline std::vector<std::pair<std::string, uint64_t>> ranked_unigrams(const FrequencyTable& t) {
  std::vector<std::pair<std::string, uint64_t>> v(t.unigram.begin(), t.unigram.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return v;
}

// First n forms whose frequency rank lies in [w.lo, w.hi).
inline std::vector<std::string> select_target_vocabulary(const FrequencyTable& t,
                                                         RankWindow w, size_t n) {
  if (w.lo >= w.hi) fail("select_target_vocabulary: window lo must be < hi");
  if (n > w.hi - w.lo)
    fail("select_target_vocabulary: need " + std::to_string(n) + " words from a window of " +
         std::to_string(w.hi - w.lo));
  auto ranked = ranked_unigrams(t);
  if (ranked.size() < w.hi)
    fail("select_target_vocabulary: need " + std::to_string(w.hi) +
         " distinct forms, table has " + std::to_string(ranked.size()));
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t r = w.lo; r < w.lo + n; ++r) out.push_back(ranked[r].first);
  return out;
}

// File layout:
//   #unigram
//   form<TAB>count          (descending count, then lexicographic)
//   #bigram
//   form<TAB>form<TAB>count
inline std::string serialize_frequency_table(const FrequencyTable& t) {
  std::ostringstream out;
  out << "#unigram\n";
  for (auto& [form, count] : ranked_unigrams(t)) out << form << '\t' << count << '\n';

  std::vector<std::pair<std::pair<std::string, std::string>, uint64_t>> bi(t.bigram.begin(),
                                                                           t.bigram.end());
  std::sort(bi.begin(), bi.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  out << "#bigram\n";
  for (auto& [pair, count] : bi) out << pair.first << '\t' << pair.second << '\t' << count << '\n';
  return out.str();
}

inline void save_frequency_table(const std::string& path, const FrequencyTable& t) {
  write_file(path, serialize_frequency_table(t));
}

inline FrequencyTable parse_frequency_table(const std::string& text) {
  FrequencyTable t;
  enum { none, uni, bi } section = none;
  size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "#unigram") {
      section = uni;
      continue;
    }
    if (line == "#bigram") {
      section = bi;
      continue;
    }
    auto cols = split(line, '\t');
    if (section == uni && cols.size() == 2) {
      uint64_t c = std::stoull(std::string(cols[1]));
      t.unigram[std::string(cols[0])] = c;
      t.total_tokens += c;
    } else if (section == bi && cols.size() == 3) {
      t.bigram[{std::string(cols[0]), std::string(cols[1])}] = std::stoull(std::string(cols[2]));
    } else {
      fail("frequency table line " + std::to_string(line_no) + ": unexpected format");
    }
  }
  if (t.unigram.empty()) fail("frequency table: no unigram section");
  return t;
}

inline FrequencyTable load_frequency_table(const std::string& path) {
  return parse_frequency_table(read_file(path));
}

}  // namespace clprobe::corpus
