#pragma once

#include <set>
#include <string>
#include <vector>

#include "clprobe/common.hpp"

namespace clprobe::taskgen {

enum class Split { train = 0, valid = 1, test = 2 };

inline const char* split_code(Split s) {
  switch (s) {
    case Split::train: return "tr";
    case Split::valid: return "va";
    case Split::test: return "te";
  }
  fail("split_code: bad split");
}

inline Split split_from_code(std::string_view code) {
  if (code == "tr") return Split::train;
  if (code == "va") return Split::valid;
  if (code == "te") return Split::test;
  fail("split_from_code: unknown code '" + std::string(code) + "'");
}

struct ProbingExample {
  std::string task;
  Split split = Split::train;
  std::string label;
  std::vector<std::string> tokens;
  std::string source_id;

  // Transformation record, kept in memory so tests can re-apply or re-validate
  // the operation; not part of the serialized dataset.
  //   bishift:  op_a = 0-based index of the left swapped token
  //   coordinv: op_a/op_b/op_c = first-conjunct, fixed-block, second-conjunct lengths
  //   somo:     op_a = replaced position, op_form = the original form
  int op_a = -1, op_b = -1, op_c = -1;
  std::string op_form;
};

// One example per line: split-code TAB label TAB space-joined tokens.
inline std::string dataset_line(const ProbingExample& e) {
  for (auto& t : e.tokens) {
    if (t.empty()) fail("dataset_line: empty token in " + e.source_id);
    if (t.find('\t') != std::string::npos || t.find('\n') != std::string::npos ||
        t.find(' ') != std::string::npos)
      fail("dataset_line: token with whitespace in " + e.source_id);
  }
  if (e.label.empty() || e.label.find('\t') != std::string::npos)
    fail("dataset_line: bad label in " + e.source_id);
  return std::string(split_code(e.split)) + "\t" + e.label + "\t" + join(e.tokens, " ");
}

// Lines grouped by split (tr, va, te); within a split the caller's order is
// preserved, so output is deterministic.
inline std::string serialize_dataset(const std::vector<ProbingExample>& examples) {
  std::string out;
  for (Split sp : {Split::train, Split::valid, Split::test})
    for (auto& e : examples)
      if (e.split == sp) out += dataset_line(e) + "\n";
  return out;
}

inline void write_dataset(const std::string& path, const std::vector<ProbingExample>& examples) {
  write_file(path, serialize_dataset(examples));
}

inline std::vector<ProbingExample> parse_dataset(const std::string& text,
                                                 const std::string& task = "") {
  std::vector<ProbingExample> out;
  size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) fail("dataset line " + std::to_string(line_no) + ": expected 3 columns");
    ProbingExample e;
    e.task = task;
    e.split = split_from_code(cols[0]);
    e.label = std::string(cols[1]);
    for (auto& t : split_ws(cols[2])) e.tokens.push_back(t);
    if (e.tokens.empty()) fail("dataset line " + std::to_string(line_no) + ": no tokens");
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ProbingExample> read_dataset(const std::string& path,
                                                const std::string& task = "") {
  return parse_dataset(read_file(path), task);
}

// Tracks which sentences any task has claimed; enforces cross-task
// disjointness of source sentences.
struct ExtractionRegistry {
  std::set<std::string> used;

  bool contains(const std::string& source_id) const { return used.count(source_id) != 0; }
  void claim(const std::string& source_id) {
    if (!used.insert(source_id).second) fail("registry: double claim of " + source_id);
  }
};

}  // namespace clprobe::taskgen
