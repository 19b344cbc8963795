#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clprobe/corpus/conllu.hpp"

namespace clprobe::corpus {

// Checks the tree invariants: single root, heads reference existing ids,
// acyclic. Returns a reason string when violated, nullopt when fine.
inline std::optional<std::string> tree_violation(const Sentence& s) {
  const size_t n = s.tokens.size();
  if (n == 0) return "empty sentence";
  size_t roots = 0;
  for (auto& t : s.tokens) {
    if (t.head == 0)
      ++roots;
    else if (t.head < 1 || static_cast<size_t>(t.head) > n)
      return "head " + std::to_string(t.head) + " out of range";
  }
  if (roots != 1) return std::to_string(roots) + " roots";
  // climb from every token; a cycle would exceed n hops before reaching root
  for (auto& t : s.tokens) {
    int cur = t.id;
    size_t hops = 0;
    while (cur != 0) {
      cur = s.tokens[cur - 1].head;
      if (++hops > n) return "cycle through token " + std::to_string(t.id);
    }
  }
  return std::nullopt;
}

inline bool is_tree(const Sentence& s) { return !tree_violation(s).has_value(); }

inline int root_id(const Sentence& s) {
  for (auto& t : s.tokens)
    if (t.head == 0) return t.id;
  fail("root_id: no root in " + s.source_id);
}

// ids of the direct dependents of `id` (0 = dependents of the virtual root).
inline std::vector<int> children_of(const Sentence& s, int id) {
  std::vector<int> out;
  for (auto& t : s.tokens)
    if (t.head == id) out.push_back(t.id);
  return out;
}

inline std::vector<int> children_with_deprel(const Sentence& s, int id, const std::string& rel) {
  std::vector<int> out;
  for (auto& t : s.tokens)
    if (t.head == id && t.deprel == rel) out.push_back(t.id);
  return out;
}

// Maximum number of head-edges from the root to any token; 0 for a
// root-only sentence.
inline int tree_depth(const Sentence& s) {
  if (auto why = tree_violation(s)) fail("tree_depth: " + *why + " in " + s.source_id);
  int best = 0;
  for (auto& t : s.tokens) {
    int depth = 0, cur = t.id;
    while (s.tokens[cur - 1].head != 0) {
      cur = s.tokens[cur - 1].head;
      ++depth;
    }
    best = std::max(best, depth);
  }
  return best;
}

struct Span {
  std::set<int> ids;
  bool contiguous = false;
  int lo = 0, hi = 0;  // inclusive surface bounds (valid when ids non-empty)
};

// id plus all transitive dependents, with surface-contiguity report.
inline Span subtree_span(const Sentence& s, int id) {
  s.by_id(id);  // precondition: id exists
  Span span;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    if (!span.ids.insert(cur).second) continue;
    for (int c : children_of(s, cur)) stack.push_back(c);
  }
  span.lo = *span.ids.begin();
  span.hi = *span.ids.rbegin();
  span.contiguous = span.ids.size() == static_cast<size_t>(span.hi - span.lo + 1);
  return span;
}

}  // namespace clprobe::corpus
