#pragma once

#include <string>
#include <vector>

#include "clprobe/corpus/conllu.hpp"
#include "clprobe/ndiff/rng.hpp"

namespace testutil {

// Build a sentence from parallel arrays; unspecified annotations default to
// NOUN / dep so tree-shape tests stay short.
inline clprobe::corpus::Sentence make_sentence(
    const std::vector<std::string>& forms, const std::vector<int>& heads,
    const std::vector<std::string>& upos = {}, const std::vector<std::string>& deprels = {},
    const std::vector<std::map<std::string, std::string>>& feats = {},
    const std::string& source_id = "test:0") {
  using clprobe::corpus::Sentence;
  using clprobe::corpus::Token;
  Sentence s;
  s.source_id = source_id;
  for (size_t i = 0; i < forms.size(); ++i) {
    Token t;
    t.id = static_cast<int>(i + 1);
    t.form = forms[i];
    t.lemma = forms[i];
    t.upos = i < upos.size() ? upos[i] : "NOUN";
    t.head = heads[i];
    t.deprel = i < deprels.size() ? deprels[i] : (heads[i] == 0 ? "root" : "dep");
    if (i < feats.size()) t.feats = feats[i];
    s.tokens.push_back(std::move(t));
  }
  return s;
}

// Random tree over n tokens: token ids in surface order, each token after the
// first root-pick attaches to a uniformly random already-attached token.
inline clprobe::corpus::Sentence random_tree_sentence(clprobe::ndiff::Rng& rng, size_t n,
                                                      const std::string& source_id) {
  std::vector<int> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i + 1);
  rng.shuffle(order);
  std::vector<int> heads(n, 0);
  std::vector<int> attached{order[0]};
  for (size_t i = 1; i < n; ++i) {
    int parent = attached[rng.index(attached.size())];
    heads[order[i] - 1] = parent;
    attached.push_back(order[i]);
  }
  std::vector<std::string> forms(n);
  for (size_t i = 0; i < n; ++i) forms[i] = "w" + std::to_string(i);
  return make_sentence(forms, heads, {}, {}, {}, source_id);
}

}  // namespace testutil
