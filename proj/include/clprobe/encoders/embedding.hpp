#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/ndiff/tensor.hpp"

namespace clprobe::encoders {

// Frozen word vectors. Lookup is total: exact match, then lowercase fallback,
// then the zero vector.
struct EmbeddingTable {
  size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vecs;

  const std::vector<double>* find(const std::string& word) const {
    auto it = vecs.find(word);
    if (it != vecs.end()) return &it->second;
    std::string lower = ascii_lower(word);
    if (lower != word) {
      it = vecs.find(lower);
      if (it != vecs.end()) return &it->second;
    }
    return nullptr;
  }

  void insert(const std::string& word, std::vector<double> v) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
      fail("embedding for '" + word + "' has dimension " + std::to_string(v.size()) +
           ", table is " + std::to_string(dim));
    vecs[word] = std::move(v);
  }
};

// Text format: one `word v1 ... vd` line per word; an optional leading
// `count dim` header line is tolerated (two integer fields).
inline EmbeddingTable parse_embeddings(const std::string& text) {
  EmbeddingTable table;
  bool first = true;
  size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (first && fields.size() == 2) {
      bool numeric = true;
      for (auto& f : fields)
        for (char c : f)
          if (c < '0' || c > '9') numeric = false;
      first = false;
      if (numeric) continue;  // header
    }
    first = false;
    if (fields.size() < 2) fail("embedding line " + std::to_string(line_no) + ": too few fields");
    std::vector<double> v;
    v.reserve(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); ++i) {
      try {
        v.push_back(std::stod(fields[i]));
      } catch (...) {
        fail("embedding line " + std::to_string(line_no) + ": bad number '" + fields[i] + "'");
      }
    }
    table.insert(fields[0], std::move(v));
  }
  if (table.vecs.empty()) fail("embedding file contains no vectors");
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  return parse_embeddings(read_file(path));
}

// time x dim matrix, one row per word
inline ndiff::Tensor embed_sentence(const std::vector<std::string>& words,
                                    const EmbeddingTable& table) {
  if (words.empty()) fail("embed_sentence: empty word list");
  if (table.dim == 0) fail("embed_sentence: empty embedding table");
  ndiff::Tensor m = ndiff::Tensor::zeros({words.size(), table.dim});
  for (size_t t = 0; t < words.size(); ++t)
    if (const std::vector<double>* v = table.find(words[t]))
      for (size_t d = 0; d < table.dim; ++d) m.at(t, d) = (*v)[d];
  return m;
}

// Writes the `count dim` header and one word-sorted line per vector; 17
// significant digits, so a load/save cycle is lossless.
inline std::string serialize_embeddings(const EmbeddingTable& table) {
  if (table.vecs.empty()) fail("serialize_embeddings: empty table");
  std::vector<const std::string*> words;
  words.reserve(table.vecs.size());
  for (auto& [w, v] : table.vecs) words.push_back(&w);
  std::sort(words.begin(), words.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  std::string out =
      std::to_string(table.vecs.size()) + " " + std::to_string(table.dim) + "\n";
  for (const std::string* w : words) {
    out += *w;
    for (double x : table.vecs.at(*w)) out += " " + format_double(x);
    out += "\n";
  }
  return out;
}

inline void save_embeddings(const std::string& path, const EmbeddingTable& table) {
  write_file(path, serialize_embeddings(table));
}

// deterministic random table for toy experiments
inline EmbeddingTable random_embeddings(const std::vector<std::string>& vocab, size_t dim,
                                        ndiff::Rng& rng, double scale = 1.0) {
  EmbeddingTable table;
  table.dim = dim;
  for (auto& w : vocab) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform(-scale, scale);
    table.insert(w, std::move(v));
  }
  return table;
}

}  // namespace clprobe::encoders
