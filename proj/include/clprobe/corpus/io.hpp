#pragma once

#include <string>
#include <vector>

#include <zlib.h>

#include "clprobe/common.hpp"
#include "clprobe/corpus/conllu.hpp"

namespace clprobe::corpus {

// Reads a whole file, transparently inflating gzip (magic 1f 8b). zlib's gz
// layer passes plain files through unchanged.
inline std::string read_text_auto(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) fail("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<size_t>(n));
  bool bad = n < 0;
  gzclose(f);
  if (bad) fail("error while reading " + path);
  return out;
}

inline ParseResult read_conllu_file(const std::string& path, bool strict = false) {
  std::string tag = path;
  auto slash = tag.find_last_of('/');
  if (slash != std::string::npos) tag = tag.substr(slash + 1);
  return parse_conllu_string(read_text_auto(path), tag, strict);
}

// Stable content hash of a corpus: forms, structure and annotations, but not
// comments (so cosmetic metadata lines don't change the fingerprint).
inline uint64_t corpus_fingerprint(const std::vector<Sentence>& corpus) {
  uint64_t h = kFnvOffset;
  for (auto& s : corpus) {
    for (auto& t : s.tokens) {
      h = fnv1a(t.form, h);
      h = fnv1a("\x1f", h);
      h = fnv1a(t.upos, h);
      h = fnv1a("\x1f", h);
      h = fnv1a(std::to_string(t.head), h);
      h = fnv1a("\x1f", h);
      h = fnv1a(t.deprel, h);
      h = fnv1a("\x1f", h);
      for (auto& [k, v] : t.feats) {
        h = fnv1a(k, h);
        h = fnv1a("=", h);
        h = fnv1a(v, h);
        h = fnv1a("|", h);
      }
      h = fnv1a("\x1e", h);
    }
    h = fnv1a("\x1d", h);
  }
  return h;
}

}  // namespace clprobe::corpus
