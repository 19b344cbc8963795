#pragma once

#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clprobe/common.hpp"

namespace clprobe::corpus {

// One syntactic word. Multiword range lines ("3-4") and empty nodes ("3.1")
// never reach this struct. Underscore columns become empty strings.
struct Token {
  int id = 0;  // 1-based surface position
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::map<std::string, std::string> feats;
  int head = 0;  // 0 = root
  std::string deprel;
  std::string deps;
  std::string misc;

  bool has_feat(const std::string& name) const { return feats.count(name) != 0; }
  const std::string* feat(const std::string& name) const {
    auto it = feats.find(name);
    return it == feats.end() ? nullptr : &it->second;
  }
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<std::string> comments;  // verbatim '#' lines, kept for reserialization
  std::string source_id;              // "file:index", stable across runs

  size_t size() const { return tokens.size(); }
  const Token& by_id(int id) const {
    if (id < 1 || static_cast<size_t>(id) > tokens.size() || tokens[id - 1].id != id)
      fail("Sentence: no token with id " + std::to_string(id) + " in " + source_id);
    return tokens[id - 1];
  }
  std::vector<std::string> forms() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (auto& t : tokens) out.push_back(t.form);
    return out;
  }
};

struct ParseResult {
  std::vector<Sentence> sentences;
  std::vector<std::string> errors;  // lenient mode: one message per skipped sentence
};

namespace detail {

inline std::string un(std::string_view field) {  // "_" -> empty
  return field == "_" ? std::string() : std::string(field);
}

inline std::map<std::string, std::string> parse_feats(std::string_view field, int line_no) {
  std::map<std::string, std::string> out;
  if (field == "_" || field.empty()) return out;
  for (std::string_view item : split(field, '|')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size())
      fail("line " + std::to_string(line_no) + ": bad feats item '" + std::string(item) + "'");
    out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
  }
  return out;
}

inline bool is_int(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

// Streaming CoNLL-U parser. Lenient mode records an error per malformed
// sentence and continues; strict mode throws on the first problem.
inline ParseResult parse_conllu(std::istream& in, const std::string& file_tag = "stream",
                                bool strict = false) {
  ParseResult result;
  std::string line;
  int line_no = 0;
  size_t sent_index = 0;

  Sentence cur;
  bool cur_bad = false;
  std::string cur_err;

  auto flush = [&]() {
    if (!cur.tokens.empty() || !cur.comments.empty() || cur_bad) {
      if (cur_bad) {
        if (strict) fail(cur_err);
        result.errors.push_back(cur_err);
      } else if (!cur.tokens.empty()) {
        cur.source_id = file_tag + ":" + std::to_string(sent_index);
        result.sentences.push_back(std::move(cur));
      }
      ++sent_index;
    }
    cur = Sentence{};
    cur_bad = false;
  };

  auto mark_bad = [&](const std::string& why) {
    if (!cur_bad) cur_err = file_tag + " line " + std::to_string(line_no) + ": " + why;
    cur_bad = true;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      cur.comments.push_back(line);
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      mark_bad("expected 10 columns, got " + std::to_string(cols.size()));
      continue;
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos)
      continue;  // multiword range / empty node
    if (!detail::is_int(id)) {
      mark_bad("non-integer token id '" + std::string(id) + "'");
      continue;
    }
    if (!detail::is_int(cols[6])) {
      mark_bad("non-integer head '" + std::string(cols[6]) + "'");
      continue;
    }
    Token t;
    t.id = std::stoi(std::string(id));
    t.form = detail::un(cols[1]);
    t.lemma = detail::un(cols[2]);
    t.upos = detail::un(cols[3]);
    t.xpos = detail::un(cols[4]);
    try {
      t.feats = detail::parse_feats(cols[5], line_no);
    } catch (const error& e) {
      mark_bad(e.what());
      continue;
    }
    t.head = std::stoi(std::string(cols[6]));
    t.deprel = detail::un(cols[7]);
    t.deps = detail::un(cols[8]);
    t.misc = detail::un(cols[9]);
    if (t.id < 1) {
      mark_bad("token id must be >= 1");
      continue;
    }
    if (t.head == t.id) {
      mark_bad("token " + std::to_string(t.id) + " is its own head");
      continue;
    }
    if (static_cast<int>(cur.tokens.size()) + 1 != t.id)
      mark_bad("token ids not consecutive at id " + std::to_string(t.id));
    cur.tokens.push_back(std::move(t));
  }
  flush();
  return result;
}

inline ParseResult parse_conllu_string(const std::string& text, const std::string& file_tag = "str",
                                       bool strict = false) {
  std::istringstream in(text);
  return parse_conllu(in, file_tag, strict);
}

namespace detail {
inline std::string orun(const std::string& s) { return s.empty() ? "_" : s; }
}

inline std::string serialize_token(const Token& t) {
  std::string feats;
  if (t.feats.empty()) {
    feats = "_";
  } else {
    bool first = true;
    for (auto& [k, v] : t.feats) {
      if (!first) feats += "|";
      feats += k + "=" + v;
      first = false;
    }
  }
  std::ostringstream out;
  out << t.id << '\t' << detail::orun(t.form) << '\t' << detail::orun(t.lemma) << '\t'
      << detail::orun(t.upos) << '\t' << detail::orun(t.xpos) << '\t' << feats << '\t' << t.head
      << '\t' << detail::orun(t.deprel) << '\t' << detail::orun(t.deps) << '\t'
      << detail::orun(t.misc);
  return out.str();
}

inline std::string serialize_conllu(const Sentence& s) {
  std::string out;
  for (auto& c : s.comments) out += c + "\n";
  for (auto& t : s.tokens) out += serialize_token(t) + "\n";
  out += "\n";
  return out;
}

inline std::string serialize_conllu(const std::vector<Sentence>& sents) {
  std::string out;
  for (auto& s : sents) out += serialize_conllu(s);
  return out;
}

}  // namespace clprobe::corpus
