#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clprobe/common.hpp"

namespace clprobe::report {

inline const std::vector<std::string> kReportTasks = {
    "bishift", "coordinv", "objnum", "somo", "tense", "sentlen", "subjnum", "wc", "treedepth"};
inline const std::vector<std::string> kReportEncoders = {"attn_max", "attn_last", "rnn_max",
                                                         "rnn_last", "cnn_max",  "cnn_avg"};

// Accuracy values addressed by (task, encoder, language), plus an optional
// per-(encoder, language) NLI transfer column. Index sets are explicit; a
// report over an incomplete grid is an error, not a silent skip.
class ResultMatrix {
 public:
  std::vector<std::string> tasks;
  std::vector<std::string> encoders;
  std::vector<std::string> languages;

  void set(const std::string& task, const std::string& encoder, const std::string& language,
           double accuracy) {
    if (accuracy < 0.0 || accuracy > 1.0)
      fail("ResultMatrix: accuracy " + format_double(accuracy) + " outside [0,1] for " + task +
           "/" + encoder + "/" + language);
    note(tasks, task);
    note(encoders, encoder);
    note(languages, language);
    cells_[key(task, encoder, language)] = accuracy;
  }

  void set_xnli(const std::string& encoder, const std::string& language, double accuracy) {
    if (accuracy < 0.0 || accuracy > 1.0)
      fail("ResultMatrix: transfer accuracy outside [0,1] for " + encoder + "/" + language);
    xnli_[encoder + "\t" + language] = accuracy;
  }

  bool has(const std::string& task, const std::string& encoder,
           const std::string& language) const {
    return cells_.count(key(task, encoder, language)) != 0;
  }

  double get(const std::string& task, const std::string& encoder,
             const std::string& language) const {
    auto it = cells_.find(key(task, encoder, language));
    if (it == cells_.end())
      fail("ResultMatrix: missing cell " + task + "/" + encoder + "/" + language);
    return it->second;
  }

  bool has_xnli(const std::string& encoder, const std::string& language) const {
    return xnli_.count(encoder + "\t" + language) != 0;
  }

  double get_xnli(const std::string& encoder, const std::string& language) const {
    auto it = xnli_.find(encoder + "\t" + language);
    if (it == xnli_.end()) fail("ResultMatrix: missing transfer cell " + encoder + "/" + language);
    return it->second;
  }

  bool has_any_xnli() const { return !xnli_.empty(); }

  // every (task, encoder, language) combination present
  std::vector<std::string> missing_cells() const {
    std::vector<std::string> out;
    for (auto& t : tasks)
      for (auto& e : encoders)
        for (auto& l : languages)
          if (!has(t, e, l)) out.push_back(t + "/" + e + "/" + l);
    return out;
  }

 private:
  static std::string key(const std::string& t, const std::string& e, const std::string& l) {
    return t + "\t" + e + "\t" + l;
  }
  static void note(std::vector<std::string>& set, const std::string& v) {
    if (std::find(set.begin(), set.end(), v) == set.end()) set.push_back(v);
  }

  std::map<std::string, double> cells_;
  std::map<std::string, double> xnli_;
};

// task<TAB>encoder<TAB>language<TAB>accuracy with a header row
inline void load_results_tsv(ResultMatrix& m, const std::string& text) {
  auto lines = split(text, '\n');
  if (lines.empty() || split(lines[0], '\t').size() != 4)
    fail("results tsv: expected header task/encoder/language/accuracy");
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 4) fail("results tsv line " + std::to_string(i + 1) + ": need 4 columns");
    try {
      m.set(cols[0], cols[1], cols[2], std::stod(cols[3]));
    } catch (const std::invalid_argument&) {
      fail("results tsv line " + std::to_string(i + 1) + ": bad accuracy '" + cols[3] + "'");
    }
  }
}

// encoder<TAB>language<TAB>accuracy with a header row
inline void load_xnli_tsv(ResultMatrix& m, const std::string& text) {
  auto lines = split(text, '\n');
  if (lines.empty() || split(lines[0], '\t').size() != 3)
    fail("transfer tsv: expected header encoder/language/accuracy");
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 3) fail("transfer tsv line " + std::to_string(i + 1) + ": need 3 columns");
    try {
      m.set_xnli(cols[0], cols[1], std::stod(cols[2]));
    } catch (const std::invalid_argument&) {
      fail("transfer tsv line " + std::to_string(i + 1) + ": bad accuracy '" + cols[2] + "'");
    }
  }
}

// One probe-result JSON object per line (see probe module schema).
inline void load_probe_results(ResultMatrix& m, const std::string& text) {
  size_t lineno = 0;
  for (auto& line : split(text, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail("probe results line " + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("schema", "") != "clprobe-probe-result v1")
      fail("probe results line " + std::to_string(lineno) + ": unknown schema");
    m.set(j.at("task").get<std::string>(), j.at("encoder").get<std::string>(),
          j.at("language").get<std::string>(), j.at("test_acc").get<double>());
  }
}

}  // namespace clprobe::report
