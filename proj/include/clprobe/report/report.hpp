#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clprobe/report/matrix.hpp"
#include "clprobe/report/spearman.hpp"

namespace clprobe::report {

inline std::string format_fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string format_cell(const std::optional<double>& v, int decimals = 4) {
  return v ? format_fixed(*v, decimals) : "null";
}

struct TaskStats {
  std::string task;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Mean and population standard deviation over the full encoder x language
// grid of each task.
inline std::vector<TaskStats> task_stats(const ResultMatrix& m) {
  auto missing = m.missing_cells();
  if (!missing.empty()) fail("task_stats: missing cells: " + join(missing, ", "));
  if (m.encoders.empty() || m.languages.empty()) fail("task_stats: empty matrix");
  std::vector<TaskStats> out;
  for (auto& t : m.tasks) {
    std::vector<double> cells;
    for (auto& e : m.encoders)
      for (auto& l : m.languages) cells.push_back(m.get(t, e, l));
    // canonical accumulation order -> permutation invariance holds bitwise
    std::sort(cells.begin(), cells.end());
    double n = static_cast<double>(cells.size());
    double mu = 0;
    for (double c : cells) mu += c;
    mu /= n;
    double var = 0;
    for (double c : cells) var += (c - mu) * (c - mu);
    out.push_back({t, mu, std::sqrt(var / n)});
  }
  return out;
}

inline std::string stats_csv(const std::vector<TaskStats>& stats) {
  std::string out = "task,mean,stddev\n";
  for (auto& s : stats)
    out += s.task + "," + format_fixed(s.mean) + "," + format_fixed(s.stddev) + "\n";
  return out;
}

struct RelativeMatrix {
  std::string reference;
  std::vector<std::string> tasks, encoders, languages;
  // [task][encoder][language] in the declared orders; nullopt = undefined
  std::map<std::string, std::optional<double>> cells;

  static std::string key(const std::string& t, const std::string& e, const std::string& l) {
    return t + "\t" + e + "\t" + l;
  }
  const std::optional<double>& get(const std::string& t, const std::string& e,
                                   const std::string& l) const {
    auto it = cells.find(key(t, e, l));
    if (it == cells.end()) fail("RelativeMatrix: missing cell " + t + "/" + e + "/" + l);
    return it->second;
  }
};

// accuracy(language) / accuracy(reference) per (task, encoder); a zero
// reference leaves the cell undefined rather than infinite.
inline RelativeMatrix relative_matrix(const ResultMatrix& m, const std::string& reference) {
  if (std::find(m.languages.begin(), m.languages.end(), reference) == m.languages.end())
    fail("relative_matrix: reference language '" + reference + "' not in the matrix");
  auto missing = m.missing_cells();
  if (!missing.empty()) fail("relative_matrix: missing cells: " + join(missing, ", "));
  RelativeMatrix out;
  out.reference = reference;
  out.tasks = m.tasks;
  out.encoders = m.encoders;
  out.languages = m.languages;
  for (auto& t : m.tasks)
    for (auto& e : m.encoders) {
      double ref = m.get(t, e, reference);
      for (auto& l : m.languages) {
        std::optional<double> cell;
        if (ref != 0.0) cell = m.get(t, e, l) / ref;
        out.cells[RelativeMatrix::key(t, e, l)] = cell;
      }
    }
  return out;
}

inline std::string relative_csv(const RelativeMatrix& rel) {
  std::string out = "task,encoder";
  for (auto& l : rel.languages) out += "," + l;
  out += "\n";
  for (auto& t : rel.tasks)
    for (auto& e : rel.encoders) {
      out += t + "," + e;
      for (auto& l : rel.languages) out += "," + format_cell(rel.get(t, e, l));
      out += "\n";
    }
  return out;
}

struct CorrelationRow {
  std::string task;
  std::string language;
  std::optional<double> rho;  // nullopt = undefined (constant ranks)
  size_t n = 0;
};

// Spearman between per-encoder probing accuracies and per-encoder transfer
// accuracies, one row per (task, language). Every encoder cell must be
// present on both sides; n records the number of points behind each value.
inline std::vector<CorrelationRow> correlation_report(const ResultMatrix& m) {
  if (!m.has_any_xnli()) fail("correlation_report: no transfer accuracies loaded");
  auto missing = m.missing_cells();
  if (!missing.empty()) fail("correlation_report: missing cells: " + join(missing, ", "));
  if (m.encoders.size() < 2) fail("correlation_report: need at least 2 encoders");
  std::vector<CorrelationRow> out;
  for (auto& t : m.tasks)
    for (auto& l : m.languages) {
      std::vector<double> probing, transfer;
      for (auto& e : m.encoders) {
        probing.push_back(m.get(t, e, l));
        transfer.push_back(m.get_xnli(e, l));  // errors when absent
      }
      out.push_back({t, l, spearman_or_null(probing, transfer), probing.size()});
    }
  return out;
}

inline std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string out = "task,language,spearman,n\n";
  for (auto& r : rows)
    out += r.task + "," + r.language + "," + format_cell(r.rho) + "," + std::to_string(r.n) + "\n";
  return out;
}

}  // namespace clprobe::report
