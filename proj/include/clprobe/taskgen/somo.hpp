#pragma once

#include <cmath>
#include <set>
#include <string>

#include "clprobe/corpus/frequency.hpp"
#include "clprobe/taskgen/config.hpp"

namespace clprobe::taskgen {

// All forms c != orig that could replace orig between prev and next: both
// replacement bigrams must exist with count >= somo_min_bigram_count and sit
// within somo_log_tolerance of the original bigrams' natural-log frequency.
// Violated preconditions yield the empty set (callers just skip the position).
inline std::set<std::string> somo_candidates(const std::string& prev, const std::string& orig,
                                             const std::string& next,
                                             const corpus::FrequencyTable& t,
                                             const TaskConfig& cfg) {
  const uint64_t min_count = cfg.somo_min_bigram_count;
  const double tol = cfg.somo_log_tolerance;
  uint64_t f_po = t.bi_count(prev, orig);
  uint64_t f_on = t.bi_count(orig, next);
  if (f_po < min_count || f_on < min_count) return {};
  const double l_po = std::log(static_cast<double>(f_po));
  const double l_on = std::log(static_cast<double>(f_on));

  std::set<std::string> out;
  // the (prev, *) block is contiguous in the ordered bigram map
  for (auto it = t.bigram.lower_bound({prev, std::string()});
       it != t.bigram.end() && it->first.first == prev; ++it) {
    const std::string& c = it->first.second;
    if (c == orig) continue;
    uint64_t f_pc = it->second;
    if (f_pc < min_count) continue;
    if (std::fabs(std::log(static_cast<double>(f_pc)) - l_po) > tol) continue;
    uint64_t f_cn = t.bi_count(c, next);
    if (f_cn < min_count) continue;
    if (std::fabs(std::log(static_cast<double>(f_cn)) - l_on) > tol) continue;
    out.insert(c);
  }
  return out;
}

}  // namespace clprobe::taskgen
