#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/corpus/frequency.hpp"

namespace clprobe::taskgen {

struct SplitSizes {
  size_t train = 100000;
  size_t valid = 10000;
  size_t test = 10000;

  size_t total() const { return train + valid + test; }
  size_t of(int split) const { return split == 0 ? train : split == 1 ? valid : test; }
};

inline const std::vector<std::string> kDefaultTaskOrder = {
    // scarcest first: tasks with the tightest eligibility claim sentences early
    "wc", "treedepth", "somo", "coordinv", "subjnum", "objnum", "tense", "bishift", "sentlen"};

struct TaskConfig {
  // SentLen bins, inclusive token-count ranges; also the decorrelation bins
  // for TreeDepth.
  std::vector<std::pair<size_t, size_t>> sentlen_bins = {{5, 8},   {9, 12},  {13, 16},
                                                         {17, 20}, {21, 25}, {26, 28}};
  corpus::RankWindow wc_window{2000, 3000};
  size_t wc_n = 1000;
  std::vector<int> treedepth_classes = {3, 4, 5, 6, 7, 8};
  double somo_log_tolerance = 1.0;
  uint64_t somo_min_bigram_count = 2;
  SplitSizes sizes;
  uint64_t seed = 1;
  size_t max_sentence_len = 70;  // ingestion guard
  bool case_fold = false;
  std::vector<std::string> task_order = kDefaultTaskOrder;

  void validate() const {
    if (sentlen_bins.empty()) fail("config: sentlen_bins empty");
    size_t prev_hi = 0;
    bool first = true;
    for (auto& [lo, hi] : sentlen_bins) {
      if (lo > hi) fail("config: bin lo > hi");
      if (!first && lo <= prev_hi) fail("config: sentlen_bins must be disjoint and ascending");
      prev_hi = hi;
      first = false;
    }
    if (wc_window.lo >= wc_window.hi) fail("config: wc_window lo must be < hi");
    if (wc_n == 0 || wc_n > wc_window.hi - wc_window.lo)
      fail("config: wc_n must be in (0, window size]");
    if (treedepth_classes.empty()) fail("config: treedepth_classes empty");
    for (size_t i = 1; i < treedepth_classes.size(); ++i)
      if (treedepth_classes[i] <= treedepth_classes[i - 1])
        fail("config: treedepth_classes must be strictly ascending");
    if (treedepth_classes.front() < 0) fail("config: negative tree depth class");
    if (somo_log_tolerance < 0) fail("config: somo_log_tolerance must be >= 0");
    if (somo_min_bigram_count < 1) fail("config: somo_min_bigram_count must be >= 1");
    if (sizes.train == 0 || sizes.valid == 0 || sizes.test == 0) fail("config: zero split size");
    if (max_sentence_len == 0) fail("config: max_sentence_len must be positive");
    if (task_order.empty()) fail("config: task_order empty");
  }

  // Exact per-split balance requires divisibility by the class count; checked
  // per task because the class count is task-specific.
  void check_divisible(const std::string& task, size_t classes) const {
    if (classes == 0) fail(task + ": no classes configured");
    for (int sp = 0; sp < 3; ++sp)
      if (sizes.of(sp) % classes != 0)
        fail(task + ": split size " + std::to_string(sizes.of(sp)) +
             " not divisible by class count " + std::to_string(classes));
  }

  // bin index for a token count, or -1 when outside all bins
  int bin_of(size_t len) const {
    for (size_t i = 0; i < sentlen_bins.size(); ++i)
      if (len >= sentlen_bins[i].first && len <= sentlen_bins[i].second)
        return static_cast<int>(i);
    return -1;
  }
};

}  // namespace clprobe::taskgen
