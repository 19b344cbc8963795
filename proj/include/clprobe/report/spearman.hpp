#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "clprobe/common.hpp"

namespace clprobe::report {

// Average ranks, 1-based; tied values share the mean of their rank range.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<size_t> order(xs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size(), 0.0);
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) fail("pearson: length mismatch");
  if (xs.size() < 2) fail("pearson: need at least 2 points");
  double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double cov = 0, vx = 0, vy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) fail("pearson: constant input, correlation undefined");
  return cov / std::sqrt(vx * vy);
}

// Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) fail("spearman: length mismatch");
  if (xs.size() < 2) fail("spearman: need at least 2 points");
  return pearson(average_ranks(xs), average_ranks(ys));
}

// nullopt when either side has constant ranks (the undefined case).
inline std::optional<double> spearman_or_null(const std::vector<double>& xs,
                                              const std::vector<double>& ys) {
  if (xs.size() != ys.size()) fail("spearman: length mismatch");
  if (xs.size() < 2) fail("spearman: need at least 2 points");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;
  return spearman(xs, ys);
}

}  // namespace clprobe::report
