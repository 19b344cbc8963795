#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "clprobe/ndiff/adam.hpp"

namespace clprobe::ndiff {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t checked = 0;
};

struct GradCheckOptions {
  double step = 1e-4;      // central-difference half step
  double floor = 1e-2;     // denominator floor so tiny gradients don't explode the ratio
  size_t max_entries = 0;  // 0 = check every entry; otherwise sample this many
  uint64_t sample_seed = 17;
};

// Central finite differences against the reverse-mode gradient.
//
// `loss` must rebuild the loss from current parameter values on every call —
// any internal randomness (dropout masks, sampled pairs) has to be replayed
// identically, e.g. by reseeding, or the comparison is meaningless.
inline GradCheckResult grad_check(ParamStore& store,
                                  const std::function<double(bool with_grad)>& loss,
                                  GradCheckOptions opt = {}) {
  store.zero_grad();
  loss(true);  // populates Parameter::grad

  // Snapshot gradients before perturbation sweeps.
  std::vector<std::vector<double>> grads;
  for (Parameter* p : store.all()) grads.push_back(p->grad.data);

  // Enumerate (param, index) slots, optionally seeded-sampled for big models.
  std::vector<std::pair<size_t, size_t>> slots;
  {
    auto params = store.all();
    for (size_t pi = 0; pi < params.size(); ++pi)
      for (size_t i = 0; i < params[pi]->value.size(); ++i) slots.emplace_back(pi, i);
  }
  if (opt.max_entries > 0 && slots.size() > opt.max_entries) {
    Rng rng(opt.sample_seed);
    rng.shuffle(slots);
    slots.resize(opt.max_entries);
    // Keep per-parameter coverage: sampling is uniform over all entries.
  }

  GradCheckResult res;
  auto params = store.all();
  for (auto [pi, i] : slots) {
    Parameter* p = params[pi];
    double keep = p->value.data[i];
    p->value.data[i] = keep + opt.step;
    double up = loss(false);
    p->value.data[i] = keep - opt.step;
    double down = loss(false);
    p->value.data[i] = keep;
    double numeric = (up - down) / (2.0 * opt.step);
    double analytic = grads[pi][i];
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), opt.floor});
    double rel = std::fabs(analytic - numeric) / denom;
    ++res.checked;
    if (rel > res.max_rel_err) {
      res.max_rel_err = rel;
      res.worst_param = p->name;
      res.worst_index = i;
      res.analytic = analytic;
      res.numeric = numeric;
    }
  }
  return res;
}

}  // namespace clprobe::ndiff
