#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "clprobe/ndiff/tape.hpp"

namespace clprobe::ndiff {

// Owns named parameters; iteration order is insertion order so that update
// sweeps and checkpoints are reproducible.
class ParamStore {
 public:
  Parameter& create(const std::string& name, Tensor init) {
    if (index_.count(name)) fail("ParamStore: duplicate parameter " + name);
    params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  Parameter& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) fail("ParamStore: unknown parameter " + name);
    return *params_[it->second];
  }

  const Parameter& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail("ParamStore: unknown parameter " + name);
    return *params_[it->second];
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::vector<const Parameter*> all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  size_t total_size() const {
    size_t n = 0;
    for (auto& p : params_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, size_t> index_;
};

// Value-only copies for best-checkpoint bookkeeping during training.
inline std::vector<Tensor> snapshot_values(const ParamStore& store) {
  std::vector<Tensor> out;
  for (const Parameter* p : store.all()) out.push_back(p->value);
  return out;
}

inline void restore_values(ParamStore& store, const std::vector<Tensor>& snap) {
  auto params = store.all();
  if (params.size() != snap.size()) fail("restore_values: parameter count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(snap[i]))
      fail("restore_values: shape mismatch for " + params[i]->name);
    params[i]->value = snap[i];
  }
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. One slot pair (m, v) per parameter, step count shared
// across the whole store.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update from the accumulated gradients, then leaves the
  // gradients untouched (callers zero them at the start of the next step).
  void step(ParamStore& store) {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Parameter* p : store.all()) {
      Slot& s = slot(p->name, p->value.size());
      for (size_t i = 0; i < p->value.size(); ++i) {
        double g = p->grad.data[i];
        if (!std::isfinite(g)) fail("Adam: non-finite gradient in " + p->name);
        s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g;
        s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g * g;
        double mhat = s.m[i] / bc1;
        double vhat = s.v[i] / bc2;
        p->value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };

  Slot& slot(const std::string& name, size_t n) {
    auto it = slots_.find(name);
    if (it == slots_.end()) {
      Slot s;
      s.m.assign(n, 0.0);
      s.v.assign(n, 0.0);
      it = slots_.emplace(name, std::move(s)).first;
    }
    if (it->second.m.size() != n) fail("Adam: parameter " + name + " changed size");
    return it->second;
  }

  AdamConfig cfg_;
  size_t t_ = 0;
  std::map<std::string, Slot> slots_;
};

}  // namespace clprobe::ndiff
