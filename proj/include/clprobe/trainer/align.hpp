#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clprobe/encoders/encoder.hpp"
#include "clprobe/ndiff/adam.hpp"
#include "clprobe/trainer/data.hpp"

namespace clprobe::trainer {

using encoders::EmbeddingTable;
using encoders::Encoder;
using ndiff::ParamStore;
using ndiff::Rng;
using ndiff::Tape;
using ndiff::Tensor;
using ndiff::Var;

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail("alignment_loss: vector length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// ||x-y|| - lambda * (||x_c-y|| + ||x-y_c||); distances stay unsquared unless
// the squared switch is on.
inline double alignment_loss(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& x_c, const std::vector<double>& y_c,
                             double lambda, bool squared = false) {
  auto d = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double v = euclid(a, b);
    return squared ? v * v : v;
  };
  return d(x, y) - lambda * (d(x_c, y) + d(x, y_c));
}

inline Var alignment_loss(Tape& tape, Var x, Var y, Var x_c, Var y_c, double lambda,
                          bool squared = false) {
  auto d = [&](Var a, Var b) {
    Var v = tape.euclidean_distance(a, b);
    return squared ? tape.mul(v, v) : v;
  };
  return tape.sub(d(x, y), tape.scale(tape.add(d(x_c, y), d(x, y_c)), lambda));
}

struct AlignConfig {
  double lambda = 0.25;
  size_t batch = 10;
  size_t patience = 2;
  double dev_fraction = 0.1;
  size_t max_epochs = 50;
  bool squared = false;
  ndiff::AdamConfig adam;

  void validate() const {
    if (lambda < 0) fail("AlignConfig: lambda must be >= 0");
    if (patience < 1) fail("AlignConfig: patience must be >= 1");
    if (batch < 1) fail("AlignConfig: batch must be >= 1");
    if (lambda > 0 && batch < 2)
      fail("AlignConfig: batch size < 2 leaves no contrastive sample with lambda > 0");
    if (dev_fraction <= 0 || dev_fraction >= 1) fail("AlignConfig: dev fraction must be in (0,1)");
    if (max_epochs < 1) fail("AlignConfig: max_epochs must be >= 1");
  }
};

struct MapStats {
  double initial_dev_loss = 0.0;
  double best_dev_loss = 0.0;
  size_t best_epoch = 0;  // 1-based
  size_t epochs_run = 0;
  std::vector<double> dev_loss;  // per epoch
};

inline Tensor encode_eval(const Encoder& enc, const Tensor& emb) {
  Tape tape;
  Rng dummy(0);
  return tape.value(enc.encode(tape, emb, /*train=*/false, dummy));
}

// Fits the target encoder so that its sentence vectors land on the frozen
// source encoder's vectors. The source side is encoded up front and enters
// every tape as a constant, so its parameters (and all embeddings) never
// receive gradients. Contrastive partners come from the same batch and are
// redrawn every step. Early stopping watches mean alignment loss on a held-out
// slice of the pairs with fixed contrastive partners.
inline MapStats train_mapping(const std::vector<ParallelPair>& pairs, const Encoder& source,
                              const Encoder& target, ParamStore& target_store,
                              const EmbeddingTable& source_table, const EmbeddingTable& target_table,
                              const AlignConfig& cfg, uint64_t seed) {
  cfg.validate();
  if (pairs.size() < 2) fail("train_mapping: need at least 2 parallel pairs");

  std::vector<Tensor> src_vec, tgt_emb;
  src_vec.reserve(pairs.size());
  tgt_emb.reserve(pairs.size());
  for (auto& p : pairs) {
    src_vec.push_back(encode_eval(source, encoders::embed_sentence(p.source, source_table)));
    tgt_emb.push_back(encoders::embed_sentence(p.target, target_table));
  }
  if (src_vec[0].size() != target.output_dim())
    fail("train_mapping: encoder output widths differ (" + std::to_string(src_vec[0].size()) +
         " vs " + std::to_string(target.output_dim()) + ")");

  std::vector<size_t> idx(pairs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng split_rng(ndiff::derive_seed(seed, "map-dev"));
  split_rng.shuffle(idx);
  size_t ndev = std::max<size_t>(1, static_cast<size_t>(
                                        std::llround(cfg.dev_fraction *
                                                     static_cast<double>(pairs.size()))));
  if (ndev >= pairs.size()) fail("train_mapping: dev fraction leaves no training pairs");
  if (cfg.lambda > 0 && ndev < 2)
    fail("train_mapping: dev slice too small for the contrastive term");
  std::vector<size_t> dev(idx.begin(), idx.begin() + ndev);
  std::vector<size_t> train(idx.begin() + ndev, idx.end());
  if (cfg.lambda > 0 && train.size() < 2)
    fail("train_mapping: training slice too small for the contrastive term");

  // fixed contrastive partners for the dev metric: neighbours in the shuffled order
  auto dev_loss = [&] {
    double sum = 0.0;
    std::vector<std::vector<double>> y(ndev);
    for (size_t i = 0; i < ndev; ++i) y[i] = encode_eval(target, tgt_emb[dev[i]]).data;
    for (size_t i = 0; i < ndev; ++i) {
      size_t j = (i + 1) % ndev;
      size_t k = (i + ndev - 1) % ndev;
      sum += alignment_loss(src_vec[dev[i]].data, y[i], src_vec[dev[j]].data, y[k], cfg.lambda,
                            cfg.squared);
    }
    return sum / static_cast<double>(ndev);
  };

  Rng order(ndiff::derive_seed(seed, "map-order"));
  Rng drop(ndiff::derive_seed(seed, "map-dropout"));
  Rng contrast(ndiff::derive_seed(seed, "map-contrast"));
  ndiff::Adam opt(cfg.adam);

  MapStats stats;
  stats.initial_dev_loss = dev_loss();
  double best = stats.initial_dev_loss;
  std::vector<Tensor> best_snap = ndiff::snapshot_values(target_store);
  size_t best_epoch = 0, since = 0;

  for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order.shuffle(train);
    for (size_t start = 0; start < train.size(); start += cfg.batch) {
      size_t end = std::min(start + cfg.batch, train.size());
      size_t m = end - start;
      if (m < 2 && cfg.lambda > 0) continue;  // tail too small for a contrast partner
      Tape tape;
      std::vector<Var> y(m);
      for (size_t i = 0; i < m; ++i)
        y[i] = target.encode(tape, tgt_emb[train[start + i]], /*train=*/true, drop);
      Var total = tape.constant(Tensor::zeros({1}));
      for (size_t i = 0; i < m; ++i) {
        Var x = tape.constant(src_vec[train[start + i]]);
        Var loss;
        if (cfg.lambda > 0) {
          auto other = [&] {
            size_t r = contrast.index(m - 1);
            return r < i ? r : r + 1;
          };
          Var x_c = tape.constant(src_vec[train[start + other()]]);
          Var y_c = y[other()];
          loss = alignment_loss(tape, x, y[i], x_c, y_c, cfg.lambda, cfg.squared);
        } else {
          Var d = tape.euclidean_distance(x, y[i]);
          loss = cfg.squared ? tape.mul(d, d) : d;
        }
        total = tape.add(total, loss);
      }
      Var mean = tape.scale(total, 1.0 / static_cast<double>(m));
      if (!std::isfinite(tape.value(mean).data[0]))
        fail("train_mapping: non-finite loss at epoch " + std::to_string(epoch));
      target_store.zero_grad();
      tape.backward(mean);
      opt.step(target_store);
    }
    double d = dev_loss();
    stats.dev_loss.push_back(d);
    stats.epochs_run = epoch;
    if (d < best) {
      best = d;
      best_epoch = epoch;
      best_snap = ndiff::snapshot_values(target_store);
      since = 0;
    } else if (++since >= cfg.patience) {
      break;
    }
  }
  ndiff::restore_values(target_store, best_snap);
  stats.best_dev_loss = best;
  stats.best_epoch = best_epoch;
  return stats;
}

}  // namespace clprobe::trainer
