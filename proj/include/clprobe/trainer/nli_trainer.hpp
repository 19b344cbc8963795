#pragma once

#include <string>
#include <vector>

#include "clprobe/encoders/nli.hpp"
#include "clprobe/ndiff/adam.hpp"
#include "clprobe/trainer/data.hpp"

namespace clprobe::trainer {

using encoders::EmbeddingTable;
using encoders::NliModel;
using ndiff::Rng;
using ndiff::Tape;
using ndiff::Tensor;

struct EmbeddedNli {
  Tensor premise;
  Tensor hypothesis;
  size_t label;
};

inline std::vector<EmbeddedNli> embed_nli(const std::vector<NliExample>& data,
                                          const EmbeddingTable& table) {
  std::vector<EmbeddedNli> out;
  out.reserve(data.size());
  for (auto& ex : data)
    out.push_back({encoders::embed_sentence(ex.premise, table),
                   encoders::embed_sentence(ex.hypothesis, table),
                   encoders::nli_label_index(ex.label)});
  return out;
}

struct NliTrainConfig {
  size_t epochs = 20;
  size_t batch = 10;
  ndiff::AdamConfig adam;
  uint64_t seed = 1;
};

struct NliTrainResult {
  std::vector<double> train_loss;  // mean per epoch
  std::vector<double> valid_acc;   // per epoch
  size_t best_epoch = 0;           // 1-based
  double best_valid_acc = 0.0;
};

inline double nli_accuracy(NliModel& model, const std::vector<EmbeddedNli>& data) {
  if (data.empty()) fail("nli_accuracy: empty evaluation set");
  size_t hits = 0;
  for (auto& ex : data)
    if (model.predict(ex.premise, ex.hypothesis) == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Minimizes cross-entropy over shuffled mini-batches and keeps the parameters
// from the epoch with the best validation accuracy (first such epoch on ties).
inline NliTrainResult train_nli(NliModel& model, const std::vector<NliExample>& train,
                                const std::vector<NliExample>& valid, const EmbeddingTable& table,
                                const NliTrainConfig& cfg) {
  if (cfg.batch == 0) fail("train_nli: batch size must be positive");
  if (valid.empty()) fail("train_nli: empty validation set");
  size_t per_class[3] = {0, 0, 0};
  for (auto& ex : train) per_class[encoders::nli_label_index(ex.label)]++;
  for (size_t c = 0; c < 3; ++c)
    if (per_class[c] == 0)
      fail("train_nli: no training example with label " +
           std::string(encoders::kNliLabels[c]));

  auto tr = embed_nli(train, table);
  auto va = embed_nli(valid, table);

  Rng order(ndiff::derive_seed(cfg.seed, "nli-order"));
  Rng drop(ndiff::derive_seed(cfg.seed, "nli-dropout"));
  ndiff::Adam opt(cfg.adam);

  NliTrainResult res;
  std::vector<Tensor> best;
  std::vector<size_t> idx(tr.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order.shuffle(idx);
    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < idx.size(); start += cfg.batch) {
      size_t end = std::min(start + cfg.batch, idx.size());
      Tape tape;
      ndiff::Var total = tape.constant(Tensor::zeros({1}));
      for (size_t k = start; k < end; ++k) {
        auto& ex = tr[idx[k]];
        total = tape.add(total, model.loss(tape, ex.premise, ex.hypothesis, ex.label,
                                           /*train=*/true, drop));
      }
      ndiff::Var mean = tape.scale(total, 1.0 / static_cast<double>(end - start));
      double value = tape.value(mean).data[0];
      if (!std::isfinite(value))
        fail("train_nli: non-finite loss at epoch " + std::to_string(epoch) + " batch " +
             std::to_string(batches + 1));
      model.store().zero_grad();
      tape.backward(mean);
      opt.step(model.store());
      loss_sum += value;
      ++batches;
    }
    res.train_loss.push_back(loss_sum / static_cast<double>(batches));
    double acc = nli_accuracy(model, va);
    res.valid_acc.push_back(acc);
    if (best.empty() || acc > res.best_valid_acc) {
      res.best_valid_acc = acc;
      res.best_epoch = epoch;
      best = ndiff::snapshot_values(model.store());
    }
  }
  ndiff::restore_values(model.store(), best);
  return res;
}

}  // namespace clprobe::trainer
