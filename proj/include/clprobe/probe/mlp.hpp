#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clprobe/ndiff/adam.hpp"
#include "clprobe/ndiff/tape.hpp"

namespace clprobe::probe {

using ndiff::ParamStore;
using ndiff::Rng;
using ndiff::Tape;
using ndiff::Tensor;
using ndiff::Var;

// One sigmoid hidden layer, softmax output.
class ProbeModel {
 public:
  ProbeModel(size_t in_dim, size_t classes, size_t hidden, uint64_t init_seed)
      : in_(in_dim), k_(classes), hidden_(hidden) {
    if (hidden_ < 1) fail("ProbeModel: hidden width must be >= 1");
    if (k_ < 2) fail("ProbeModel: need at least 2 classes");
    if (in_ < 1) fail("ProbeModel: empty input");
    Rng rng(init_seed);
    double k1 = 1.0 / std::sqrt(static_cast<double>(in_));
    double k2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    store_.create("probe.W1", Tensor::uniform({in_, hidden_}, -k1, k1, rng));
    store_.create("probe.b1", Tensor::zeros({1, hidden_}));
    store_.create("probe.W2", Tensor::uniform({hidden_, k_}, -k2, k2, rng));
    store_.create("probe.b2", Tensor::zeros({1, k_}));
  }

  size_t input_dim() const { return in_; }
  size_t classes() const { return k_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  Var logits(Tape& tape, const Tensor& s) {
    if (s.shape != std::vector<size_t>{in_})
      fail("ProbeModel: input width " + s.shape_str() + " does not match {" +
           std::to_string(in_) + "}");
    Var row = tape.reshape(tape.constant(s), {1, in_});
    Var h = tape.sigmoid(tape.add(tape.matmul(row, tape.parameter(store_.get("probe.W1"))),
                                  tape.parameter(store_.get("probe.b1"))));
    Var z = tape.add(tape.matmul(h, tape.parameter(store_.get("probe.W2"))),
                     tape.parameter(store_.get("probe.b2")));
    return tape.reshape(z, {k_});
  }

  Tensor probabilities(const Tensor& s) {
    Tape tape;
    return ndiff::softmax(tape.value(logits(tape, s)));
  }

  size_t predict(const Tensor& s) {
    Tensor p = probabilities(s);
    size_t best = 0;
    for (size_t i = 1; i < p.size(); ++i)
      if (p.data[i] > p.data[best]) best = i;
    return best;
  }

 private:
  size_t in_, k_, hidden_;
  ParamStore store_;
};

struct ProbeConfig {
  size_t hidden = 150;
  size_t epochs = 30;
  size_t batch = 10;
  ndiff::AdamConfig adam;  // lr 1e-3
  uint64_t seed = 1;
};

// Feature rows with string labels, one split.
struct ProbeData {
  Tensor x;  // {n, d}
  std::vector<std::string> labels;

  size_t size() const { return labels.size(); }
  Tensor row(size_t i) const {
    Tensor out = Tensor::zeros({x.shape[1]});
    for (size_t j = 0; j < x.shape[1]; ++j) out.data[j] = x.at(i, j);
    return out;
  }
};

struct ProbeEvaluation {
  double accuracy = 0.0;
  std::vector<std::vector<size_t>> confusion;  // [true][predicted]
};

// Sorted distinct labels of the training split; evaluation splits must not
// introduce new ones.
inline std::vector<std::string> training_label_set(const ProbeData& train) {
  std::set<std::string> s(train.labels.begin(), train.labels.end());
  return {s.begin(), s.end()};
}

inline size_t label_index(const std::vector<std::string>& label_set, const std::string& label,
                          const std::string& split) {
  auto it = std::lower_bound(label_set.begin(), label_set.end(), label);
  if (it == label_set.end() || *it != label)
    fail("probe: label '" + label + "' in the " + split + " split is absent from training");
  return static_cast<size_t>(it - label_set.begin());
}

inline ProbeEvaluation evaluate_probe(ProbeModel& model, const ProbeData& data,
                                      const std::vector<std::string>& label_set,
                                      const std::string& split_name) {
  if (data.size() == 0) fail("probe: empty " + split_name + " split");
  ProbeEvaluation ev;
  ev.confusion.assign(label_set.size(), std::vector<size_t>(label_set.size(), 0));
  size_t hits = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    size_t truth = label_index(label_set, data.labels[i], split_name);
    size_t pred = model.predict(data.row(i));
    ev.confusion[truth][pred]++;
    if (pred == truth) ++hits;
  }
  ev.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  return ev;
}

// Share of `data` carrying the most frequent training label (ties broken by
// label order).
inline double majority_baseline(const ProbeData& train, const ProbeData& data,
                                const std::vector<std::string>& label_set) {
  std::map<std::string, size_t> counts;
  for (auto& l : train.labels) counts[l]++;
  std::string top;
  size_t top_n = 0;
  for (auto& l : label_set) {
    if (counts[l] > top_n) {
      top_n = counts[l];
      top = l;
    }
  }
  size_t hits = 0;
  for (auto& l : data.labels)
    if (l == top) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

struct ProbeTrainResult {
  std::vector<double> train_loss;  // mean per epoch
  std::vector<double> valid_acc;   // per epoch
  size_t best_epoch = 0;           // 1-based
  double best_valid_acc = 0.0;
};

// Adam + cross-entropy over shuffled mini-batches; keeps the epoch with the
// best validation accuracy. No hyperparameter search happens here.
inline ProbeTrainResult train_probe(ProbeModel& model, const ProbeData& train,
                                    const ProbeData& valid,
                                    const std::vector<std::string>& label_set,
                                    const ProbeConfig& cfg) {
  if (cfg.batch == 0) fail("train_probe: batch size must be positive");
  if (train.size() == 0 || valid.size() == 0) fail("train_probe: empty split");
  if (label_set.size() != model.classes()) fail("train_probe: label set does not match model");

  std::vector<size_t> ytr(train.size()), yva(valid.size());
  for (size_t i = 0; i < train.size(); ++i) ytr[i] = label_index(label_set, train.labels[i], "train");
  for (size_t i = 0; i < valid.size(); ++i) yva[i] = label_index(label_set, valid.labels[i], "valid");

  Rng order(ndiff::derive_seed(cfg.seed, "probe-order"));
  ndiff::Adam opt(cfg.adam);
  ProbeTrainResult res;
  std::vector<Tensor> best;
  std::vector<size_t> idx(train.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order.shuffle(idx);
    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < idx.size(); start += cfg.batch) {
      size_t end = std::min(start + cfg.batch, idx.size());
      Tape tape;
      Var total = tape.constant(Tensor::zeros({1}));
      for (size_t i = start; i < end; ++i)
        total = tape.add(total, tape.softmax_cross_entropy(
                                    model.logits(tape, train.row(idx[i])), ytr[idx[i]]));
      Var mean = tape.scale(total, 1.0 / static_cast<double>(end - start));
      double value = tape.value(mean).data[0];
      if (!std::isfinite(value))
        fail("train_probe: non-finite loss at epoch " + std::to_string(epoch));
      model.store().zero_grad();
      tape.backward(mean);
      opt.step(model.store());
      loss_sum += value;
      ++batches;
    }
    res.train_loss.push_back(loss_sum / static_cast<double>(batches));

    size_t hits = 0;
    for (size_t i = 0; i < valid.size(); ++i)
      if (model.predict(valid.row(i)) == yva[i]) ++hits;
    double acc = static_cast<double>(hits) / static_cast<double>(valid.size());
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

}  // namespace clprobe::probe
