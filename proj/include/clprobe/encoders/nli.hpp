#pragma once

#include <string>
#include <vector>

#include "clprobe/encoders/embedding.hpp"
#include "clprobe/encoders/encoder.hpp"

namespace clprobe::encoders {

inline const std::vector<std::string> kNliLabels = {"entailment", "neutral", "contradiction"};

inline size_t nli_label_index(const std::string& label) {
  for (size_t i = 0; i < kNliLabels.size(); ++i)
    if (kNliLabels[i] == label) return i;
  fail("unknown NLI label '" + label + "'");
}

// [u, v, u*v, |u - v|]
inline Var combine_features(Tape& tape, Var u, Var v) {
  const Tensor &tu = tape.value(u), &tv = tape.value(v);
  if (!tu.same_shape(tv))
    fail("combine_features: length mismatch " + tu.shape_str() + " vs " + tv.shape_str());
  return tape.concat({u, v, tape.mul(u, v), tape.abs(tape.sub(u, v))}, 0);
}

// Shared sentence encoder + the 3-way classifier head. Training uses the
// fused softmax cross-entropy; probabilities() applies a standalone softmax.
class NliModel {
 public:
  NliModel(const EncoderConfig& cfg, uint64_t init_seed) : init_rng_(init_seed) {
    encoder_ = std::make_unique<Encoder>(cfg, store_, init_rng_, "enc");
    size_t f = 4 * cfg.output_dim();
    double k = 1.0 / std::sqrt(static_cast<double>(f));
    store_.create("head.W", Tensor::uniform({f, 3}, -k, k, init_rng_));
    store_.create("head.b", Tensor::zeros({1, 3}));
  }

  const Encoder& encoder() const { return *encoder_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  Var logits(Tape& tape, const Tensor& premise_emb, const Tensor& hypothesis_emb, bool train,
             Rng& rng) {
    Var u = encoder_->encode(tape, premise_emb, train, rng);
    Var v = encoder_->encode(tape, hypothesis_emb, train, rng);
    Var feats = combine_features(tape, u, v);
    size_t f = tape.value(feats).size();
    Var row = tape.reshape(feats, {1, f});
    Var out = tape.add(tape.matmul(row, tape.parameter(store_.get("head.W"))),
                       tape.parameter(store_.get("head.b")));
    return tape.reshape(out, {3});
  }

  Var loss(Tape& tape, const Tensor& premise_emb, const Tensor& hypothesis_emb, size_t label,
           bool train, Rng& rng) {
    return tape.softmax_cross_entropy(logits(tape, premise_emb, hypothesis_emb, train, rng),
                                      label);
  }

  Tensor probabilities(const Tensor& premise_emb, const Tensor& hypothesis_emb) {
    Tape tape;
    Rng dummy(0);  // eval mode draws nothing
    return ndiff::softmax(tape.value(logits(tape, premise_emb, hypothesis_emb, false, dummy)));
  }

  size_t predict(const Tensor& premise_emb, const Tensor& hypothesis_emb) {
    Tensor p = probabilities(premise_emb, hypothesis_emb);
    size_t best = 0;
    for (size_t i = 1; i < p.size(); ++i)
      if (p.data[i] > p.data[best]) best = i;
    return best;
  }

 private:
  ParamStore store_;
  Rng init_rng_;
  std::unique_ptr<Encoder> encoder_;
};

}  // namespace clprobe::encoders
