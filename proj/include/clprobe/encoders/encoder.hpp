#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "clprobe/ndiff/adam.hpp"
#include "clprobe/ndiff/tape.hpp"

namespace clprobe::encoders {

using ndiff::Parameter;
using ndiff::ParamStore;
using ndiff::Rng;
using ndiff::Tape;
using ndiff::Tensor;
using ndiff::Var;

inline const std::vector<std::string> kEncoderKinds = {"rnn_max",  "rnn_last", "attn_max",
                                                       "attn_last", "cnn_max",  "cnn_avg"};

struct EncoderConfig {
  std::string kind = "rnn_max";
  size_t emb_dim = 300;
  size_t hidden = 512;  // per direction
  size_t layers = 2;
  double dropout = 0.10;  // between recurrent layers only
  std::vector<size_t> cnn_widths = {3, 4, 5};
  std::vector<size_t> cnn_paddings = {1, 2, 2};
  size_t cnn_channels = 800;  // per filter width
  size_t cnn_projection = 1024;
  size_t attn_mlp = 150;
  size_t attn_heads = 60;

  bool is_rnn() const { return kind == "rnn_max" || kind == "rnn_last"; }
  bool is_attn() const { return kind == "attn_max" || kind == "attn_last"; }
  bool is_cnn() const { return kind == "cnn_max" || kind == "cnn_avg"; }

  void validate() const {
    bool known = false;
    for (auto& k : kEncoderKinds) known |= (k == kind);
    if (!known) fail("encoder: unknown kind '" + kind + "'");
    if (emb_dim == 0) fail("encoder: emb_dim must be positive");
    if (dropout < 0.0 || dropout >= 1.0) fail("encoder: dropout must be in [0,1)");
    if (is_cnn()) {
      if (cnn_widths.empty() || cnn_widths.size() != cnn_paddings.size())
        fail("encoder: cnn widths/paddings mismatch");
      if (cnn_channels == 0 || cnn_projection == 0) fail("encoder: zero cnn dims");
      for (size_t i = 0; i < cnn_widths.size(); ++i)
        if (cnn_widths[i] == 0 || cnn_widths[i] > 1 + 2 * cnn_paddings[i])
          fail("encoder: width " + std::to_string(cnn_widths[i]) +
               " cannot cover one-token input with padding " + std::to_string(cnn_paddings[i]));
    } else {
      if (hidden == 0 || layers == 0) fail("encoder: zero recurrent dims");
      if (is_attn() && (attn_mlp == 0 || attn_heads == 0)) fail("encoder: zero attention dims");
    }
  }

  size_t output_dim() const { return is_cnn() ? cnn_projection : 2 * hidden; }

  std::map<std::string, std::string> to_map() const {
    auto join_sizes = [](const std::vector<size_t>& v) {
      std::string s;
      for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
      return s;
    };
    return {{"kind", kind},
            {"emb_dim", std::to_string(emb_dim)},
            {"hidden", std::to_string(hidden)},
            {"layers", std::to_string(layers)},
            {"dropout", format_double(dropout)},
            {"cnn_widths", join_sizes(cnn_widths)},
            {"cnn_paddings", join_sizes(cnn_paddings)},
            {"cnn_channels", std::to_string(cnn_channels)},
            {"cnn_projection", std::to_string(cnn_projection)},
            {"attn_mlp", std::to_string(attn_mlp)},
            {"attn_heads", std::to_string(attn_heads)}};
  }

  static EncoderConfig from_map(const std::map<std::string, std::string>& m) {
    EncoderConfig c;
    auto get = [&](const char* key) -> const std::string& {
      auto it = m.find(key);
      if (it == m.end()) fail(std::string("encoder config: missing key ") + key);
      return it->second;
    };
    auto parse_sizes = [](const std::string& s) {
      std::vector<size_t> v;
      for (auto part : split(s, ',')) v.push_back(std::stoull(std::string(part)));
      return v;
    };
    c.kind = get("kind");
    c.emb_dim = std::stoull(get("emb_dim"));
    c.hidden = std::stoull(get("hidden"));
    c.layers = std::stoull(get("layers"));
    c.dropout = std::stod(get("dropout"));
    c.cnn_widths = parse_sizes(get("cnn_widths"));
    c.cnn_paddings = parse_sizes(get("cnn_paddings"));
    c.cnn_channels = std::stoull(get("cnn_channels"));
    c.cnn_projection = std::stoull(get("cnn_projection"));
    c.attn_mlp = std::stoull(get("attn_mlp"));
    c.attn_heads = std::stoull(get("attn_heads"));
    c.validate();
    return c;
  }

  // Small profile for tests and gradient checks; same wiring, tiny dims.
  static EncoderConfig toy(const std::string& kind) {
    EncoderConfig c;
    c.kind = kind;
    c.emb_dim = 16;
    c.hidden = 32;
    c.layers = 2;
    c.dropout = 0.10;
    c.cnn_channels = 8;
    c.cnn_projection = 16;
    c.attn_mlp = 8;
    c.attn_heads = 4;
    return c;
  }
};

// The six sentence encoders over frozen embeddings. Parameters are created in
// the passed store at construction; encode() replays them onto a tape.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, ParamStore& store, Rng& rng, std::string prefix = "enc")
      : cfg_(cfg), store_(&store), prefix_(std::move(prefix)) {
    cfg_.validate();
    if (cfg_.is_cnn()) {
      for (size_t i = 0; i < cfg_.cnn_widths.size(); ++i) {
        size_t w = cfg_.cnn_widths[i];
        double k = 1.0 / std::sqrt(static_cast<double>(w * cfg_.emb_dim));
        create(cnn_name(w, "K"), Tensor::uniform({w * cfg_.emb_dim, cfg_.cnn_channels}, -k, k, rng));
        create(cnn_name(w, "b"), Tensor::zeros({1, cfg_.cnn_channels}));
      }
      size_t concat_dim = cfg_.cnn_widths.size() * cfg_.cnn_channels;
      double k = 1.0 / std::sqrt(static_cast<double>(concat_dim));
      create(prefix_ + ".proj.W", Tensor::uniform({concat_dim, cfg_.cnn_projection}, -k, k, rng));
      create(prefix_ + ".proj.b", Tensor::zeros({1, cfg_.cnn_projection}));
      return;
    }
    for (size_t layer = 0; layer < cfg_.layers; ++layer) {
      size_t in_dim = layer == 0 ? cfg_.emb_dim : 2 * cfg_.hidden;
      for (const char* dir : {"fw", "bw"}) {
        double k = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
        create(rnn_name(layer, dir, "Wx"), Tensor::uniform({in_dim, 4 * cfg_.hidden}, -k, k, rng));
        create(rnn_name(layer, dir, "Wh"),
               Tensor::uniform({cfg_.hidden, 4 * cfg_.hidden}, -k, k, rng));
        Tensor b = Tensor::zeros({1, 4 * cfg_.hidden});
        for (size_t j = cfg_.hidden; j < 2 * cfg_.hidden; ++j) b.data[j] = 1.0;  // forget bias
        create(rnn_name(layer, dir, "b"), std::move(b));
      }
    }
    if (cfg_.is_attn()) {
      double k1 = 1.0 / std::sqrt(static_cast<double>(2 * cfg_.hidden));
      double k2 = 1.0 / std::sqrt(static_cast<double>(cfg_.attn_mlp));
      create(prefix_ + ".attn.W1", Tensor::uniform({2 * cfg_.hidden, cfg_.attn_mlp}, -k1, k1, rng));
      create(prefix_ + ".attn.W2", Tensor::uniform({cfg_.attn_mlp, cfg_.attn_heads}, -k2, k2, rng));
    }
  }

  const EncoderConfig& config() const { return cfg_; }
  size_t output_dim() const { return cfg_.output_dim(); }

  // emb: time x emb_dim matrix of frozen embeddings. Returns a Var of shape
  // {output_dim}. Dropout masks are drawn from `rng` in train mode.
  Var encode(Tape& tape, const Tensor& emb, bool train, Rng& rng) const {
    if (emb.rank() != 2 || emb.shape[0] == 0 || emb.shape[1] != cfg_.emb_dim)
      fail("encode: expected time x " + std::to_string(cfg_.emb_dim) + " matrix, got " +
           emb.shape_str());
    if (cfg_.is_cnn()) return encode_cnn(tape, emb);
    return encode_recurrent(tape, emb, train, rng);
  }

 private:
  EncoderConfig cfg_;
  ParamStore* store_;
  std::string prefix_;

  void create(const std::string& name, Tensor init) { store_->create(name, std::move(init)); }
  std::string rnn_name(size_t layer, const std::string& dir, const std::string& part) const {
    return prefix_ + ".l" + std::to_string(layer) + "." + dir + "." + part;
  }
  std::string cnn_name(size_t width, const std::string& part) const {
    return prefix_ + ".cnn.w" + std::to_string(width) + "." + part;
  }
  Var param(Tape& tape, const std::string& name) const {
    return tape.parameter(store_->get(name));
  }

  // One LSTM direction over the layer input (T x in_dim). Returns per-surface-
  // position hidden states, each {1, hidden}; reverse=true scans right-to-left
  // but still reports states by surface index.
  std::vector<Var> lstm_direction(Tape& tape, Var input, size_t T, size_t layer,
                                  const std::string& dir, bool reverse) const {
    const size_t H = cfg_.hidden;
    Var Wx = param(tape, rnn_name(layer, dir, "Wx"));
    Var Wh = param(tape, rnn_name(layer, dir, "Wh"));
    Var b = param(tape, rnn_name(layer, dir, "b"));
    Var h = tape.constant(Tensor::zeros({1, H}));
    Var c = tape.constant(Tensor::zeros({1, H}));
    std::vector<Var> states(T);
    for (size_t step = 0; step < T; ++step) {
      size_t t = reverse ? T - 1 - step : step;
      Var x = tape.rows(input, {t});
      Var z = tape.add(tape.add(tape.matmul(x, Wx), tape.matmul(h, Wh)), b);
      Var zr = tape.reshape(z, {4, H});  // gate blocks: i, f, g, o
      Var zi = tape.reshape(tape.rows(zr, {0}), {1, H});
      Var zf = tape.reshape(tape.rows(zr, {1}), {1, H});
      Var zg = tape.reshape(tape.rows(zr, {2}), {1, H});
      Var zo = tape.reshape(tape.rows(zr, {3}), {1, H});
      Var i = tape.sigmoid(zi);
      Var f = tape.sigmoid(zf);
      Var g = tape.tanh(zg);
      Var o = tape.sigmoid(zo);
      c = tape.add(tape.mul(f, c), tape.mul(i, g));
      h = tape.mul(o, tape.tanh(c));
      states[t] = h;
    }
    return states;
  }

  struct BiStates {
    std::vector<Var> fw, bw;  // surface-indexed, each {1, hidden}
    Var matrix;               // T x 2*hidden
  };

  BiStates bilstm(Tape& tape, const Tensor& emb, bool train, Rng& rng) const {
    const size_t T = emb.shape[0];
    Var input = tape.constant(emb);
    BiStates top;
    for (size_t layer = 0; layer < cfg_.layers; ++layer) {
      if (layer > 0 && cfg_.dropout > 0.0)
        input = tape.dropout(input, cfg_.dropout, train, rng);
      top.fw = lstm_direction(tape, input, T, layer, "fw", false);
      top.bw = lstm_direction(tape, input, T, layer, "bw", true);
      std::vector<Var> rows;
      rows.reserve(T);
      for (size_t t = 0; t < T; ++t) rows.push_back(tape.concat({top.fw[t], top.bw[t]}, 1));
      input = tape.concat(rows, 0);
    }
    top.matrix = input;
    return top;
  }

  Var encode_recurrent(Tape& tape, const Tensor& emb, bool train, Rng& rng) const {
    const size_t T = emb.shape[0];
    BiStates states = bilstm(tape, emb, train, rng);
    if (cfg_.kind == "rnn_max") return tape.max_over_time(states.matrix);
    if (cfg_.kind == "rnn_last") {
      // final state of each direction: forward at the last surface position,
      // backward at the first
      Var last = tape.concat({states.fw[T - 1], states.bw[0]}, 1);
      return tape.reshape(last, {2 * cfg_.hidden});
    }
    // structured self-attention: per-head score distributions over time,
    // averaged into one weight per token, states reweighted then pooled
    Var A = tape.tanh(tape.matmul(states.matrix, param(tape, prefix_ + ".attn.W1")));
    Var S = tape.matmul(A, param(tape, prefix_ + ".attn.W2"));  // T x heads
    Var P = tape.softmax_time(S);
    Var mean = tape.matmul(
        P, tape.constant(Tensor::full({cfg_.attn_heads, 1}, 1.0 / double(cfg_.attn_heads))));
    Var weights = tape.reshape(mean, {T});
    Var weighted = tape.row_scale(states.matrix, weights);
    if (cfg_.kind == "attn_max") return tape.max_over_time(weighted);
    return tape.reshape(tape.rows(weighted, {T - 1}), {2 * cfg_.hidden});  // attn_last
  }

  // im2col window matrix for one filter width: rows are padded windows of the
  // frozen embedding matrix, so it enters the tape as a constant.
  static Tensor im2col(const Tensor& emb, size_t width, size_t padding) {
    const size_t T = emb.shape[0], D = emb.shape[1];
    const size_t out_len = T + 2 * padding + 1 - width;
    Tensor win = Tensor::zeros({out_len, width * D});
    for (size_t o = 0; o < out_len; ++o)
      for (size_t w = 0; w < width; ++w) {
        // position in the padded sequence, shifted back into real indices
        long src = static_cast<long>(o + w) - static_cast<long>(padding);
        if (src < 0 || src >= static_cast<long>(T)) continue;  // zero padding
        for (size_t d = 0; d < D; ++d) win.at(o, w * D + d) = emb.at(static_cast<size_t>(src), d);
      }
    return win;
  }

  Var encode_cnn(Tape& tape, const Tensor& emb) const {
    std::vector<Var> pooled;
    for (size_t i = 0; i < cfg_.cnn_widths.size(); ++i) {
      size_t w = cfg_.cnn_widths[i];
      Var win = tape.constant(im2col(emb, w, cfg_.cnn_paddings[i]));
      Var conv = tape.matmul(win, param(tape, cnn_name(w, "K")));  // out_len x channels
      size_t out_len = tape.value(conv).shape[0];
      std::vector<Var> brows(out_len, param(tape, cnn_name(w, "b")));
      Var act = tape.tanh(tape.add(conv, tape.concat(brows, 0)));
      pooled.push_back(cfg_.kind == "cnn_max" ? tape.max_over_time(act)
                                              : tape.mean_over_time(act));
    }
    Var cat = tape.reshape(tape.concat(pooled, 0), {1, cfg_.cnn_widths.size() * cfg_.cnn_channels});
    Var proj = tape.add(tape.matmul(cat, param(tape, prefix_ + ".proj.W")),
                        param(tape, prefix_ + ".proj.b"));
    return tape.reshape(proj, {cfg_.cnn_projection});
  }
};

}  // namespace clprobe::encoders
