#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clprobe/encoders/embedding.hpp"
#include "clprobe/encoders/encoder.hpp"
#include "clprobe/ndiff/checkpoint.hpp"
#include "clprobe/probe/mlp.hpp"
#include "clprobe/taskgen/example.hpp"

namespace clprobe::probe {

using encoders::EmbeddingTable;
using encoders::Encoder;
using taskgen::ProbingExample;

inline uint64_t table_fingerprint(const EmbeddingTable& table) {
  std::map<std::string, const std::vector<double>*> sorted;
  for (auto& [w, v] : table.vecs) sorted[w] = &v;
  uint64_t h = fnv1a(std::to_string(table.dim));
  for (auto& [w, v] : sorted) {
    h = fnv1a(w, h);
    h = fnv1a_bytes(v->data(), v->size() * sizeof(double), h);
  }
  return h;
}

inline uint64_t encoder_fingerprint(const ndiff::ParamStore& store,
                                    const encoders::EncoderConfig& cfg) {
  return fnv1a(ndiff::serialize_checkpoint(ndiff::checkpoint_from_store(store, cfg.to_map())));
}

inline uint64_t dataset_fingerprint(const std::vector<ProbingExample>& examples) {
  return fnv1a(taskgen::serialize_dataset(examples));
}

// Plain text: header, count, width, then one %.17g row per sentence. The
// double round trip through 17 significant digits is exact, so cached and
// fresh vectors agree bitwise.
inline std::string serialize_vector_cache(const ndiff::Tensor& vectors) {
  if (vectors.shape.size() != 2) fail("vector cache: {n, d} tensor required");
  std::string out = "clprobe-veccache v1\n";
  out += std::to_string(vectors.shape[0]) + " " + std::to_string(vectors.shape[1]) + "\n";
  for (size_t i = 0; i < vectors.shape[0]; ++i) {
    for (size_t j = 0; j < vectors.shape[1]; ++j) {
      if (j) out += ' ';
      out += format_double(vectors.at(i, j));
    }
    out += '\n';
  }
  return out;
}

inline ndiff::Tensor parse_vector_cache(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  if (header != "clprobe-veccache v1") fail("vector cache: bad header");
  size_t n = 0, d = 0;
  in >> n >> d;
  if (!in || n == 0 || d == 0) fail("vector cache: bad dimensions");
  ndiff::Tensor out = ndiff::Tensor::zeros({n, d});
  for (size_t i = 0; i < n * d; ++i)
    if (!(in >> out.data[i])) fail("vector cache: truncated");
  double extra;
  if (in >> extra) fail("vector cache: trailing values");
  return out;
}

inline ndiff::Tensor encode_examples(const std::vector<ProbingExample>& examples,
                                     const Encoder& encoder, const EmbeddingTable& table) {
  if (examples.empty()) fail("encode_examples: empty dataset");
  ndiff::Tensor out = ndiff::Tensor::zeros({examples.size(), encoder.output_dim()});
  for (size_t i = 0; i < examples.size(); ++i) {
    ndiff::Tape tape;
    ndiff::Rng dummy(0);
    ndiff::Tensor v = tape.value(
        encoder.encode(tape, encoders::embed_sentence(examples[i].tokens, table), false, dummy));
    for (size_t j = 0; j < v.size(); ++j) out.at(i, j) = v.data[j];
  }
  return out;
}

// Returns cached vectors when an entry for this exact (dataset, encoder
// weights+config, embeddings) combination exists, otherwise encodes and
// stores. An empty cache_dir disables caching.
inline ndiff::Tensor cached_encode(const std::string& cache_dir,
                                   const std::vector<ProbingExample>& examples,
                                   const Encoder& encoder, const ndiff::ParamStore& store,
                                   const EmbeddingTable& table) {
  if (cache_dir.empty()) return encode_examples(examples, encoder, table);
  uint64_t key = dataset_fingerprint(examples);
  key = fnv1a(std::to_string(encoder_fingerprint(store, encoder.config())), key);
  key = fnv1a(std::to_string(table_fingerprint(table)), key);
  std::filesystem::create_directories(cache_dir);
  std::string path = cache_dir + "/vec-" + to_hex(key) + ".txt";
  if (std::filesystem::exists(path)) {
    ndiff::Tensor cached = parse_vector_cache(read_file(path));
    if (cached.shape != std::vector<size_t>{examples.size(), encoder.output_dim()})
      fail("vector cache: " + path + " has shape " + cached.shape_str() +
           ", expected {" + std::to_string(examples.size()) + "," +
           std::to_string(encoder.output_dim()) + "}");
    return cached;
  }
  ndiff::Tensor fresh = encode_examples(examples, encoder, table);
  write_file(path, serialize_vector_cache(fresh));
  return fresh;
}

struct ProbeResult {
  std::string task;
  std::string encoder_kind;
  std::string language;
  std::vector<std::string> label_set;
  size_t n_train = 0, n_valid = 0, n_test = 0;
  double best_valid_acc = 0.0;
  size_t best_epoch = 0;
  double test_acc = 0.0;
  double majority = 0.0;  // most-frequent-train-label share of the test split
  std::vector<std::vector<size_t>> confusion;  // test split, [true][predicted]
};

inline std::string probe_result_json(const ProbeResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = "clprobe-probe-result v1";
  j["task"] = r.task;
  j["encoder"] = r.encoder_kind;
  j["language"] = r.language;
  j["labels"] = r.label_set;
  j["n_train"] = r.n_train;
  j["n_valid"] = r.n_valid;
  j["n_test"] = r.n_test;
  j["best_valid_acc"] = r.best_valid_acc;
  j["best_epoch"] = r.best_epoch;
  j["test_acc"] = r.test_acc;
  j["majority_baseline"] = r.majority;
  j["confusion"] = r.confusion;
  return j.dump();
}

struct ProbeRun {
  ProbeModel model;
  ProbeResult result;
};

// Splits a generated dataset, encodes every sentence once (through the cache
// when enabled), trains the probe, and reports test accuracy against the
// majority baseline. The encoder is only ever run in eval mode.
inline ProbeRun run_probe(const std::vector<ProbingExample>& examples, const Encoder& encoder,
                          const ndiff::ParamStore& encoder_store, const EmbeddingTable& table,
                          const ProbeConfig& cfg, const std::string& cache_dir,
                          const std::string& language) {
  ndiff::Tensor all = cached_encode(cache_dir, examples, encoder, encoder_store, table);

  std::vector<size_t> rows[3];
  for (size_t i = 0; i < examples.size(); ++i)
    rows[static_cast<int>(examples[i].split)].push_back(i);
  auto slice = [&](const std::vector<size_t>& ids) {
    ProbeData d;
    d.x = ndiff::Tensor::zeros({ids.size(), all.shape[1]});
    for (size_t i = 0; i < ids.size(); ++i) {
      for (size_t j = 0; j < all.shape[1]; ++j) d.x.at(i, j) = all.at(ids[i], j);
      d.labels.push_back(examples[ids[i]].label);
    }
    return d;
  };
  ProbeData tr = slice(rows[0]), va = slice(rows[1]), te = slice(rows[2]);

  auto label_set = training_label_set(tr);
  ProbeRun run{ProbeModel(all.shape[1], label_set.size(), cfg.hidden,
                          ndiff::derive_seed(cfg.seed, "probe-init")),
               {}};
  auto train_res = train_probe(run.model, tr, va, label_set, cfg);
  auto ev = evaluate_probe(run.model, te, label_set, "test");

  ProbeResult& r = run.result;
  r.task = examples[0].task;
  r.encoder_kind = encoder.config().kind;
  r.language = language;
  r.label_set = label_set;
  r.n_train = tr.size();
  r.n_valid = va.size();
  r.n_test = te.size();
  r.best_valid_acc = train_res.best_valid_acc;
  r.best_epoch = train_res.best_epoch;
  r.test_acc = ev.accuracy;
  r.majority = majority_baseline(tr, te, label_set);
  r.confusion = ev.confusion;
  return run;
}

}  // namespace clprobe::probe
