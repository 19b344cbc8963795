#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "clprobe/probe/mlp.hpp"
#include "clprobe/probe/runner.hpp"

using namespace clprobe;
using namespace clprobe::probe;
using namespace clprobe::ndiff;
using Catch::Approx;

TEST_CASE("probe forward produces proper distributions") {
  ProbeModel m(4, 3, 8, 5);
  Rng rng(1);
  Tensor s = Tensor::uniform({4}, -1, 1, rng);
  Tensor p = m.probabilities(s);
  double sum = 0;
  for (double v : p.data) sum += v;
  REQUIRE(std::fabs(sum - 1.0) < 1e-9);

  for (Parameter* prm : m.store().all()) std::fill(prm->value.data.begin(), prm->value.data.end(), 0.0);
  Tensor u = m.probabilities(s);
  for (double v : u.data) REQUIRE(v == Approx(1.0 / 3));

  ProbeModel two(4, 2, 1, 5);
  Tensor p2 = two.probabilities(s);
  REQUIRE(p2.size() == 2);
  REQUIRE(p2.data[0] + p2.data[1] == Approx(1.0));

  REQUIRE_THROWS_AS(m.probabilities(Tensor::zeros({5})), error);
  REQUIRE_THROWS_AS(ProbeModel(4, 1, 8, 5), error);
  REQUIRE_THROWS_AS(ProbeModel(4, 3, 0, 5), error);
}

TEST_CASE("shared logit shift leaves the distribution unchanged") {
  ProbeModel m(3, 4, 6, 9);
  Rng rng(2);
  Tensor s = Tensor::uniform({3}, -2, 2, rng);
  Tensor before = m.probabilities(s);
  for (auto& v : m.store().get("probe.b2").value.data) v += 5.0;  // same shift on every logit
  Tensor after = m.probabilities(s);
  for (size_t i = 0; i < 4; ++i) REQUIRE(after.data[i] == Approx(before.data[i]));
}

// two clouds separated along the first coordinate, margin 1
static ProbeData separable(size_t n, uint64_t seed) {
  Rng rng(seed);
  ProbeData d;
  d.x = Tensor::zeros({n, 4});
  for (size_t i = 0; i < n; ++i) {
    bool pos = rng.coin();
    d.x.at(i, 0) = pos ? 1.0 + rng.uniform(0, 1) : -1.0 - rng.uniform(0, 1);
    for (size_t j = 1; j < 4; ++j) d.x.at(i, j) = rng.uniform(-1, 1);
    d.labels.push_back(pos ? "yes" : "no");
  }
  return d;
}

TEST_CASE("probe learns linearly separable data essentially perfectly") {
  ProbeData tr = separable(200, 3), va = separable(60, 4), te = separable(60, 5);
  auto labels = training_label_set(tr);
  REQUIRE(labels == std::vector<std::string>{"no", "yes"});
  ProbeModel m(4, 2, 150, 7);
  ProbeConfig cfg;
  auto res = train_probe(m, tr, va, labels, cfg);
  auto ev = evaluate_probe(m, te, labels, "test");
  REQUIRE(ev.accuracy >= 0.99);
  // accuracy is the diagonal share of the confusion matrix
  size_t diag = ev.confusion[0][0] + ev.confusion[1][1];
  size_t total = 0;
  for (auto& row : ev.confusion)
    for (size_t c : row) total += c;
  REQUIRE(total == te.size());
  REQUIRE(ev.accuracy == Approx(static_cast<double>(diag) / static_cast<double>(total)));
  // confusion rows sum to per-class totals
  size_t no_count = 0;
  for (auto& l : te.labels)
    if (l == "no") ++no_count;
  REQUIRE(ev.confusion[0][0] + ev.confusion[0][1] == no_count);
  REQUIRE(res.best_valid_acc >= 0.99);
}

TEST_CASE("label-shuffled data scores at the majority baseline") {
  ProbeData tr = separable(300, 13), va = separable(100, 14), te = separable(400, 15);
  Rng shuf(99);
  shuf.shuffle(tr.labels);
  shuf.shuffle(va.labels);
  shuf.shuffle(te.labels);
  auto labels = training_label_set(tr);
  ProbeModel m(4, 2, 150, 7);
  ProbeConfig cfg;
  train_probe(m, tr, va, labels, cfg);
  auto ev = evaluate_probe(m, te, labels, "test");
  double base = majority_baseline(tr, te, labels);
  REQUIRE(std::fabs(ev.accuracy - base) <= 0.03);
}

TEST_CASE("labels outside the training split are rejected") {
  ProbeData tr = separable(40, 21), va = separable(20, 22);
  va.labels[3] = "other";
  auto labels = training_label_set(tr);
  ProbeModel m(4, 2, 10, 7);
  ProbeConfig cfg;
  cfg.epochs = 1;
  REQUIRE_THROWS_WITH(train_probe(m, tr, va, labels, cfg),
                      Catch::Matchers::ContainsSubstring("absent from training"));
}

TEST_CASE("constant predictor scores the majority share") {
  ProbeData te = separable(100, 31);
  auto labels = std::vector<std::string>{"no", "yes"};
  ProbeModel m(4, 2, 5, 7);
  for (Parameter* p : m.store().all()) std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
  m.store().get("probe.b2").value.at(0, 0) = 10.0;  // always predict "no"
  auto ev = evaluate_probe(m, te, labels, "test");
  size_t no_count = 0;
  for (auto& l : te.labels)
    if (l == "no") ++no_count;
  REQUIRE(ev.accuracy == Approx(static_cast<double>(no_count) / 100.0));
  ProbeData tr;
  tr.x = Tensor::zeros({4, 4});
  tr.labels = {"no", "no", "no", "yes"};
  REQUIRE(majority_baseline(tr, te, labels) == Approx(static_cast<double>(no_count) / 100.0));
}

TEST_CASE("majority baseline breaks ties by label order") {
  ProbeData tr;
  tr.x = Tensor::zeros({4, 2});
  tr.labels = {"b", "a", "b", "a"};  // tie: "a" wins by order
  ProbeData te;
  te.x = Tensor::zeros({3, 2});
  te.labels = {"a", "b", "b"};
  REQUIRE(majority_baseline(tr, te, {"a", "b"}) == Approx(1.0 / 3));
}

TEST_CASE("vector cache round trips bitwise") {
  Rng rng(41);
  Tensor v = Tensor::uniform({7, 5}, -3, 3, rng);
  v.at(0, 0) = 1.0 / 3.0;
  v.at(1, 1) = 1e-300;
  Tensor back = parse_vector_cache(serialize_vector_cache(v));
  REQUIRE(back.shape == v.shape);
  REQUIRE(back.data == v.data);

  REQUIRE_THROWS_AS(parse_vector_cache("nope\n1 1\n0\n"), error);
  REQUIRE_THROWS_AS(parse_vector_cache("clprobe-veccache v1\n2 2\n0 0 0\n"), error);
  REQUIRE_THROWS_AS(parse_vector_cache("clprobe-veccache v1\n1 1\n0 0\n"), error);
}

static std::vector<taskgen::ProbingExample> word_presence_dataset(size_t per_split_pos,
                                                                  uint64_t seed) {
  // label = does the sentence contain the word "x"
  Rng rng(seed);
  std::vector<std::string> vocab;
  for (char c = 'a'; c <= 'w'; ++c) vocab.push_back(std::string(1, c));
  std::vector<taskgen::ProbingExample> out;
  auto add = [&](taskgen::Split sp, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      for (bool pos : {true, false}) {
        taskgen::ProbingExample ex;
        ex.task = "wordpresence";
        ex.split = sp;
        ex.label = pos ? "I" : "O";
        size_t len = 3 + rng.index(4);
        for (size_t t = 0; t < len; ++t) ex.tokens.push_back(vocab[rng.index(vocab.size())]);
        if (pos) ex.tokens[rng.index(ex.tokens.size())] = "x";
        ex.source_id = "synthetic:" + std::to_string(out.size());
        out.push_back(std::move(ex));
      }
    }
  };
  add(taskgen::Split::train, per_split_pos);
  add(taskgen::Split::valid, per_split_pos / 3);
  add(taskgen::Split::test, per_split_pos / 3);
  return out;
}

TEST_CASE("probing a frozen encoder end to end, with and without the cache") {
  auto examples = word_presence_dataset(45, 51);
  std::vector<std::string> vocab = {"x"};
  for (char c = 'a'; c <= 'w'; ++c) vocab.push_back(std::string(1, c));
  Rng erng(6);
  auto table = encoders::random_embeddings(vocab, 16, erng);
  ParamStore store;
  Rng init(61);
  encoders::Encoder enc(encoders::EncoderConfig::toy("rnn_max"), store, init, "enc");

  auto frozen = snapshot_values(store);
  ProbeConfig cfg;
  cfg.epochs = 20;
  std::string cache_dir = "probe_cache_test";
  std::filesystem::remove_all(cache_dir);

  auto fresh = run_probe(examples, enc, store, table, cfg, "", "xx");
  auto cached1 = run_probe(examples, enc, store, table, cfg, cache_dir, "xx");
  auto cached2 = run_probe(examples, enc, store, table, cfg, cache_dir, "xx");  // cache hit

  REQUIRE(fresh.result.test_acc == cached1.result.test_acc);
  REQUIRE(cached1.result.test_acc == cached2.result.test_acc);
  REQUIRE(cached1.result.confusion == fresh.result.confusion);
  size_t cache_files = 0;
  for (auto& e : std::filesystem::directory_iterator(cache_dir)) {
    ++cache_files;
    REQUIRE(e.path().filename().string().starts_with("vec-"));
  }
  REQUIRE(cache_files == 1);

  // the probe clearly beats majority on a task its encoder can represent
  REQUIRE(fresh.result.test_acc >= fresh.result.majority + 0.10);
  REQUIRE(fresh.result.task == "wordpresence");
  REQUIRE(fresh.result.encoder_kind == "rnn_max");
  REQUIRE(fresh.result.label_set == std::vector<std::string>{"I", "O"});

  // frozen contract: encoder parameters bitwise unchanged
  auto after = snapshot_values(store);
  for (size_t i = 0; i < frozen.size(); ++i) REQUIRE(frozen[i].data == after[i].data);

  // different weights must miss the cache
  store.get("enc.l0.fw.Wx").value.data[0] += 1.0;
  run_probe(examples, enc, store, table, cfg, cache_dir, "xx");
  cache_files = 0;
  for (auto& e : std::filesystem::directory_iterator(cache_dir)) (void)e, ++cache_files;
  REQUIRE(cache_files == 2);
  std::filesystem::remove_all(cache_dir);

  auto line = probe_result_json(fresh.result);
  REQUIRE(line.find('\n') == std::string::npos);
  auto j = nlohmann::json::parse(line);
  REQUIRE(j["schema"] == "clprobe-probe-result v1");
  REQUIRE(j["encoder"] == "rnn_max");
  REQUIRE(j["language"] == "xx");
  REQUIRE(j["test_acc"].get<double>() == fresh.result.test_acc);
  REQUIRE(j["confusion"].size() == 2);
}
