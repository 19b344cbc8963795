// Pipeline driver: one subcommand per module operation chain.
//
//   freq         corpus -> unigram/bigram frequency tables
//   extract      corpus + tables -> nine probing datasets + manifest
//   toy-nli      rule-generated three-way inference corpus
//   train-nli    premise/hypothesis classifier -> encoder checkpoint
//   map-words    bilingual dictionary -> orthogonal word mapping
//   map-encoder  parallel text + frozen source encoder -> target encoder
//   probe        dataset + frozen encoder -> diagnostic accuracy (JSON line)
//   report       probe results (+ transfer accuracies) -> CSV matrices
//
// Every subcommand accepts --config FILE (flat key=value lines, keys are the
// long option names; command-line flags win). The only environment variable
// consulted is CLPROBE_SEED, which replaces the default seed when neither the
// flag nor the config file sets one. Each run writes run-manifest.json with
// the fully resolved configuration next to its artifacts. Exit codes: 0 ok,
// 1 runtime failure, 2 usage error; errors are one line on stderr.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clprobe/corpus/frequency.hpp"
#include "clprobe/corpus/io.hpp"
#include "clprobe/encoders/embedding.hpp"
#include "clprobe/encoders/encoder.hpp"
#include "clprobe/encoders/nli.hpp"
#include "clprobe/ndiff/checkpoint.hpp"
#include "clprobe/probe/runner.hpp"
#include "clprobe/report/report.hpp"
#include "clprobe/taskgen/extract.hpp"
#include "clprobe/taskgen/manifest.hpp"
#include "clprobe/trainer/align.hpp"
#include "clprobe/trainer/data.hpp"
#include "clprobe/trainer/nli_trainer.hpp"
#include "clprobe/trainer/procrustes.hpp"

namespace {

using clprobe::fail;
using clprobe::format_double;
using clprobe::read_file;
using clprobe::split;
using clprobe::trim;
using clprobe::write_file;

using KV = std::vector<std::pair<std::string, std::string>>;

std::string ensure_dir(const std::string& dir) {
  if (dir.empty()) fail("output directory must not be empty");
  std::filesystem::create_directories(dir);
  return dir;
}

void write_run_manifest(const std::string& out_dir, const std::string& command, const KV& kv) {
  nlohmann::ordered_json j;
  j["format"] = "clprobe-run v1";
  j["command"] = command;
  nlohmann::ordered_json c;
  for (auto& [k, v] : kv) c[k] = v;
  j["config"] = std::move(c);
  write_file(out_dir + "/run-manifest.json", j.dump(2) + "\n");
}

// Weakest non-default seed source; an explicit flag or config value wins.
uint64_t resolve_seed(const CLI::Option* seed_opt, uint64_t flag_value) {
  if (seed_opt->count() > 0) return flag_value;
  const char* env = std::getenv("CLPROBE_SEED");
  if (!env || !*env) return flag_value;
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    fail(std::string("CLPROBE_SEED is not an unsigned integer: '") + env + "'");
  }
}

std::vector<clprobe::corpus::Sentence> load_corpus(const std::string& path, bool strict) {
  auto parsed = clprobe::corpus::read_conllu_file(path, strict);
  if (!parsed.errors.empty())
    std::cerr << "clprobe: note: skipped " << parsed.errors.size() << " malformed sentence(s) in "
              << path << "\n";
  if (parsed.sentences.empty()) fail("no sentences in " + path);
  return parsed.sentences;
}

// An encoder rebuilt from a checkpoint; tensors the encoder does not own
// (e.g. a classifier head saved alongside it) are ignored.
struct LoadedEncoder {
  clprobe::encoders::EncoderConfig cfg;
  std::unique_ptr<clprobe::ndiff::ParamStore> store;
  std::unique_ptr<clprobe::encoders::Encoder> enc;
};

LoadedEncoder load_encoder(const std::string& path) {
  auto ck = clprobe::ndiff::load_checkpoint(path);
  LoadedEncoder out;
  out.cfg = clprobe::encoders::EncoderConfig::from_map(ck.config);
  out.store = std::make_unique<clprobe::ndiff::ParamStore>();
  clprobe::ndiff::Rng init(0);
  out.enc = std::make_unique<clprobe::encoders::Encoder>(out.cfg, *out.store, init);
  clprobe::ndiff::Checkpoint own;
  for (auto& [name, t] : ck.tensors)
    if (out.store->has(name)) own.tensors.emplace_back(name, t);
  if (own.tensors.size() != out.store->all().size())
    fail(path + ": checkpoint covers " + std::to_string(own.tensors.size()) + " of " +
         std::to_string(out.store->all().size()) + " encoder tensors");
  clprobe::ndiff::load_into_store(own, *out.store);
  return out;
}

clprobe::encoders::EmbeddingTable load_embeddings_checked(const std::string& path,
                                                          size_t expected_dim) {
  auto table = clprobe::encoders::load_embeddings(path);
  if (expected_dim != 0 && table.dim != expected_dim)
    fail(path + ": embedding dimension " + std::to_string(table.dim) +
         " does not match the encoder's " + std::to_string(expected_dim));
  return table;
}

// ---- freq ----

struct FreqOpt {
  std::string corpus, out;
  bool case_fold = false;
  bool strict = false;
};

void run_freq(const FreqOpt& o) {
  auto corpus = load_corpus(o.corpus, o.strict);
  auto table = clprobe::corpus::build_frequency_tables(corpus, o.case_fold);
  ensure_dir(o.out);
  clprobe::corpus::save_frequency_table(o.out + "/freq.tsv", table);
  write_run_manifest(o.out, "freq",
                     {{"corpus", o.corpus},
                      {"out", o.out},
                      {"case-fold", o.case_fold ? "true" : "false"},
                      {"strict", o.strict ? "true" : "false"}});
  std::cout << "freq: " << corpus.size() << " sentences, " << table.unigram.size()
            << " distinct forms -> " << o.out << "/freq.tsv\n";
}

// ---- extract ----

struct ExtractOpt {
  std::string corpus, freq, out;
  uint64_t seed = 1;
  size_t train = 100000, valid = 10000, test = 10000;
  size_t wc_lo = 2000, wc_hi = 3000, wc_n = 1000;
  std::string depth_classes = "3,4,5,6,7,8";
  std::string bins = "5-8,9-12,13-16,17-20,21-25,26-28";
  double somo_tol = 1.0;
  uint64_t somo_min = 2;
  size_t max_len = 70;
  bool case_fold = false;
  bool strict = false;
  std::vector<std::string> tasks;
};

clprobe::taskgen::TaskConfig extract_config(const ExtractOpt& o) {
  clprobe::taskgen::TaskConfig cfg;
  cfg.sizes = {o.train, o.valid, o.test};
  cfg.wc_window = {o.wc_lo, o.wc_hi};
  cfg.wc_n = o.wc_n;
  cfg.somo_log_tolerance = o.somo_tol;
  cfg.somo_min_bigram_count = o.somo_min;
  cfg.max_sentence_len = o.max_len;
  cfg.case_fold = o.case_fold;
  cfg.seed = o.seed;
  cfg.treedepth_classes.clear();
  for (auto& part : split(o.depth_classes, ','))
    cfg.treedepth_classes.push_back(std::stoi(part));
  cfg.sentlen_bins.clear();
  for (auto& part : split(o.bins, ',')) {
    auto ends = split(part, '-');
    if (ends.size() != 2) fail("bad length bin '" + part + "', expected lo-hi");
    cfg.sentlen_bins.emplace_back(std::stoull(ends[0]), std::stoull(ends[1]));
  }
  if (!o.tasks.empty()) cfg.task_order = o.tasks;
  cfg.validate();
  return cfg;
}

void run_extract(const ExtractOpt& o) {
  auto cfg = extract_config(o);
  auto corpus = load_corpus(o.corpus, o.strict);
  clprobe::corpus::FrequencyTable freq =
      o.freq.empty() ? clprobe::corpus::build_frequency_tables(corpus, o.case_fold)
                     : clprobe::corpus::load_frequency_table(o.freq);
  auto tasks = clprobe::taskgen::run_extraction(corpus, freq, cfg);
  ensure_dir(o.out);
  size_t total = 0;
  for (auto& name : cfg.task_order) {
    clprobe::taskgen::write_dataset(o.out + "/" + name + ".tsv", tasks.at(name));
    total += tasks.at(name).size();
  }
  write_file(o.out + "/manifest.json",
             clprobe::taskgen::build_manifest(cfg, clprobe::corpus::corpus_fingerprint(corpus),
                                              tasks));
  write_run_manifest(
      o.out, "extract",
      {{"corpus", o.corpus},
       {"freq", o.freq},
       {"out", o.out},
       {"train", std::to_string(o.train)},
       {"valid", std::to_string(o.valid)},
       {"test", std::to_string(o.test)},
       {"wc-lo", std::to_string(o.wc_lo)},
       {"wc-hi", std::to_string(o.wc_hi)},
       {"wc-n", std::to_string(o.wc_n)},
       {"depth-classes", o.depth_classes},
       {"bins", o.bins},
       {"somo-tol", format_double(o.somo_tol)},
       {"somo-min", std::to_string(o.somo_min)},
       {"max-len", std::to_string(o.max_len)},
       {"case-fold", o.case_fold ? "true" : "false"},
       {"strict", o.strict ? "true" : "false"},
       {"tasks", clprobe::join(cfg.task_order, ",")},
       {"seed", std::to_string(o.seed)}});
  std::cout << "extract: " << cfg.task_order.size() << " tasks, " << total << " examples -> "
            << o.out << "\n";
}

// ---- toy-nli ----

const std::vector<std::string> kToyVocab = {
    "not",  "apple", "bird", "cat",  "dog",  "egg",  "fish", "goat",
    "hat",  "ink",   "jam",  "kite", "lamp", "moon", "nest", "owl",
    "pear", "quilt", "rose", "sun",  "tree", "urn",  "vase", "wolf"};

struct ToyNliOpt {
  std::string out, vocab;
  std::string marker = "not";
  size_t n = 5001;
  double valid_fraction = 0.1;
  uint64_t seed = 1;
};

void run_toy_nli(const ToyNliOpt& o) {
  std::vector<std::string> vocab = kToyVocab;
  if (!o.vocab.empty()) {
    vocab.clear();
    for (auto& line : split(read_file(o.vocab), '\n'))
      if (!clprobe::trim(line).empty()) vocab.push_back(clprobe::trim(line));
  }
  auto data = clprobe::trainer::make_toy_nli(vocab, o.marker, o.n,
                                             clprobe::ndiff::derive_seed(o.seed, "toy-nli"));
  auto n_valid = static_cast<size_t>(static_cast<double>(o.n) * o.valid_fraction + 0.5);
  if (n_valid == 0 || n_valid >= data.size())
    fail("valid-fraction " + format_double(o.valid_fraction) + " leaves no usable split");
  std::vector<clprobe::trainer::NliExample> train(data.begin(), data.end() - n_valid);
  std::vector<clprobe::trainer::NliExample> valid(data.end() - n_valid, data.end());
  ensure_dir(o.out);
  write_file(o.out + "/train.tsv", clprobe::trainer::serialize_nli_tsv(train));
  write_file(o.out + "/valid.tsv", clprobe::trainer::serialize_nli_tsv(valid));
  write_run_manifest(o.out, "toy-nli",
                     {{"out", o.out},
                      {"vocab", o.vocab},
                      {"marker", o.marker},
                      {"n", std::to_string(o.n)},
                      {"valid-fraction", format_double(o.valid_fraction)},
                      {"seed", std::to_string(o.seed)}});
  std::cout << "toy-nli: " << train.size() << " train / " << valid.size() << " valid pairs -> "
            << o.out << "\n";
}

// ---- encoder dimension flags shared by train-nli ----

struct DimOpt {
  clprobe::encoders::EncoderConfig dims;  // holds flag values
  bool toy = false;
  CLI::Option* opts[9] = {};

  void bind(CLI::App* sc) {
    sc->add_flag("--toy", toy, "start from the small test profile instead of the full one");
    opts[0] = sc->add_option("--emb-dim", dims.emb_dim, "word vector width");
    opts[1] = sc->add_option("--hidden", dims.hidden, "recurrent width per direction");
    opts[2] = sc->add_option("--layers", dims.layers, "recurrent layers");
    opts[3] = sc->add_option("--dropout", dims.dropout, "inter-layer dropout rate");
    opts[4] = sc->add_option("--cnn-channels", dims.cnn_channels, "channels per filter width");
    opts[5] = sc->add_option("--cnn-projection", dims.cnn_projection, "convolutional output width");
    opts[6] = sc->add_option("--attn-mlp", dims.attn_mlp, "attention scorer width");
    opts[7] = sc->add_option("--attn-heads", dims.attn_heads, "attention heads");
  }

  clprobe::encoders::EncoderConfig resolve(const std::string& kind) const {
    auto cfg = toy ? clprobe::encoders::EncoderConfig::toy(kind)
                   : clprobe::encoders::EncoderConfig{};
    cfg.kind = kind;
    if (opts[0]->count()) cfg.emb_dim = dims.emb_dim;
    if (opts[1]->count()) cfg.hidden = dims.hidden;
    if (opts[2]->count()) cfg.layers = dims.layers;
    if (opts[3]->count()) cfg.dropout = dims.dropout;
    if (opts[4]->count()) cfg.cnn_channels = dims.cnn_channels;
    if (opts[5]->count()) cfg.cnn_projection = dims.cnn_projection;
    if (opts[6]->count()) cfg.attn_mlp = dims.attn_mlp;
    if (opts[7]->count()) cfg.attn_heads = dims.attn_heads;
    cfg.validate();
    return cfg;
  }

  KV manifest(const clprobe::encoders::EncoderConfig& cfg) const {
    KV kv;
    for (auto& [k, v] : cfg.to_map()) kv.emplace_back(k, v);
    return kv;
  }
};

// ---- train-nli ----

struct TrainNliOpt {
  std::string train, valid, embeddings, out;
  std::string encoder = "rnn_max";
  DimOpt dim;
  size_t epochs = 20, batch = 10;
  double lr = 1e-3;
  uint64_t seed = 1;
};

void run_train_nli(const TrainNliOpt& o) {
  auto train = clprobe::trainer::load_nli_tsv(o.train);
  auto valid = clprobe::trainer::load_nli_tsv(o.valid);
  auto cfg = o.dim.resolve(o.encoder);

  clprobe::encoders::EmbeddingTable table;
  bool generated = o.embeddings.empty();
  if (generated) {
    std::set<std::string> vocab;
    for (auto* side : {&train, &valid})
      for (auto& ex : *side) {
        vocab.insert(ex.premise.begin(), ex.premise.end());
        vocab.insert(ex.hypothesis.begin(), ex.hypothesis.end());
      }
    clprobe::ndiff::Rng erng(clprobe::ndiff::derive_seed(o.seed, "embeddings"));
    table = clprobe::encoders::random_embeddings(
        std::vector<std::string>(vocab.begin(), vocab.end()), cfg.emb_dim, erng);
  } else {
    table = load_embeddings_checked(o.embeddings, cfg.emb_dim);
  }

  clprobe::encoders::NliModel model(cfg, clprobe::ndiff::derive_seed(o.seed, "nli-init"));
  clprobe::trainer::NliTrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch = o.batch;
  tc.adam.lr = o.lr;
  tc.seed = o.seed;
  auto res = clprobe::trainer::train_nli(model, train, valid, table, tc);

  ensure_dir(o.out);
  if (generated) clprobe::encoders::save_embeddings(o.out + "/embeddings.tsv", table);
  auto ck_cfg = cfg.to_map();
  ck_cfg["model"] = "nli";
  clprobe::ndiff::save_checkpoint(o.out + "/encoder.ck",
                                  clprobe::ndiff::checkpoint_from_store(model.store(), ck_cfg));
  nlohmann::ordered_json h;
  h["format"] = "clprobe-nli-history v1";
  h["train_loss"] = res.train_loss;
  h["valid_acc"] = res.valid_acc;
  h["best_epoch"] = res.best_epoch;
  h["best_valid_acc"] = res.best_valid_acc;
  write_file(o.out + "/history.json", h.dump(2) + "\n");

  KV kv = {{"train", o.train},  {"valid", o.valid},
           {"embeddings", o.embeddings}, {"out", o.out},
           {"encoder", o.encoder},       {"epochs", std::to_string(o.epochs)},
           {"batch", std::to_string(o.batch)}, {"lr", format_double(o.lr)},
           {"seed", std::to_string(o.seed)}};
  for (auto& [k, v] : o.dim.manifest(cfg)) kv.emplace_back("encoder." + k, v);
  write_run_manifest(o.out, "train-nli", kv);
  std::cout << "train-nli: best valid acc " << clprobe::report::format_fixed(res.best_valid_acc)
            << " (epoch " << res.best_epoch << ") -> " << o.out << "/encoder.ck\n";
}

// ---- map-words ----

struct MapWordsOpt {
  std::string source_emb, target_emb, dict, out;
};

void run_map_words(const MapWordsOpt& o) {
  auto src = clprobe::encoders::load_embeddings(o.source_emb);
  auto tgt = clprobe::encoders::load_embeddings(o.target_emb);
  auto dict = clprobe::trainer::parse_dictionary(read_file(o.dict));
  auto dm = clprobe::trainer::dictionary_matrices(dict, src, tgt);
  auto w = clprobe::trainer::procrustes_map(dm.x, dm.y);

  double residual = 0.0;
  for (size_t i = 0; i < dm.x.shape[0]; ++i) {
    double row = 0.0;
    for (size_t j = 0; j < tgt.dim; ++j) {
      double m = 0.0;
      for (size_t k = 0; k < src.dim; ++k) m += dm.x.at(i, k) * w.at(k, j);
      row += (m - dm.y.at(i, j)) * (m - dm.y.at(i, j));
    }
    residual += std::sqrt(row);
  }
  residual /= static_cast<double>(dm.x.shape[0]);

  ensure_dir(o.out);
  clprobe::ndiff::Checkpoint ck;
  ck.config = {{"model", "word-mapping"},
               {"source_dim", std::to_string(src.dim)},
               {"target_dim", std::to_string(tgt.dim)},
               {"pairs", std::to_string(dm.x.shape[0])}};
  ck.tensors.emplace_back("map.W", w);
  clprobe::ndiff::save_checkpoint(o.out + "/mapping.ck", ck);
  nlohmann::ordered_json s;
  s["format"] = "clprobe-map-words-stats v1";
  s["pairs"] = dm.x.shape[0];
  s["skipped"] = dm.skipped;
  s["orthogonality_error"] = clprobe::trainer::orthogonality_error(w);
  s["mean_residual"] = residual;
  write_file(o.out + "/stats.json", s.dump(2) + "\n");
  write_run_manifest(o.out, "map-words",
                     {{"source-embeddings", o.source_emb},
                      {"target-embeddings", o.target_emb},
                      {"dict", o.dict},
                      {"out", o.out}});
  std::cout << "map-words: " << dm.x.shape[0] << " pairs (" << dm.skipped
            << " skipped), mean residual " << clprobe::report::format_fixed(residual) << " -> "
            << o.out << "/mapping.ck\n";
}

// ---- map-encoder ----

struct MapEncoderOpt {
  std::string pairs_source, pairs_target, source_ck, source_emb, target_emb, out;
  clprobe::trainer::AlignConfig align;
  double lr = 1e-3;
  size_t max_pairs = 0;
  uint64_t seed = 1;
};

void run_map_encoder(const MapEncoderOpt& o) {
  auto pairs = clprobe::trainer::parse_parallel(clprobe::corpus::read_text_auto(o.pairs_source),
                                                clprobe::corpus::read_text_auto(o.pairs_target),
                                                o.max_pairs);
  auto source = load_encoder(o.source_ck);
  auto src_table = load_embeddings_checked(o.source_emb, source.cfg.emb_dim);
  auto tgt_table = load_embeddings_checked(o.target_emb, source.cfg.emb_dim);

  clprobe::ndiff::ParamStore target_store;
  clprobe::ndiff::Rng init(clprobe::ndiff::derive_seed(o.seed, "map-init"));
  clprobe::encoders::Encoder target(source.cfg, target_store, init);

  auto acfg = o.align;
  acfg.adam.lr = o.lr;
  auto stats = clprobe::trainer::train_mapping(pairs, *source.enc, target, target_store,
                                               src_table, tgt_table, acfg, o.seed);

  ensure_dir(o.out);
  auto ck_cfg = source.cfg.to_map();
  ck_cfg["model"] = "mapped";
  clprobe::ndiff::save_checkpoint(o.out + "/encoder.ck",
                                  clprobe::ndiff::checkpoint_from_store(target_store, ck_cfg));
  nlohmann::ordered_json s;
  s["format"] = "clprobe-map-encoder-stats v1";
  s["pairs"] = pairs.size();
  s["initial_dev_loss"] = stats.initial_dev_loss;
  s["best_dev_loss"] = stats.best_dev_loss;
  s["best_epoch"] = stats.best_epoch;
  s["epochs_run"] = stats.epochs_run;
  s["dev_loss"] = stats.dev_loss;
  write_file(o.out + "/stats.json", s.dump(2) + "\n");
  write_run_manifest(o.out, "map-encoder",
                     {{"pairs-source", o.pairs_source},
                      {"pairs-target", o.pairs_target},
                      {"source-checkpoint", o.source_ck},
                      {"source-embeddings", o.source_emb},
                      {"target-embeddings", o.target_emb},
                      {"out", o.out},
                      {"lambda", format_double(o.align.lambda)},
                      {"batch", std::to_string(o.align.batch)},
                      {"patience", std::to_string(o.align.patience)},
                      {"dev-fraction", format_double(o.align.dev_fraction)},
                      {"max-epochs", std::to_string(o.align.max_epochs)},
                      {"squared", o.align.squared ? "true" : "false"},
                      {"lr", format_double(o.lr)},
                      {"max-pairs", std::to_string(o.max_pairs)},
                      {"seed", std::to_string(o.seed)}});
  std::cout << "map-encoder: dev loss " << clprobe::report::format_fixed(stats.initial_dev_loss)
            << " -> " << clprobe::report::format_fixed(stats.best_dev_loss) << " (epoch "
            << stats.best_epoch << "/" << stats.epochs_run << ") -> " << o.out
            << "/encoder.ck\n";
}

// ---- probe ----

struct ProbeOpt {
  std::string dataset, checkpoint, embeddings, out;
  std::string task, language = "xx";
  std::string cache_dir;
  bool no_cache = false;
  size_t hidden = 150, epochs = 30, batch = 10;
  double lr = 1e-3;
  uint64_t seed = 1;
};

void run_probe_cmd(const ProbeOpt& o) {
  auto examples = clprobe::taskgen::read_dataset(o.dataset, o.task);
  auto enc = load_encoder(o.checkpoint);
  auto table = load_embeddings_checked(o.embeddings, enc.cfg.emb_dim);
  clprobe::probe::ProbeConfig pc;
  pc.hidden = o.hidden;
  pc.epochs = o.epochs;
  pc.batch = o.batch;
  pc.adam.lr = o.lr;
  pc.seed = o.seed;
  ensure_dir(o.out);
  std::string cache = o.no_cache ? "" : (o.cache_dir.empty() ? o.out + "/cache" : o.cache_dir);
  auto run = clprobe::probe::run_probe(examples, *enc.enc, *enc.store, table, pc, cache,
                                       o.language);
  write_file(o.out + "/result.json", clprobe::probe::probe_result_json(run.result) + "\n");
  write_run_manifest(o.out, "probe",
                     {{"dataset", o.dataset},
                      {"checkpoint", o.checkpoint},
                      {"embeddings", o.embeddings},
                      {"out", o.out},
                      {"task", o.task},
                      {"language", o.language},
                      {"cache-dir", cache},
                      {"hidden", std::to_string(o.hidden)},
                      {"epochs", std::to_string(o.epochs)},
                      {"batch", std::to_string(o.batch)},
                      {"lr", format_double(o.lr)},
                      {"seed", std::to_string(o.seed)}});
  std::cout << "probe: " << o.task << " / " << run.result.encoder_kind << " test acc "
            << clprobe::report::format_fixed(run.result.test_acc) << " (majority "
            << clprobe::report::format_fixed(run.result.majority) << ") -> " << o.out
            << "/result.json\n";
}

// ---- report ----

struct ReportOpt {
  std::vector<std::string> results;
  std::string results_tsv, xnli, fixture, out;
  std::string data_dir = "data";
  std::string reference = "en";
};

void run_report(const ReportOpt& o) {
  clprobe::report::ResultMatrix m;
  if (!o.fixture.empty()) {
    if (o.fixture != "appendix") fail("unknown fixture '" + o.fixture + "' (try: appendix)");
    clprobe::report::load_results_tsv(m, read_file(o.data_dir + "/reference_results.tsv"));
    clprobe::report::load_xnli_tsv(m, read_file(o.data_dir + "/reference_xnli.tsv"));
  }
  if (!o.results_tsv.empty()) clprobe::report::load_results_tsv(m, read_file(o.results_tsv));
  for (auto& path : o.results) clprobe::report::load_probe_results(m, read_file(path));
  if (!o.xnli.empty()) clprobe::report::load_xnli_tsv(m, read_file(o.xnli));
  if (m.tasks.empty()) fail("no results loaded; pass --fixture, --results or --results-tsv");

  ensure_dir(o.out);
  auto stats = clprobe::report::task_stats(m);
  write_file(o.out + "/stats.csv", clprobe::report::stats_csv(stats));
  auto rel = clprobe::report::relative_matrix(m, o.reference);
  write_file(o.out + "/relative.csv", clprobe::report::relative_csv(rel));
  bool corr = m.has_any_xnli();
  if (corr) {
    auto rows = clprobe::report::correlation_report(m);
    write_file(o.out + "/correlation.csv", clprobe::report::correlation_csv(rows));
  }
  write_run_manifest(o.out, "report",
                     {{"results", clprobe::join(o.results, ",")},
                      {"results-tsv", o.results_tsv},
                      {"xnli", o.xnli},
                      {"fixture", o.fixture},
                      {"data-dir", o.data_dir},
                      {"reference", o.reference},
                      {"out", o.out}});
  std::cout << "report: " << m.tasks.size() << " tasks x " << m.encoders.size()
            << " encoders x " << m.languages.size() << " languages -> " << o.out
            << (corr ? " (stats, relative, correlation)" : " (stats, relative)") << "\n";
}

void add_config(CLI::App* sc) {
  sc->add_option("--config", "flat key=value file; keys are long option names, flags override")
      ->type_name("FILE");
}

// Expands `clprobe SUB --config FILE ...` by injecting the file's pairs as
// --key=value arguments right after the subcommand, skipping keys the command
// line already sets. Explicit flags therefore always win, required options
// may be satisfied from the file, and unknown keys fail like unknown flags.
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  size_t sub = args.size();
  for (size_t i = 0; i < args.size(); ++i)
    if (!args[i].empty() && args[i][0] != '-') {
      sub = i;
      break;
    }
  if (sub == args.size()) return args;

  std::string path;
  std::set<std::string> given;
  for (size_t i = sub + 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    auto eq = a.find('=');
    std::string name = eq == std::string::npos ? a.substr(2) : a.substr(2, eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos)
        path = a.substr(eq + 1);
      else if (i + 1 < args.size())
        path = args[i + 1];
    }
  }
  if (path.empty()) return args;
  if (!std::filesystem::exists(path)) throw CLI::FileError::Missing(path);

  std::vector<std::string> inject;
  for (auto& raw : split(read_file(path), '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::FileError(path + ": line '" + line + "' is not key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw CLI::FileError(path + ": bad key in line '" + line + "'");
    if (given.count(key)) continue;
    inject.push_back("--" + key + "=" + val);
  }
  args.insert(args.begin() + sub + 1, inject.begin(), inject.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probing-task workbench for multilingual sentence encoders"};
  app.require_subcommand(1);

  auto freq = std::make_shared<FreqOpt>();
  {
    auto* sc = app.add_subcommand("freq", "count unigram/bigram frequencies in a corpus");
    add_config(sc);
    sc->add_option("--corpus", freq->corpus, "annotated corpus (.conllu, .gz ok)")
        ->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", freq->out, "output directory")->required();
    sc->add_flag("--case-fold", freq->case_fold, "lowercase ASCII before counting");
    sc->add_flag("--strict", freq->strict, "fail on malformed sentences instead of skipping");
    sc->callback([freq] { run_freq(*freq); });
  }

  auto ext = std::make_shared<ExtractOpt>();
  {
    auto* sc = app.add_subcommand("extract", "generate the nine probing datasets");
    add_config(sc);
    sc->add_option("--corpus", ext->corpus, "annotated corpus")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--freq", ext->freq, "frequency table (defaults to counting the corpus)")
        ->check(CLI::ExistingFile);
    sc->add_option("--out", ext->out, "output directory")->required();
    sc->add_option("--train", ext->train, "per-task training examples");
    sc->add_option("--valid", ext->valid, "per-task validation examples");
    sc->add_option("--test", ext->test, "per-task test examples");
    sc->add_option("--wc-lo", ext->wc_lo, "word-content band: first frequency rank");
    sc->add_option("--wc-hi", ext->wc_hi, "word-content band: one past the last rank");
    sc->add_option("--wc-n", ext->wc_n, "word-content class count");
    sc->add_option("--depth-classes", ext->depth_classes, "tree depths, comma separated");
    sc->add_option("--bins", ext->bins, "length bins, lo-hi comma separated");
    sc->add_option("--somo-tol", ext->somo_tol, "substitution log-frequency tolerance");
    sc->add_option("--somo-min", ext->somo_min, "minimum bigram count for substitution");
    sc->add_option("--max-len", ext->max_len, "longest ingestible sentence");
    sc->add_flag("--case-fold", ext->case_fold, "lowercase ASCII in labels and lookups");
    sc->add_flag("--strict", ext->strict, "fail on malformed sentences instead of skipping");
    sc->add_option("--tasks", ext->tasks, "task subset/order (default: all nine)")
        ->delimiter(',');
    auto* seed = sc->add_option("--seed", ext->seed, "extraction seed");
    sc->callback([ext, seed] {
      ext->seed = resolve_seed(seed, ext->seed);
      run_extract(*ext);
    });
  }

  auto toy = std::make_shared<ToyNliOpt>();
  {
    auto* sc = app.add_subcommand("toy-nli", "generate a rule-based inference corpus");
    add_config(sc);
    sc->add_option("--out", toy->out, "output directory")->required();
    sc->add_option("--n", toy->n, "total pairs (divisible by 3)");
    sc->add_option("--valid-fraction", toy->valid_fraction, "share held out for validation")
        ->check(CLI::Range(0.0, 0.9));
    sc->add_option("--vocab", toy->vocab, "one word per line (default: built-in list)")
        ->check(CLI::ExistingFile);
    sc->add_option("--marker", toy->marker, "negation marker word");
    auto* seed = sc->add_option("--seed", toy->seed, "generation seed");
    sc->callback([toy, seed] {
      toy->seed = resolve_seed(seed, toy->seed);
      run_toy_nli(*toy);
    });
  }

  auto tn = std::make_shared<TrainNliOpt>();
  {
    auto* sc = app.add_subcommand("train-nli", "train a sentence encoder on inference pairs");
    add_config(sc);
    sc->add_option("--train", tn->train, "training pairs (tsv)")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--valid", tn->valid, "validation pairs (tsv)")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--embeddings", tn->embeddings,
                   "word vectors; omitted = random vectors, saved next to the checkpoint")
        ->check(CLI::ExistingFile);
    sc->add_option("--out", tn->out, "output directory")->required();
    sc->add_option("--encoder", tn->encoder, "rnn_max rnn_last attn_max attn_last cnn_max cnn_avg");
    tn->dim.bind(sc);
    sc->add_option("--epochs", tn->epochs, "training epochs");
    sc->add_option("--batch", tn->batch, "minibatch size");
    sc->add_option("--lr", tn->lr, "learning rate");
    auto* seed = sc->add_option("--seed", tn->seed, "training seed");
    sc->callback([tn, seed] {
      tn->seed = resolve_seed(seed, tn->seed);
      run_train_nli(*tn);
    });
  }

  auto mw = std::make_shared<MapWordsOpt>();
  {
    auto* sc = app.add_subcommand("map-words",
                                  "fit an orthogonal word mapping from a bilingual dictionary");
    add_config(sc);
    sc->add_option("--source-embeddings", mw->source_emb, "source word vectors")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--target-embeddings", mw->target_emb, "target word vectors")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--dict", mw->dict, "source<TAB>target word pairs")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", mw->out, "output directory")->required();
    sc->callback([mw] { run_map_words(*mw); });
  }

  auto me = std::make_shared<MapEncoderOpt>();
  {
    auto* sc = app.add_subcommand("map-encoder",
                                  "train a target-language encoder against a frozen source");
    add_config(sc);
    sc->add_option("--pairs-source", me->pairs_source, "source side, one sentence per line")
        ->required()->check(CLI::ExistingFile);
    sc->add_option("--pairs-target", me->pairs_target, "target side, line-aligned")
        ->required()->check(CLI::ExistingFile);
    sc->add_option("--source-checkpoint", me->source_ck, "frozen source encoder")
        ->required()->check(CLI::ExistingFile);
    sc->add_option("--source-embeddings", me->source_emb, "source word vectors")
        ->required()->check(CLI::ExistingFile);
    sc->add_option("--target-embeddings", me->target_emb, "target word vectors")
        ->required()->check(CLI::ExistingFile);
    sc->add_option("--out", me->out, "output directory")->required();
    sc->add_option("--lambda", me->align.lambda, "contrastive weight");
    sc->add_option("--batch", me->align.batch, "minibatch size");
    sc->add_option("--patience", me->align.patience, "non-improving epochs tolerated");
    sc->add_option("--dev-fraction", me->align.dev_fraction, "share held out for early stopping");
    sc->add_option("--max-epochs", me->align.max_epochs, "epoch cap");
    sc->add_flag("--squared", me->align.squared, "use squared distances in the loss");
    sc->add_option("--lr", me->lr, "learning rate");
    sc->add_option("--max-pairs", me->max_pairs, "cap on parallel pairs (0 = all)");
    auto* seed = sc->add_option("--seed", me->seed, "training seed");
    sc->callback([me, seed] {
      me->seed = resolve_seed(seed, me->seed);
      run_map_encoder(*me);
    });
  }

  auto pr = std::make_shared<ProbeOpt>();
  {
    auto* sc = app.add_subcommand("probe", "train a diagnostic classifier on a frozen encoder");
    add_config(sc);
    sc->add_option("--dataset", pr->dataset, "probing dataset (tsv)")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--task", pr->task, "task name recorded in the result")->required();
    sc->add_option("--checkpoint", pr->checkpoint, "encoder checkpoint")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--embeddings", pr->embeddings, "word vectors")->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", pr->out, "output directory")->required();
    sc->add_option("--language", pr->language, "language tag recorded in the result");
    sc->add_option("--cache-dir", pr->cache_dir, "sentence-vector cache (default: OUT/cache)");
    sc->add_flag("--no-cache", pr->no_cache, "always re-encode sentences");
    sc->add_option("--hidden", pr->hidden, "classifier hidden width");
    sc->add_option("--epochs", pr->epochs, "training epochs");
    sc->add_option("--batch", pr->batch, "minibatch size");
    sc->add_option("--lr", pr->lr, "learning rate");
    auto* seed = sc->add_option("--seed", pr->seed, "training seed");
    sc->callback([pr, seed] {
      pr->seed = resolve_seed(seed, pr->seed);
      run_probe_cmd(*pr);
    });
  }

  auto rp = std::make_shared<ReportOpt>();
  {
    auto* sc = app.add_subcommand("report", "aggregate probe results into CSV matrices");
    add_config(sc);
    sc->add_option("--results", rp->results, "probe result JSON-lines file (repeatable)")
        ->check(CLI::ExistingFile);
    sc->add_option("--results-tsv", rp->results_tsv,
                   "task/encoder/language/accuracy table")->check(CLI::ExistingFile);
    sc->add_option("--xnli", rp->xnli, "encoder/language/accuracy transfer table")
        ->check(CLI::ExistingFile);
    sc->add_option("--fixture", rp->fixture, "bundled inputs; 'appendix' = published accuracies");
    sc->add_option("--data-dir", rp->data_dir, "directory holding the bundled fixtures");
    sc->add_option("--reference", rp->reference, "denominator language for the relative matrix");
    sc->add_option("--out", rp->out, "output directory")->required();
    sc->callback([rp] { run_report(*rp); });
  }

  try {
    auto args = expand_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "clprobe: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "clprobe: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
