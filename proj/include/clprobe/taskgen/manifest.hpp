#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "clprobe/taskgen/config.hpp"
#include "clprobe/taskgen/example.hpp"

namespace clprobe::taskgen {

// Run manifest: config echo, per-task per-class split counts, seed and corpus
// fingerprint. Carries no timestamps or host details, so two identical runs
// produce byte-identical manifests.
inline std::string build_manifest(const TaskConfig& cfg, uint64_t corpus_fingerprint,
                                  const std::map<std::string, std::vector<ProbingExample>>& tasks) {
  using json = nlohmann::ordered_json;
  json m;
  m["format"] = "clprobe-manifest v1";
  m["seed"] = cfg.seed;
  m["corpus_fingerprint"] = to_hex(corpus_fingerprint);

  json c;
  c["sentlen_bins"] = json::array();
  for (auto& [lo, hi] : cfg.sentlen_bins) c["sentlen_bins"].push_back({lo, hi});
  c["wc_window"] = {cfg.wc_window.lo, cfg.wc_window.hi};
  c["wc_n"] = cfg.wc_n;
  c["treedepth_classes"] = cfg.treedepth_classes;
  c["somo_log_tolerance"] = cfg.somo_log_tolerance;
  c["somo_min_bigram_count"] = cfg.somo_min_bigram_count;
  c["sizes"] = {{"train", cfg.sizes.train}, {"valid", cfg.sizes.valid}, {"test", cfg.sizes.test}};
  c["max_sentence_len"] = cfg.max_sentence_len;
  c["case_fold"] = cfg.case_fold;
  c["task_order"] = cfg.task_order;
  m["config"] = std::move(c);

  json t = json::object();
  for (auto& name : cfg.task_order) {
    auto it = tasks.find(name);
    if (it == tasks.end()) continue;
    std::map<std::string, std::array<size_t, 3>> counts;
    for (auto& e : it->second) counts[e.label][static_cast<int>(e.split)]++;
    json classes = json::object();
    for (auto& [label, n] : counts)
      classes[label] = {{"train", n[0]}, {"valid", n[1]}, {"test", n[2]}};
    t[name] = {{"examples", it->second.size()}, {"classes", std::move(classes)}};
  }
  m["tasks"] = std::move(t);
  return m.dump(2) + "\n";
}

}  // namespace clprobe::taskgen
