#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clprobe/ndiff/rng.hpp"
#include "clprobe/report/matrix.hpp"
#include "clprobe/report/report.hpp"
#include "clprobe/report/spearman.hpp"

using namespace clprobe;
using namespace clprobe::report;
using Catch::Approx;

// independent rank definition: rank_i = (#smaller) + (#equal + 1) / 2
static std::vector<double> oracle_ranks(const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    double smaller = 0, equal = 0;
    for (double v : xs) {
      if (v < xs[i]) smaller += 1;
      if (v == xs[i]) equal += 1;
    }
    out[i] = smaller + (equal + 1) / 2;
  }
  return out;
}

TEST_CASE("average ranks with and without ties") {
  REQUIRE(average_ranks({10, 20, 20, 40}) == std::vector<double>{1, 2.5, 2.5, 4});
  REQUIRE(average_ranks({3, 1, 2}) == std::vector<double>{3, 1, 2});
  REQUIRE(average_ranks({5, 5, 5}) == std::vector<double>{2, 2, 2});
  std::vector<double> xs = {0.3, -1, 7, 0.3, 2, 7, 7};
  REQUIRE(average_ranks(xs) == oracle_ranks(xs));
}

TEST_CASE("spearman endpoints are exact") {
  REQUIRE(spearman({1, 2, 3}, {1, 2, 3}) == 1.0);
  REQUIRE(spearman({1, 2, 3}, {3, 2, 1}) == -1.0);
  REQUIRE(spearman({1, 2, 3, 4, 5, 6}, {2, 4, 9, 12, 100, 101}) == 1.0);
}

TEST_CASE("spearman tie handling matches the definitional oracle") {
  std::vector<double> a = {1, 2, 2, 4}, b = {1, 3, 2, 4};
  double got = spearman(a, b);
  REQUIRE(got == Approx(pearson(oracle_ranks(a), oracle_ranks(b))).margin(1e-12));
  REQUIRE(got == Approx(3.0 / std::sqrt(10.0)).margin(1e-12));

  ndiff::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 9; ++i) {
      xs.push_back(static_cast<double>(rng.index(5)));  // plenty of ties
      ys.push_back(rng.uniform(-1, 1));
    }
    if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; })) continue;
    REQUIRE(spearman(xs, ys) == Approx(pearson(oracle_ranks(xs), oracle_ranks(ys))).margin(1e-12));
  }
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  ndiff::Rng rng(11);
  std::vector<double> xs, ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(rng.uniform(-2, 2));
    ys.push_back(rng.uniform(-2, 2));
  }
  double base = spearman(xs, ys);
  std::vector<double> ex = xs, cy = ys;
  for (auto& v : ex) v = std::exp(v);
  for (auto& v : cy) v = v * v * v;
  REQUIRE(spearman(ex, ys) == Approx(base).margin(1e-12));
  REQUIRE(spearman(xs, cy) == Approx(base).margin(1e-12));
}

TEST_CASE("spearman rejects degenerate input") {
  REQUIRE_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), error);
  REQUIRE_THROWS_AS(spearman({1, 2}, {1, 2, 3}), error);
  REQUIRE_THROWS_AS(spearman({1}, {2}), error);
  REQUIRE(!spearman_or_null({1, 1, 1}, {1, 2, 3}).has_value());
  REQUIRE(!spearman_or_null({1, 2, 3}, {4, 4, 4}).has_value());
  REQUIRE(spearman_or_null({1, 2, 3}, {5, 6, 9}).value() == 1.0);
}

static ResultMatrix fixture_matrix(bool with_xnli = false) {
  ResultMatrix m;
  load_results_tsv(m, read_file("data/reference_results.tsv"));
  if (with_xnli) load_xnli_tsv(m, read_file("data/reference_xnli.tsv"));
  return m;
}

TEST_CASE("published-results fixture loads completely") {
  ResultMatrix m = fixture_matrix(true);
  REQUIRE(m.tasks == kReportTasks);
  REQUIRE(m.encoders == kReportEncoders);
  REQUIRE(m.languages == std::vector<std::string>{"en", "de", "es", "fr", "fr_un", "ru"});
  REQUIRE(m.missing_cells().empty());
  REQUIRE(m.get("sentlen", "attn_max", "de") == 0.85);
  REQUIRE(m.get("wc", "cnn_max", "ru") == 0.0);
  REQUIRE(m.get_xnli("rnn_max", "en") == 0.71);
  REQUIRE(m.get_xnli("attn_last", "ru") == 0.62);
}

TEST_CASE("result matrix validation") {
  ResultMatrix m;
  REQUIRE_THROWS_AS(m.set("t", "e", "l", 1.2), error);
  m.set("t", "e", "l1", 0.5);
  m.set("t", "e", "l2", 0.25);
  REQUIRE_THROWS_AS(m.get("t", "e", "l3"), error);
  m.languages.push_back("l3");
  auto missing = m.missing_cells();
  REQUIRE(missing == std::vector<std::string>{"t/e/l3"});
  REQUIRE_THROWS_WITH(task_stats(m), Catch::Matchers::ContainsSubstring("t/e/l3"));
  REQUIRE_THROWS_AS(load_results_tsv(m, "task\tencoder\tlanguage\taccuracy\na\tb\tc\tbad\n"),
                    error);
}

TEST_CASE("per-task statistics match the independently computed fixture values") {
  struct Expect {
    const char* task;
    double mean, sigma;
  };
  // recomputed from the fixture by a separate implementation
  const Expect expected[] = {
      {"bishift", 0.5580555555555556, 0.013085073014793168},
      {"coordinv", 0.656388888888889, 0.11002910669903512},
      {"objnum", 0.6049999999999999, 0.07285830998131464},
      {"somo", 0.5055555555555555, 0.010657403385139385},
      {"tense", 0.7080555555555553, 0.1245172777936291},
      {"sentlen", 0.5233333333333333, 0.25869329759818327},
      {"subjnum", 0.6441666666666669, 0.09852735096859597},
      {"wc", 0.15055555555555555, 0.1149865800006545},
      {"treedepth", 0.3305555555555557, 0.08188557207213153},
  };
  auto stats = task_stats(fixture_matrix());
  REQUIRE(stats.size() == 9);
  for (size_t i = 0; i < stats.size(); ++i) {
    INFO(stats[i].task);
    REQUIRE(stats[i].task == expected[i].task);
    REQUIRE(stats[i].mean == Approx(expected[i].mean).margin(1e-12));
    REQUIRE(stats[i].stddev == Approx(expected[i].sigma).margin(1e-12));
  }
}

TEST_CASE("task stats are permutation invariant and handle constant input") {
  ResultMatrix a, b;
  a.set("t", "e1", "l1", 0.2);
  a.set("t", "e1", "l2", 0.4);
  a.set("t", "e2", "l1", 0.6);
  a.set("t", "e2", "l2", 0.8);
  b.set("t", "e2", "l2", 0.8);
  b.set("t", "e1", "l2", 0.4);
  b.set("t", "e2", "l1", 0.6);
  b.set("t", "e1", "l1", 0.2);
  auto sa = task_stats(a), sb = task_stats(b);
  REQUIRE(sa[0].mean == sb[0].mean);
  REQUIRE(sa[0].stddev == sb[0].stddev);
  REQUIRE(sa[0].mean == Approx(0.5));

  ResultMatrix c;
  for (auto& e : {"e1", "e2"})
    for (auto& l : {"l1", "l2"}) c.set("t", e, l, 0.5);
  auto sc = task_stats(c);
  REQUIRE(sc[0].mean == Approx(0.5));
  REQUIRE(sc[0].stddev == 0.0);
}

TEST_CASE("relative matrix reproduces the published ratio and reference column") {
  auto rel = relative_matrix(fixture_matrix(), "en");
  REQUIRE(rel.get("sentlen", "attn_max", "de").value() ==
          Approx(1.2142857142857144).margin(1e-9));
  REQUIRE(std::fabs(rel.get("sentlen", "attn_max", "de").value() - 1.214) < 0.001);
  for (auto& t : rel.tasks)
    for (auto& e : rel.encoders) REQUIRE(rel.get(t, e, "en").value() == 1.0);
}

TEST_CASE("relative matrix against an elementwise oracle, zero reference undefined") {
  ndiff::Rng rng(13);
  ResultMatrix m;
  for (auto& t : {"t1", "t2"})
    for (auto& e : {"e1", "e2", "e3"})
      for (auto& l : {"ref", "x", "y"}) m.set(t, e, l, rng.uniform(0.1, 0.9));
  auto rel = relative_matrix(m, "ref");
  for (auto& t : m.tasks)
    for (auto& e : m.encoders)
      for (auto& l : m.languages)
        REQUIRE(rel.get(t, e, l).value() ==
                Approx(m.get(t, e, l) / m.get(t, e, "ref")).margin(1e-15));

  ResultMatrix z;
  z.set("t", "e", "ref", 0.0);
  z.set("t", "e", "x", 0.5);
  auto zr = relative_matrix(z, "ref");
  REQUIRE(!zr.get("t", "e", "x").has_value());
  REQUIRE(!zr.get("t", "e", "ref").has_value());
  std::string csv = relative_csv(zr);
  REQUIRE(csv == "task,encoder,ref,x\nt,e,null,null\n");

  REQUIRE_THROWS_AS(relative_matrix(z, "nope"), error);
}

TEST_CASE("correlation report matches hand-checked fixture value") {
  auto rows = correlation_report(fixture_matrix(true));
  REQUIRE(rows.size() == 9 * 6);
  bool found = false;
  for (auto& r : rows) {
    REQUIRE(r.n == 6);
    if (r.task == "sentlen" && r.language == "de") {
      found = true;
      REQUIRE(r.rho.value() == Approx(0.8285714285714286).margin(1e-12));
    }
  }
  REQUIRE(found);
}

TEST_CASE("correlation report endpoints and undefined rows") {
  ResultMatrix m;
  const char* encs[] = {"e1", "e2", "e3", "e4"};
  for (size_t i = 0; i < 4; ++i) {
    m.set("up", encs[i], "l", 0.1 * static_cast<double>(i + 1));
    m.set("down", encs[i], "l", 0.9 - 0.1 * static_cast<double>(i));
    m.set("flat", encs[i], "l", 0.5);
    m.set_xnli(encs[i], "l", 0.2 * static_cast<double>(i + 1));
  }
  auto rows = correlation_report(m);
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0].rho.value() == 1.0);
  REQUIRE(rows[1].rho.value() == -1.0);
  REQUIRE(!rows[2].rho.has_value());

  std::string csv = correlation_csv(rows);
  REQUIRE(csv.find("up,l,1.0000,4\n") != std::string::npos);
  REQUIRE(csv.find("down,l,-1.0000,4\n") != std::string::npos);
  REQUIRE(csv.find("flat,l,null,4\n") != std::string::npos);

  ResultMatrix no_xnli;
  no_xnli.set("t", "e1", "l", 0.5);
  no_xnli.set("t", "e2", "l", 0.6);
  REQUIRE_THROWS_AS(correlation_report(no_xnli), error);

  m.set("up", "e5", "l", 0.9);  // encoder without a transfer cell
  REQUIRE_THROWS_AS(correlation_report(m), error);
}

TEST_CASE("stats csv formatting") {
  auto stats = task_stats(fixture_matrix());
  std::string csv = stats_csv(stats);
  auto lines = split(csv, '\n');
  REQUIRE(lines[0] == "task,mean,stddev");
  REQUIRE(lines[1] == "bishift,0.5581,0.0131");
  REQUIRE(lines[6] == "sentlen,0.5233,0.2587");
}

TEST_CASE("probe result lines feed the matrix") {
  std::string lines =
      R"({"schema":"clprobe-probe-result v1","task":"sentlen","encoder":"rnn_max","language":"de","test_acc":0.61})"
      "\n"
      R"({"schema":"clprobe-probe-result v1","task":"sentlen","encoder":"cnn_max","language":"de","test_acc":0.2})"
      "\n";
  ResultMatrix m;
  load_probe_results(m, lines);
  REQUIRE(m.get("sentlen", "rnn_max", "de") == 0.61);
  REQUIRE(m.get("sentlen", "cnn_max", "de") == 0.2);
  REQUIRE_THROWS_AS(load_probe_results(m, "{\"schema\":\"other\"}\n"), error);
  REQUIRE_THROWS_AS(load_probe_results(m, "not json\n"), error);
}
