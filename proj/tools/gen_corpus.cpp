// Synthetic annotated-corpus generator; see corpus/synth.hpp for the strata.
// Same seed and scale always produce byte-identical output.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <zlib.h>

#include "clprobe/corpus/conllu.hpp"
#include "clprobe/corpus/synth.hpp"

namespace {

void write_maybe_gzip(const std::string& path, const std::string& text) {
  if (path.size() < 3 || path.substr(path.size() - 3) != ".gz") {
    clprobe::write_file(path, text);
    return;
  }
  gzFile f = gzopen(path.c_str(), "wb");
  if (!f) clprobe::fail("cannot write " + path);
  int n = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  bool bad = n <= 0 || static_cast<size_t>(n) != text.size();
  gzclose(f);
  if (bad) clprobe::fail("error while writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic dependency-annotated corpus"};
  std::string out;
  clprobe::corpus::SynthConfig cfg;
  app.add_option("--out", out, "output path (.gz suffix enables gzip)")->required();
  app.add_option("--scale", cfg.scale, "stratum size multiplier (1.0 = about 50k sentences)")
      ->check(CLI::Range(0.1, 100.0));
  app.add_option("--seed", cfg.seed, "generation seed");

  try {
    app.parse(argc, argv);
    clprobe::corpus::SynthInfo info;
    auto corpus = clprobe::corpus::generate_corpus(cfg, &info);
    if (auto dir = std::filesystem::path(out).parent_path(); !dir.empty())
      std::filesystem::create_directories(dir);
    write_maybe_gzip(out, clprobe::corpus::serialize_conllu(corpus));
    std::cout << "gen_corpus: " << info.sentences << " sentences, " << info.tokens
              << " tokens -> " << out << "\n"
              << "gen_corpus: word-content band ranks [" << info.wc_window.lo << ", "
              << info.wc_window.hi << "), " << info.wc_words << " words x " << info.wc_count
              << " occurrences\n";
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "gen_corpus: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gen_corpus: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
