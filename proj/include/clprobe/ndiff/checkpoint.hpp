#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/ndiff/adam.hpp"

namespace clprobe::ndiff {

// Versioned textual model container: a config echo plus named tensors with
// shapes and row-major values printed with %.17g (doubles round-trip exactly).
//
//   clprobe-checkpoint v1
//   config <n>
//   <key>=<value>            x n
//   tensor <name> <rank> <dims...>
//   <values, space separated, one line>
//   ...
//   end
struct Checkpoint {
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& require(const std::string& name) const {
    for (auto& [n, t] : tensors)
      if (n == name) return t;
    fail("checkpoint: missing tensor " + name);
  }

  bool has(const std::string& name) const {
    for (auto& [n, t] : tensors)
      if (n == name) return true;
    return false;
  }
};

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  std::ostringstream out;
  out << "clprobe-checkpoint v1\n";
  out << "config " << ck.config.size() << "\n";
  for (auto& [k, v] : ck.config) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      fail("checkpoint: config key/value may not contain '=' in key or newlines");
    out << k << "=" << v << "\n";
  }
  for (auto& [name, t] : ck.tensors) {
    if (name.find(' ') != std::string::npos || name.find('\n') != std::string::npos)
      fail("checkpoint: tensor name may not contain spaces: " + name);
    out << "tensor " << name << " " << t.rank();
    for (size_t d : t.shape) out << " " << d;
    out << "\n";
    for (size_t i = 0; i < t.size(); ++i) {
      if (i) out << " ";
      out << format_double(t.data[i]);
    }
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_file(path, serialize_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "clprobe-checkpoint v1")
    fail("checkpoint: bad header in " + path);

  Checkpoint ck;
  if (!std::getline(in, line)) fail("checkpoint: truncated config header");
  {
    std::istringstream h(line);
    std::string word;
    size_t n = 0;
    if (!(h >> word >> n) || word != "config") fail("checkpoint: expected config count, got: " + line);
    for (size_t i = 0; i < n; ++i) {
      if (!std::getline(in, line)) fail("checkpoint: truncated config section");
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("checkpoint: bad config line: " + line);
      ck.config[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  while (std::getline(in, line)) {
    if (line == "end") return ck;
    std::istringstream h(line);
    std::string word, name;
    size_t rank = 0;
    if (!(h >> word >> name >> rank) || word != "tensor")
      fail("checkpoint: expected tensor header, got: " + line);
    std::vector<size_t> shape(rank);
    for (size_t d = 0; d < rank; ++d)
      if (!(h >> shape[d])) fail("checkpoint: bad shape for tensor " + name);
    size_t n = Tensor::count(shape);
    if (!std::getline(in, line)) fail("checkpoint: truncated values for tensor " + name);
    std::istringstream vs(line);
    std::vector<double> data(n);
    for (size_t i = 0; i < n; ++i)
      if (!(vs >> data[i])) fail("checkpoint: too few values for tensor " + name);
    double extra;
    if (vs >> extra) fail("checkpoint: too many values for tensor " + name);
    ck.tensors.emplace_back(name, Tensor{shape, std::move(data)});
  }
  fail("checkpoint: missing end marker in " + path);
}

// Dump every parameter of a store, in creation order.
inline Checkpoint checkpoint_from_store(const ParamStore& store,
                                        std::map<std::string, std::string> config = {}) {
  Checkpoint ck;
  ck.config = std::move(config);
  for (const Parameter* p : store.all()) ck.tensors.emplace_back(p->name, p->value);
  return ck;
}

// Copy tensor values into existing parameters (shapes must match).
inline void load_into_store(const Checkpoint& ck, ParamStore& store) {
  for (auto& [name, t] : ck.tensors) {
    Parameter& p = store.get(name);
    if (!p.value.same_shape(t))
      fail("checkpoint: shape mismatch for " + name + ": store " + p.value.shape_str() +
           " vs file " + t.shape_str());
    p.value = t;
  }
}

}  // namespace clprobe::ndiff
