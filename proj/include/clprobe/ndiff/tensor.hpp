#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "clprobe/common.hpp"
#include "clprobe/ndiff/rng.hpp"

namespace clprobe::ndiff {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything here.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape)) fail("Tensor: data length does not match shape");
  }

  static size_t count(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<size_t> s) {
    size_t n = count(s);
    return Tensor{std::move(s), std::vector<double>(n, 0.0)};
  }

  static Tensor full(std::vector<size_t> s, double v) {
    size_t n = count(s);
    return Tensor{std::move(s), std::vector<double>(n, v)};
  }

  static Tensor vec(std::initializer_list<double> vals) {
    return Tensor{{vals.size()}, std::vector<double>(vals)};
  }

  static Tensor uniform(std::vector<size_t> s, double lo, double hi, Rng& rng) {
    Tensor t = zeros(std::move(s));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
  }

  size_t size() const { return data.size(); }
  size_t rank() const { return shape.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t i) { return data[i]; }
  double at(size_t i) const { return data[i]; }
  double& at(size_t r, size_t c) { return data[r * shape[1] + c]; }
  double at(size_t r, size_t c) const { return data[r * shape[1] + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

inline uint64_t fingerprint(const Tensor& t) {
  uint64_t h = fnv1a_bytes(t.shape.data(), t.shape.size() * sizeof(size_t));
  return fnv1a_bytes(t.data.data(), t.data.size() * sizeof(double), h);
}

}  // namespace clprobe::ndiff
