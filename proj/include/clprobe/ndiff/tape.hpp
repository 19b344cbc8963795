#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "clprobe/ndiff/tensor.hpp"

namespace clprobe::ndiff {

// A named trainable tensor. Gradients accumulate into `grad` during
// Tape::backward for every tape that references the parameter.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor::zeros(value.shape);
  }
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Record of primitive applications in execution order (which is already a
// topological order); backward walks it once in reverse.
class Tape {
 public:
  struct Var {
    int id = -1;
  };

  Var constant(Tensor v) { return push(std::move(v), {}, nullptr, nullptr); }

  Var parameter(Parameter& p) {
    Var v = push(p.value, {}, nullptr, &p);
    return v;
  }

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }

  // ---- primitives ----

  Var matmul(Var a, Var b) {
    const Tensor &A = val(a), &B = val(b);
    if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0])
      shape_error("matmul", A, B);
    size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
    Tensor C = Tensor::zeros({m, n});
    for (size_t i = 0; i < m; ++i)
      for (size_t p = 0; p < k; ++p) {
        double av = A.at(i, p);
        if (av == 0.0) continue;
        const double* brow = &B.data[p * n];
        double* crow = &C.data[i * n];
        for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    return push(std::move(C), {a, b}, [m, k, n](Tape& t, const Node& node) {
      const Tensor& G = node.grad;
      const Tensor& A2 = t.val(node.parents[0]);
      const Tensor& B2 = t.val(node.parents[1]);
      Tensor& dA = t.grad_of(node.parents[0]);
      Tensor& dB = t.grad_of(node.parents[1]);
      // dA = G * B^T ; dB = A^T * G
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
          double g = G.at(i, j);
          if (g == 0.0) continue;
          for (size_t p = 0; p < k; ++p) {
            dA.at(i, p) += g * B2.at(p, j);
            dB.at(p, j) += A2.at(i, p) * g;
          }
        }
    });
  }

  Var add(Var a, Var b) { return ew(a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0); }
  Var sub(Var a, Var b) { return ew(a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0); }

  Var mul(Var a, Var b) {
    const Tensor &A = val(a), &B = val(b);
    if (!A.same_shape(B)) shape_error("mul", A, B);
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
    return push(std::move(C), {a, b}, [](Tape& t, const Node& node) {
      const Tensor& A2 = t.val(node.parents[0]);
      const Tensor& B2 = t.val(node.parents[1]);
      Tensor& dA = t.grad_of(node.parents[0]);
      Tensor& dB = t.grad_of(node.parents[1]);
      for (size_t i = 0; i < node.grad.size(); ++i) {
        dA.data[i] += node.grad.data[i] * B2.data[i];
        dB.data[i] += node.grad.data[i] * A2.data[i];
      }
    });
  }

  // |x| with subgradient 0 at x = 0.
  Var abs(Var a) {
    Tensor C = val(a);
    for (double& v : C.data) v = std::fabs(v);
    return push(std::move(C), {a}, [](Tape& t, const Node& node) {
      const Tensor& A2 = t.val(node.parents[0]);
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) {
        double s = A2.data[i] > 0 ? 1.0 : (A2.data[i] < 0 ? -1.0 : 0.0);
        dA.data[i] += node.grad.data[i] * s;
      }
    });
  }

  Var sigmoid(Var a) {
    Tensor C = val(a);
    for (double& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(C), {a}, [](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) {
        double y = node.value.data[i];
        dA.data[i] += node.grad.data[i] * y * (1.0 - y);
      }
    });
  }

  Var tanh(Var a) {
    Tensor C = val(a);
    for (double& v : C.data) v = std::tanh(v);
    return push(std::move(C), {a}, [](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) {
        double y = node.value.data[i];
        dA.data[i] += node.grad.data[i] * (1.0 - y * y);
      }
    });
  }

  // Concatenate along axis 0 (rows / vector entries) or axis 1 (columns).
  Var concat(const std::vector<Var>& parts, size_t axis = 0) {
    if (parts.empty()) fail("concat: no inputs");
    const Tensor& first = val(parts[0]);
    if (axis > 1 || axis >= first.rank()) fail("concat: bad axis for " + first.shape_str());
    std::vector<size_t> shape = first.shape;
    size_t total = first.shape[axis];
    for (size_t i = 1; i < parts.size(); ++i) {
      const Tensor& t = val(parts[i]);
      if (t.rank() != first.rank()) shape_error("concat", first, t);
      for (size_t d = 0; d < shape.size(); ++d)
        if (d != axis && t.shape[d] != shape[d]) shape_error("concat", first, t);
      total += t.shape[axis];
    }
    shape[axis] = total;
    Tensor C = Tensor::zeros(shape);
    std::vector<size_t> offsets;
    if (axis == 0) {
      size_t off = 0;
      for (Var p : parts) {
        const Tensor& t = val(p);
        offsets.push_back(off);
        std::copy(t.data.begin(), t.data.end(), C.data.begin() + static_cast<long>(off));
        off += t.size();
      }
    } else {
      size_t rows = shape[0], coff = 0;
      for (Var p : parts) {
        const Tensor& t = val(p);
        offsets.push_back(coff);
        for (size_t r = 0; r < rows; ++r)
          for (size_t c = 0; c < t.shape[1]; ++c) C.at(r, coff + c) = t.at(r, c);
        coff += t.shape[1];
      }
    }
    return push(std::move(C), parts, [axis, offsets](Tape& t, const Node& node) {
      for (size_t i = 0; i < node.parents.size(); ++i) {
        Tensor& dP = t.grad_of(node.parents[i]);
        const Tensor& pv = t.val(node.parents[i]);
        if (axis == 0) {
          for (size_t j = 0; j < pv.size(); ++j) dP.data[j] += node.grad.data[offsets[i] + j];
        } else {
          for (size_t r = 0; r < pv.shape[0]; ++r)
            for (size_t c = 0; c < pv.shape[1]; ++c)
              dP.at(r, c) += node.grad.at(r, offsets[i] + c);
        }
      }
    });
  }

  // Pure metadata change; element count must match.
  Var reshape(Var a, std::vector<size_t> shape) {
    const Tensor& A = val(a);
    if (Tensor::count(shape) != A.size())
      fail("reshape: cannot view " + A.shape_str() + " with new element count");
    Tensor C{shape, A.data};
    return push(std::move(C), {a}, [](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) dA.data[i] += node.grad.data[i];
    });
  }

  // Gather rows of a matrix (embedding / state selection). Output is ids x D.
  Var rows(Var m, std::vector<size_t> ids) {
    const Tensor& M = val(m);
    if (M.rank() != 2) fail("rows: expected matrix, got " + M.shape_str());
    for (size_t id : ids)
      if (id >= M.shape[0]) fail("rows: index out of range for " + M.shape_str());
    Tensor C = Tensor::zeros({ids.size(), M.shape[1]});
    for (size_t i = 0; i < ids.size(); ++i)
      for (size_t c = 0; c < M.shape[1]; ++c) C.at(i, c) = M.at(ids[i], c);
    return push(std::move(C), {m}, [ids](Tape& t, const Node& node) {
      Tensor& dM = t.grad_of(node.parents[0]);
      size_t cols = node.grad.shape[1];
      for (size_t i = 0; i < ids.size(); ++i)
        for (size_t c = 0; c < cols; ++c) dM.at(ids[i], c) += node.grad.at(i, c);
    });
  }

  // Column-wise max over the time axis (axis 0) of a T x D matrix.
  // Ties break to the earliest timestep; gradient flows only to the argmax.
  Var max_over_time(Var m) {
    const Tensor& M = val(m);
    if (M.rank() != 2 || M.shape[0] == 0) fail("max_over_time: expected nonempty matrix, got " + M.shape_str());
    size_t T = M.shape[0], D = M.shape[1];
    Tensor C = Tensor::zeros({D});
    std::vector<size_t> arg(D, 0);
    for (size_t d = 0; d < D; ++d) {
      double best = M.at(0, d);
      for (size_t t = 1; t < T; ++t)
        if (M.at(t, d) > best) {
          best = M.at(t, d);
          arg[d] = t;
        }
      C.data[d] = best;
    }
    return push(std::move(C), {m}, [arg](Tape& t, const Node& node) {
      Tensor& dM = t.grad_of(node.parents[0]);
      for (size_t d = 0; d < arg.size(); ++d) dM.at(arg[d], d) += node.grad.data[d];
    });
  }

  Var mean_over_time(Var m) {
    const Tensor& M = val(m);
    if (M.rank() != 2 || M.shape[0] == 0) fail("mean_over_time: expected nonempty matrix, got " + M.shape_str());
    size_t T = M.shape[0], D = M.shape[1];
    Tensor C = Tensor::zeros({D});
    for (size_t t = 0; t < T; ++t)
      for (size_t d = 0; d < D; ++d) C.data[d] += M.at(t, d);
    for (double& v : C.data) v /= static_cast<double>(T);
    return push(std::move(C), {m}, [T](Tape& t, const Node& node) {
      Tensor& dM = t.grad_of(node.parents[0]);
      size_t D = node.grad.size();
      for (size_t ti = 0; ti < T; ++ti)
        for (size_t d = 0; d < D; ++d) dM.at(ti, d) += node.grad.data[d] / static_cast<double>(T);
    });
  }

  // Column-wise softmax over the time axis of a T x H matrix (one
  // distribution over timesteps per column). Used by the attention encoders.
  Var softmax_time(Var m) {
    const Tensor& M = val(m);
    if (M.rank() != 2 || M.shape[0] == 0) fail("softmax_time: expected nonempty matrix, got " + M.shape_str());
    size_t T = M.shape[0], H = M.shape[1];
    Tensor C = Tensor::zeros({T, H});
    for (size_t h = 0; h < H; ++h) {
      double mx = M.at(0, h);
      for (size_t t = 1; t < T; ++t) mx = std::max(mx, M.at(t, h));
      double z = 0;
      for (size_t t = 0; t < T; ++t) z += std::exp(M.at(t, h) - mx);
      for (size_t t = 0; t < T; ++t) C.at(t, h) = std::exp(M.at(t, h) - mx) / z;
    }
    return push(std::move(C), {m}, [T, H](Tape& t, const Node& node) {
      Tensor& dM = t.grad_of(node.parents[0]);
      for (size_t h = 0; h < H; ++h) {
        double dot = 0;
        for (size_t ti = 0; ti < T; ++ti) dot += node.grad.at(ti, h) * node.value.at(ti, h);
        for (size_t ti = 0; ti < T; ++ti)
          dM.at(ti, h) += node.value.at(ti, h) * (node.grad.at(ti, h) - dot);
      }
    });
  }

  // Scale row t of a T x D matrix by w[t].
  Var row_scale(Var m, Var w) {
    const Tensor &M = val(m), &W = val(w);
    if (M.rank() != 2 || W.rank() != 1 || W.shape[0] != M.shape[0]) shape_error("row_scale", M, W);
    size_t T = M.shape[0], D = M.shape[1];
    Tensor C = Tensor::zeros({T, D});
    for (size_t t = 0; t < T; ++t)
      for (size_t d = 0; d < D; ++d) C.at(t, d) = M.at(t, d) * W.data[t];
    return push(std::move(C), {m, w}, [T, D](Tape& t, const Node& node) {
      const Tensor& M2 = t.val(node.parents[0]);
      const Tensor& W2 = t.val(node.parents[1]);
      Tensor& dM = t.grad_of(node.parents[0]);
      Tensor& dW = t.grad_of(node.parents[1]);
      for (size_t ti = 0; ti < T; ++ti)
        for (size_t d = 0; d < D; ++d) {
          dM.at(ti, d) += node.grad.at(ti, d) * W2.data[ti];
          dW.data[ti] += node.grad.at(ti, d) * M2.at(ti, d);
        }
    });
  }

  // Fused softmax + cross-entropy against a single gold class. Returns a
  // scalar; the combined gradient (softmax - onehot) avoids cancellation.
  Var softmax_cross_entropy(Var logits, size_t label) {
    const Tensor& Z = val(logits);
    if (Z.rank() != 1 || label >= Z.size())
      fail("softmax_cross_entropy: bad logits " + Z.shape_str() + " or label " + std::to_string(label));
    double mx = *std::max_element(Z.data.begin(), Z.data.end());
    double sum = 0;
    for (double v : Z.data) sum += std::exp(v - mx);
    double loss = std::log(sum) + mx - Z.data[label];
    std::vector<double> probs(Z.size());
    for (size_t i = 0; i < Z.size(); ++i) probs[i] = std::exp(Z.data[i] - mx) / sum;
    return push(Tensor{{1}, {loss}}, {logits}, [probs, label](Tape& t, const Node& node) {
      Tensor& dZ = t.grad_of(node.parents[0]);
      double g = node.grad.data[0];
      for (size_t i = 0; i < probs.size(); ++i)
        dZ.data[i] += g * (probs[i] - (i == label ? 1.0 : 0.0));
    });
  }

  // Unsquared Euclidean distance ||x - y||_2 of two same-shape tensors.
  // Subgradient at x = y is zero.
  Var euclidean_distance(Var x, Var y) {
    const Tensor &X = val(x), &Y = val(y);
    if (!X.same_shape(Y)) shape_error("euclidean_distance", X, Y);
    double s = 0;
    for (size_t i = 0; i < X.size(); ++i) {
      double d = X.data[i] - Y.data[i];
      s += d * d;
    }
    double dist = std::sqrt(s);
    return push(Tensor{{1}, {dist}}, {x, y}, [dist](Tape& t, const Node& node) {
      if (dist == 0.0) return;
      const Tensor& X2 = t.val(node.parents[0]);
      const Tensor& Y2 = t.val(node.parents[1]);
      Tensor& dX = t.grad_of(node.parents[0]);
      Tensor& dY = t.grad_of(node.parents[1]);
      double g = node.grad.data[0] / dist;
      for (size_t i = 0; i < X2.size(); ++i) {
        double d = (X2.data[i] - Y2.data[i]) * g;
        dX.data[i] += d;
        dY.data[i] -= d;
      }
    });
  }

  // Inverted dropout: in train mode each entry is kept with probability 1-p
  // and scaled by 1/(1-p), so eval mode is the identity (no rescaling).
  Var dropout(Var a, double p, bool train, Rng& rng) {
    if (p < 0.0 || p >= 1.0) fail("dropout: rate must be in [0,1)");
    if (!train || p == 0.0) return a;
    const Tensor& A = val(a);
    std::vector<double> mask(A.size());
    double scale = 1.0 / (1.0 - p);
    for (double& m : mask) m = rng.uniform() < p ? 0.0 : scale;
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.data[i] *= mask[i];
    return push(std::move(C), {a}, [mask](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) dA.data[i] += node.grad.data[i] * mask[i];
    });
  }

  Var scale(Var a, double k) {
    Tensor C = val(a);
    for (double& v : C.data) v *= k;
    return push(std::move(C), {a}, [k](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      for (size_t i = 0; i < node.grad.size(); ++i) dA.data[i] += node.grad.data[i] * k;
    });
  }

  // ---- backward ----

  // Seeds d(loss)/d(loss) = 1 and walks the records in reverse creation
  // order, visiting each exactly once. Accumulates into Parameter::grad for
  // every parameter leaf.
  void backward(Var loss) {
    Node& ln = nodes_[check(loss)];
    if (ln.value.size() != 1) fail("backward: loss must be scalar, got " + ln.value.shape_str());
    for (Node& n : nodes_) n.grad = Tensor::zeros(n.value.shape);
    ln.grad.data[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward_fn) n.backward_fn(*this, n);
      if (n.param) {
        for (size_t j = 0; j < n.grad.size(); ++j) n.param->grad.data[j] += n.grad.data[j];
      }
    }
  }

  Tensor gradient(Var v) const { return nodes_[check(v)].grad; }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Var> parents;
    std::function<void(Tape&, const Node&)> backward_fn;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;

  int check(Var v) const {
    if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) fail("Tape: invalid var handle");
    return v.id;
  }

  const Tensor& val(Var v) const { return nodes_[check(v)].value; }
  Tensor& grad_of(Var v) { return nodes_[check(v)].grad; }

  Var push(Tensor value, std::vector<Var> parents,
           std::function<void(Tape&, const Node&)> fn, Parameter* param = nullptr) {
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.backward_fn = std::move(fn);
    n.param = param;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  template <class F>
  Var ew(Var a, Var b, const char* name, F op, double da, double db) {
    const Tensor &A = val(a), &B = val(b);
    if (!A.same_shape(B)) shape_error(name, A, B);
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.data[i] = op(A.data[i], B.data[i]);
    return push(std::move(C), {a, b}, [da, db](Tape& t, const Node& node) {
      Tensor& dA = t.grad_of(node.parents[0]);
      Tensor& dB = t.grad_of(node.parents[1]);
      for (size_t i = 0; i < node.grad.size(); ++i) {
        dA.data[i] += node.grad.data[i] * da;
        dB.data[i] += node.grad.data[i] * db;
      }
    });
  }

  [[noreturn]] static void shape_error(const char* prim, const Tensor& a, const Tensor& b) {
    fail(std::string(prim) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
};

using Var = Tape::Var;

// Plain softmax on a value tensor (no tape). Training paths use the fused
// softmax_cross_entropy; this exists for reporting output probabilities.
inline Tensor softmax(const Tensor& logits) {
  Tensor out = logits;
  double mx = *std::max_element(out.data.begin(), out.data.end());
  double sum = 0;
  for (double& v : out.data) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.data) v /= sum;
  return out;
}

}  // namespace clprobe::ndiff
