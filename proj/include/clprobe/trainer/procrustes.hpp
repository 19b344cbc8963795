#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clprobe/encoders/embedding.hpp"
#include "clprobe/ndiff/tensor.hpp"
#include "clprobe/trainer/data.hpp"

namespace clprobe::trainer {

using ndiff::Tensor;

namespace detail {

// One-sided Jacobi: rotates column pairs of B until all are mutually
// orthogonal, accumulating the rotations in V. Then B = U * diag(sigma) with
// U's columns the normalized columns of B.
struct JacobiSvd {
  Tensor u, v;  // d x d each
};

inline JacobiSvd jacobi_svd(Tensor b, double tol = 1e-10, size_t max_sweeps = 64) {
  if (b.shape.size() != 2 || b.shape[0] != b.shape[1]) fail("jacobi_svd: square matrix required");
  size_t d = b.shape[0];
  Tensor v = Tensor::zeros({d, d});
  for (size_t i = 0; i < d; ++i) v.at(i, i) = 1.0;

  for (size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (size_t p = 0; p + 1 < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (size_t i = 0; i < d; ++i) {
          alpha += b.at(i, p) * b.at(i, p);
          beta += b.at(i, q) * b.at(i, q);
          gamma += b.at(i, p) * b.at(i, q);
        }
        if (std::fabs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (size_t i = 0; i < d; ++i) {
          double bp = b.at(i, p), bq = b.at(i, q);
          b.at(i, p) = c * bp - s * bq;
          b.at(i, q) = s * bp + c * bq;
          double vp = v.at(i, p), vq = v.at(i, q);
          v.at(i, p) = c * vp - s * vq;
          v.at(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  // Normalize columns into U; complete any null columns to an orthonormal
  // basis so U stays orthogonal under rank deficiency.
  Tensor u = Tensor::zeros({d, d});
  std::vector<bool> filled(d, false);
  for (size_t j = 0; j < d; ++j) {
    double norm = 0;
    for (size_t i = 0; i < d; ++i) norm += b.at(i, j) * b.at(i, j);
    norm = std::sqrt(norm);
    if (norm > 1e-12) {
      for (size_t i = 0; i < d; ++i) u.at(i, j) = b.at(i, j) / norm;
      filled[j] = true;
    }
  }
  for (size_t j = 0; j < d; ++j) {
    if (filled[j]) continue;
    for (size_t e = 0; e < d; ++e) {  // Gram-Schmidt a basis vector against filled columns
      std::vector<double> cand(d, 0.0);
      cand[e] = 1.0;
      for (size_t k = 0; k < d; ++k) {
        if (!filled[k]) continue;
        double dot = 0;
        for (size_t i = 0; i < d; ++i) dot += cand[i] * u.at(i, k);
        for (size_t i = 0; i < d; ++i) cand[i] -= dot * u.at(i, k);
      }
      double norm = 0;
      for (double x : cand) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.5) {
        for (size_t i = 0; i < d; ++i) u.at(i, j) = cand[i] / norm;
        filled[j] = true;
        break;
      }
    }
    if (!filled[j]) fail("jacobi_svd: failed to complete an orthonormal basis");
  }
  return {std::move(u), std::move(v)};
}

}  // namespace detail

// Orthogonal W minimizing ||XW - Y||_F via W = U V^T from the SVD of X^T Y.
inline Tensor procrustes_map(const Tensor& x, const Tensor& y) {
  if (x.shape.size() != 2 || !x.same_shape(y)) fail("procrustes_map: X and Y must match, n x d");
  size_t n = x.shape[0], d = x.shape[1];
  if (n < d)
    fail("procrustes_map: need at least d rows (" + std::to_string(n) + " < " + std::to_string(d) +
         ")");
  Tensor m = Tensor::zeros({d, d});
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < d; ++a)
      for (size_t bcol = 0; bcol < d; ++bcol) m.at(a, bcol) += x.at(i, a) * y.at(i, bcol);
  auto svd = detail::jacobi_svd(std::move(m));
  Tensor w = Tensor::zeros({d, d});
  for (size_t a = 0; a < d; ++a)
    for (size_t bcol = 0; bcol < d; ++bcol) {
      double s = 0;
      for (size_t k = 0; k < d; ++k) s += svd.u.at(a, k) * svd.v.at(bcol, k);
      w.at(a, bcol) = s;
    }
  return w;
}

inline double orthogonality_error(const Tensor& w) {
  if (w.shape.size() != 2 || w.shape[0] != w.shape[1]) fail("orthogonality_error: square required");
  size_t d = w.shape[0];
  double worst = 0;
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b) {
      double s = 0;
      for (size_t i = 0; i < d; ++i) s += w.at(i, a) * w.at(i, b);
      worst = std::max(worst, std::fabs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

inline Tensor random_orthogonal(size_t d, ndiff::Rng& rng) {
  Tensor q = Tensor::zeros({d, d});
  for (size_t j = 0; j < d; ++j) {
    std::vector<double> col(d);
    double norm = 0;
    while (true) {  // Gram-Schmidt with retry on degenerate draws
      for (auto& x : col) x = rng.normal();
      for (size_t k = 0; k < j; ++k) {
        double dot = 0;
        for (size_t i = 0; i < d; ++i) dot += col[i] * q.at(i, k);
        for (size_t i = 0; i < d; ++i) col[i] -= dot * q.at(i, k);
      }
      norm = 0;
      for (double x : col) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) break;
    }
    for (size_t i = 0; i < d; ++i) q.at(i, j) = col[i] / norm;
  }
  return q;
}

struct DictionaryMatrices {
  Tensor x, y;
  size_t skipped = 0;
};

// Stacks embedding rows for every dictionary pair covered by both tables.
inline DictionaryMatrices dictionary_matrices(
    const std::vector<std::pair<std::string, std::string>>& dict,
    const encoders::EmbeddingTable& src, const encoders::EmbeddingTable& tgt) {
  std::vector<const std::vector<double>*> xs, ys;
  size_t skipped = 0;
  for (auto& [s, t] : dict) {
    const auto* sv = src.find(s);
    const auto* tv = tgt.find(t);
    if (!sv || !tv) {
      ++skipped;
      continue;
    }
    xs.push_back(sv);
    ys.push_back(tv);
  }
  if (xs.empty()) fail("dictionary_matrices: no dictionary pair is covered by both embeddings");
  DictionaryMatrices out;
  out.skipped = skipped;
  out.x = Tensor::zeros({xs.size(), src.dim});
  out.y = Tensor::zeros({ys.size(), tgt.dim});
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = 0; j < src.dim; ++j) out.x.at(i, j) = (*xs[i])[j];
    for (size_t j = 0; j < tgt.dim; ++j) out.y.at(i, j) = (*ys[i])[j];
  }
  return out;
}

}  // namespace clprobe::trainer
