// Copyright 2026 The mpu-verify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#pragma once

#include "mpu/core.hpp"

namespace mpu {

enum class SpanField { kReal, kComplex };

// Incrementally built orthonormal basis of a subspace of C^n, viewed either
// as a complex vector space or as a real one (real linear combinations of
// complex vectors; used for the Hermitian-closed generator spans, whose
// natural coefficient field is R). Modified Gram-Schmidt with one
// reorthogonalization pass; a candidate is admitted when its residual
// exceeds rel_tol times its own norm, and ignored entirely when its norm is
// below zero_floor (treated as the zero vector).
class SpanBasis {
 public:
  SpanBasis(SpanField field, double rel_tol = 1e-8, double zero_floor = 1e-12)
      : field_(field), rel_tol_(rel_tol), zero_floor_(zero_floor) {}

  std::int64_t dim() const { return static_cast<std::int64_t>(basis_.size()); }
  const std::vector<Vec>& vectors() const { return basis_; }

  // Returns true when the span grew.
  bool add(const Vec& candidate) {
    const double n0 = candidate.norm();
    if (n0 <= zero_floor_) return false;
    Vec v = candidate;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis_) v -= coeff(b, v) * b;
    if (v.norm() <= rel_tol_ * n0) return false;
    basis_.push_back(v / v.norm());
    return true;
  }

  // Residual norm of the candidate after projecting onto the span.
  double residual(const Vec& candidate) const {
    Vec v = candidate;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis_) v -= coeff(b, v) * b;
    return v.norm();
  }

  bool contains(const Vec& candidate) const {
    const double n0 = candidate.norm();
    if (n0 <= zero_floor_) return true;
    return residual(candidate) <= rel_tol_ * n0;
  }

 private:
  cd coeff(const Vec& b, const Vec& v) const {
    const cd c = b.dot(v);  // conjugates b
    return field_ == SpanField::kComplex ? c : cd(c.real(), 0.0);
  }

  SpanField field_;
  double rel_tol_;
  double zero_floor_;
  std::vector<Vec> basis_;
};

// Matrix-space span helpers (Frobenius inner product via flattening).
inline Vec flatten(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unflatten(const Vec& v, std::int64_t rows, std::int64_t cols) {
  if (v.size() != rows * cols) throw ArgError("unflatten: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

struct AlgebraSpan {
  std::vector<Mat> basis;      // orthonormal (Frobenius) basis of the algebra
  std::int64_t closure_depth;  // word length at which the span stabilized
  bool complete;               // false when the dimension cap stopped growth
};

// Complex algebra generated by `gens` inside M_n, optionally with the
// identity adjoined. Closes the span under left multiplication by the
// generators; depth counts multiplications. `max_dim` caps the basis size
// (default n^2, the ambient dimension).
inline AlgebraSpan generate_algebra(const std::vector<Mat>& gens,
                                    bool include_identity,
                                    double span_tol = 1e-8,
                                    std::int64_t max_dim = -1) {
  if (gens.empty() && !include_identity)
    throw ArgError("generate_algebra: no generators");
  const std::int64_t n = gens.empty() ? 0 : gens[0].rows();
  for (const Mat& g : gens)
    if (g.rows() != n || g.cols() != n)
      throw ArgError("generate_algebra: generators must be square, same dim");
  if (max_dim < 0) max_dim = n * n;
  SpanBasis span(SpanField::kComplex, span_tol);
  std::vector<Mat> fresh;
  auto admit = [&](const Mat& m) {
    if (span.add(flatten(m))) fresh.push_back(m);
  };
  if (include_identity) admit(Mat::Identity(n, n));
  for (const Mat& g : gens) admit(g);
  std::int64_t depth = 1;
  AlgebraSpan out;
  out.complete = true;
  while (!fresh.empty() && span.dim() < max_dim) {
    std::vector<Mat> last;
    last.swap(fresh);
    for (const Mat& g : gens)
      for (const Mat& m : last) admit(g * m);
    if (!fresh.empty()) ++depth;
  }
  // A span that fills all of M_n is closed no matter how it got there; only
  // a cap below that can cut the closure short.
  if (!fresh.empty() && span.dim() < n * n) out.complete = false;
  out.closure_depth = depth;
  for (const Vec& v : span.vectors()) out.basis.push_back(unflatten(v, n, n));
  return out;
}

// Commutant of a matrix set inside M_n: all X with X M = M X. Computed as
// the kernel of the stacked Sylvester maps, via SVD.
inline std::vector<Mat> commutant(const std::vector<Mat>& mats, std::int64_t n,
                                  double rank_tol = 1e-10) {
  for (const Mat& m : mats)
    if (m.rows() != n || m.cols() != n)
      throw ArgError("commutant: dim mismatch");
  if (mats.empty()) {
    std::vector<Mat> all;
    for (std::int64_t i = 0; i < n * n; ++i) {
      Vec e = Vec::Zero(n * n);
      e(i) = 1.0;
      all.push_back(unflatten(e, n, n));
    }
    return all;
  }
  // vec is column-major (Eigen default): vec(AXB) = (B^T kron A) vec(X),
  // so XM - MX = 0 reads (M^T kron I - I kron M) vec(X) = 0.
  const std::int64_t nn = n * n;
  Mat k(static_cast<std::int64_t>(mats.size()) * nn, nn);
  const Mat id = Mat::Identity(n, n);
  for (std::size_t a = 0; a < mats.size(); ++a)
    k.middleRows(static_cast<std::int64_t>(a) * nn, nn) =
        kron(mats[a].transpose(), id) - kron(id, mats[a]);
  Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cut = rank_tol * std::max(smax, 1.0) * std::max(k.rows(), k.cols());
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < nn; ++i) {
    const double sv = i < s.size() ? s(i) : 0.0;
    if (sv <= cut) {
      Vec v = svd.matrixV().col(i);
      out.push_back(Eigen::Map<const Mat>(v.data(), n, n));
    }
  }
  return out;
}

}  // namespace mpu
