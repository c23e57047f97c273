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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mpu {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

// Default seed for every randomized routine in the toolkit. All draws go
// through std::mt19937_64 so runs are reproducible across platforms.
inline constexpr std::uint64_t kDefaultSeed = 0xA11CEull;

// Reports embed this so result files can be traced to the code that made
// them.
inline constexpr const char* kToolkitVersion = "0.1.0";

struct Tolerances {
  double check = 1e-10;      // residual bound for pass/fail verdicts
  double span = 1e-8;        // relative residual admitting a span candidate
  double rank = 1e-10;       // relative singular value cutoff for rank
  double cluster = 1e-8;     // relative eigenvalue clustering width
  double cond_limit = 1e8;   // conditioning guard for basis changes
};

// Thrown on malformed inputs (bad dims, unreadable files, contract misuse).
struct ArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a precondition of a numerical routine fails on valid input
// (e.g. a completion that is not trace preserving).
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an algorithm cannot proceed reliably (ill conditioning,
// failed convergence after retries).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a dense operation would exceed the configured size cap.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense materialization guard: dims beyond this need an explicit opt-in.
inline constexpr std::int64_t kDenseCap = 4096;

inline std::complex<double> complex_gauss(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

inline Mat random_complex_matrix(std::int64_t rows, std::int64_t cols,
                                 std::mt19937_64& rng) {
  Mat m(rows, cols);
  for (std::int64_t j = 0; j < cols; ++j)
    for (std::int64_t i = 0; i < rows; ++i) m(i, j) = complex_gauss(rng);
  return m;
}

// Haar-distributed unitary via QR with the R-diagonal phase fix.
inline Mat random_unitary(std::int64_t n, std::mt19937_64& rng) {
  Mat z = random_complex_matrix(n, n, rng) / std::sqrt(2.0);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::int64_t i = 0; i < n; ++i) {
    const cd d = r(i, i);
    q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : cd(1.0, 0.0);
  }
  return q;
}

// Numerical rank of a singular value profile: sigma > tol * sigma_max * dim.
inline std::int64_t numerical_rank(const RVec& sigma, std::int64_t max_dim,
                                   double rank_tol) {
  if (sigma.size() == 0) return 0;
  const double cut = rank_tol * sigma(0) * static_cast<double>(max_dim);
  std::int64_t r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cut) ++r;
  return r;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Doubled-space vector <-> bond matrix. Flat index is m'*D + m with m' the
// conjugate layer: devectorize(kron(v.conjugate(), v)) == v * v.adjoint(),
// which keeps transfer images of density-like vectors Hermitian PSD.
inline Mat devectorize_bond(const Vec& v, std::int64_t d) {
  if (v.size() != d * d) throw ArgError("devectorize_bond: size mismatch");
  return Eigen::Map<const Mat>(v.data(), d, d);
}

inline Vec vectorize_bond(const Mat& m) {
  if (m.rows() != m.cols()) throw ArgError("vectorize_bond: square required");
  return Eigen::Map<const Vec>(m.data(), m.size());
}

// Square root, support and rank of a positive semidefinite matrix. Rejects
// inputs that are not Hermitian PSD within `tol` instead of silently
// clamping large negative weight.
struct PsdRoot {
  Mat sqrt;      // principal square root, same dims as the input
  Mat support;   // isometry onto the support, dim x rank columns
  RVec eigs;     // eigenvalues, ascending
  std::int64_t rank = 0;
};

inline PsdRoot psd_root(const Mat& rho, double tol = 1e-10) {
  if (rho.rows() != rho.cols()) throw ArgError("psd_root: square required");
  if ((rho - rho.adjoint()).norm() > tol * std::max(1.0, rho.norm()))
    throw ArgError("psd_root: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  PsdRoot out;
  out.eigs = es.eigenvalues();
  const double scale = std::max(1.0, out.eigs.cwiseAbs().maxCoeff());
  if (out.eigs(0) < -tol * scale)
    throw ArgError("psd_root: input has a negative eigenvalue");
  const std::int64_t n = rho.rows();
  RVec clamped = out.eigs.cwiseMax(0.0);
  out.sqrt = es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() *
             es.eigenvectors().adjoint();
  std::vector<std::int64_t> keep;
  for (std::int64_t i = 0; i < n; ++i)
    if (clamped(i) > tol * scale) keep.push_back(i);
  out.rank = static_cast<std::int64_t>(keep.size());
  out.support = Mat(n, out.rank);
  for (std::int64_t c = 0; c < out.rank; ++c)
    out.support.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace mpu
