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

#include "mpu/span.hpp"
#include "mpu/transfer.hpp"

namespace mpu {

// ---------------------------------------------------------------------------
// Exhaustive string test
// ---------------------------------------------------------------------------

struct StringCheckReport {
  bool pass = false;
  double identity_deviation = 0;   // |Tr(B E_N ... E_1) - 1|
  double max_string_violation = 0;  // max |Tr(B S-string)| over others
  std::int64_t strings_checked = 0;
  std::vector<std::int64_t> worst_string;  // generator index per site, 0 = E
};

// Checks every generator string: the all-E string must close to 1, every
// string containing at least one S_alpha must close to 0. Exponential in N;
// guarded by `cap` on the string count.
inline StringCheckReport check_strings_exhaustive(
    const MpoChain& chain, double tol = 1e-10,
    std::int64_t cap = 1 << 22) {
  chain.validate();
  MpoChain c = chain;
  std::vector<TransferFamily> fam;
  fam.reserve(c.sites.size());
  double strings = 1;
  for (const auto& s : c.sites) {
    fam.push_back(local_transfer(s));
    strings *= static_cast<double>(s.d_in * s.d_in);
  }
  if (strings > static_cast<double>(cap))
    throw ResourceError("check_strings_exhaustive: " +
                        std::to_string(static_cast<std::int64_t>(strings)) +
                        " strings exceed cap");
  const Mat b = doubled_boundary(boundary_matrix(c));
  StringCheckReport rep;
  const std::int64_t n = c.length();
  std::vector<std::int64_t> choice(n, 0);
  // Depth-first accumulation of partial products from site 1 upward.
  // stack[k] = generator_{choice[k]} at site k+1 applied to stack[k-1].
  std::vector<Mat> stack(n);
  std::int64_t k = 0;
  auto gen_count = [&](std::int64_t site) {
    return 1 + static_cast<std::int64_t>(fam[site].s.size());
  };
  auto gen = [&](std::int64_t site, std::int64_t g) -> const Mat& {
    return g == 0 ? fam[site].e : fam[site].s[g - 1];
  };
  while (true) {
    // Fill downward to the last site with current choices.
    while (k < n) {
      const Mat& g = gen(k, choice[k]);
      stack[k] = (k == 0) ? g : Mat(g * stack[k - 1]);
      ++k;
    }
    // Evaluate the closed string.
    const cd val = (b * stack[n - 1]).trace();
    bool any_s = false;
    for (auto g : choice)
      if (g != 0) any_s = true;
    ++rep.strings_checked;
    const double dev = any_s ? std::abs(val) : std::abs(val - 1.0);
    if (any_s) {
      if (dev > rep.max_string_violation) {
        rep.max_string_violation = dev;
        rep.worst_string = choice;
      }
    } else {
      rep.identity_deviation = dev;
    }
    // Advance the odometer from the last site.
    std::int64_t p = n - 1;
    while (p >= 0 && choice[p] + 1 >= gen_count(p)) {
      choice[p] = 0;
      --p;
    }
    if (p < 0) break;
    ++choice[p];
    k = p;  // refill from the first changed site
  }
  rep.pass = rep.identity_deviation <= tol && rep.max_string_violation <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Bond-space recursion
// ---------------------------------------------------------------------------

struct UnitarityReport {
  bool pass = false;
  bool square = true;              // total out dim equals total in dim
  double rho_final_deviation = 0;  // |rho^(N) - 1| (scalar, absorbed chain)
  double s_final_norm = 0;         // largest closing S-functional residual
  std::vector<std::int64_t> span_dims;            // dim of the span after site k
  std::vector<std::vector<double>> rho_spectra;   // eigenvalues of rho^(k)
  std::vector<double> rho_trace_deviation;        // |Tr rho^(k) - 1|
};

// Verifies U^dagger U = 1 through the bond-space recursion: propagate the
// density-like vector rho^(k) with E and the Hermitian-closed generator span
// with {E, S_alpha}. The chain is unitary iff it is square, the final scalar
// rho^(N) equals 1 and every closing S-functional vanishes. Polynomial cost,
// no dense materialization.
inline UnitarityReport check_unitarity_recursive(const MpoChain& chain,
                                                 const Tolerances& tol = {}) {
  chain.validate();
  MpoChain c = absorb_boundary(chain);
  const std::int64_t n = c.length();
  UnitarityReport rep;
  rep.square = (c.total_out() == c.total_in());
  Vec rho = Vec::Ones(1);
  std::vector<Vec> span_vecs;  // orthonormal basis of the generator span
  for (std::int64_t k = 0; k < n; ++k) {
    const TransferFamily f = local_transfer(c.sites[k]);
    const bool last = (k == n - 1);
    Vec rho_next = f.e * rho;
    std::vector<Vec> candidates;
    candidates.reserve(f.s.size() * (1 + span_vecs.size()) + span_vecs.size());
    for (const Mat& s : f.s) candidates.push_back(s * rho);
    for (const Vec& x : span_vecs) {
      candidates.push_back(f.e * x);
      for (const Mat& s : f.s) candidates.push_back(s * x);
    }
    if (last) {
      rep.rho_final_deviation = std::abs(rho_next(0) - cd(1, 0));
      double worst = 0;
      for (const Vec& v : candidates) worst = std::max(worst, v.norm());
      rep.s_final_norm = worst;
      rep.span_dims.push_back(worst > tol.check ? 1 : 0);
      rep.rho_spectra.push_back({rho_next(0).real()});
      rep.rho_trace_deviation.push_back(rep.rho_final_deviation);
      break;
    }
    SpanBasis span(SpanField::kReal, tol.span, tol.check);
    for (const Vec& v : candidates) span.add(v);
    span_vecs = span.vectors();
    rho = std::move(rho_next);
    rep.span_dims.push_back(static_cast<std::int64_t>(span_vecs.size()));
    // Diagnostics: spectrum and trace of the devectorized rho^(k).
    const std::int64_t dk = c.sites[k].d_left;
    Mat rho_mat = devectorize_bond(rho, dk);
    rho_mat = 0.5 * (rho_mat + rho_mat.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(rho_mat);
    std::vector<double> eigs(es.eigenvalues().data(),
                             es.eigenvalues().data() + dk);
    rep.rho_spectra.push_back(std::move(eigs));
    rep.rho_trace_deviation.push_back(std::abs(rho_mat.trace() - cd(1, 0)));
  }
  rep.pass = rep.square && rep.rho_final_deviation <= tol.check &&
             rep.s_final_norm <= tol.check;
  return rep;
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

struct CanonicalResult {
  MpoChain chain;
  std::vector<std::int64_t> bond_dims;  // D_0 .. D_N after truncation
  cd leftover;  // final contraction scalar before redistribution
};

// Right-to-left orthogonalization sweep. Afterwards every site satisfies
// (1/d_in) sum_{ij} A^{ij dagger} A^{ij} = c * identity with a common scalar
// c of modulus |leftover|^(2/N) / prod d_in^(1/N) (equal to 1 when the chain
// is unitary); ranks are truncated at the relative cutoff. The represented
// operator is preserved exactly: the leftover scalar is split as an N-th
// root per site.
inline CanonicalResult to_canonical_form(const MpoChain& chain,
                                         double rank_tol = 1e-10) {
  chain.validate();
  MpoChain c = absorb_boundary(chain);
  const std::int64_t n = c.length();
  // Pending factor between site k+1 and site k; it left-multiplies the
  // lower site's blocks because A_{k+1} A_k = U (Sigma V^H A_k).
  Mat carry;
  bool have_carry = false;
  for (std::int64_t k = n - 1; k >= 0; --k) {
    SiteTensor& s = c.sites[k];
    SiteTensor work = s;
    if (have_carry) {
      SiteTensor folded(s.d_out, s.d_in, carry.rows(), s.d_right);
      for (std::int64_t i = 0; i < s.d_out; ++i)
        for (std::int64_t j = 0; j < s.d_in; ++j)
          folded.set_block(i, j, carry * s.block(i, j));
      work = std::move(folded);
    }
    // Rows fuse (i, j, m); columns are the right bond n.
    Mat t = work.t.to_matrix({0, 1, 2}, {3});
    SvdSplit sv = svd_split(t, rank_tol);
    if (sv.rank == 0)
      throw PreconditionError("to_canonical_form: chain represents zero");
    const double scale = std::sqrt(static_cast<double>(work.d_in));
    if (k > 0) {
      SiteTensor ns(work.d_out, work.d_in, work.d_left, sv.rank);
      ns.t = DenseTensor::from_matrix(
          sv.u * scale, {work.d_out, work.d_in, work.d_left, sv.rank});
      s = std::move(ns);
      carry = sv.sigma.asDiagonal() * sv.vh;  // rank x old bond below
      have_carry = true;
    } else {
      // Leftmost step: right bond is 1; the leftover scalar would multiply
      // the whole operator, so it is redistributed below.
      const cd leftover = sv.sigma(0) * sv.vh(0, 0);
      SiteTensor ns(work.d_out, work.d_in, work.d_left, 1);
      ns.t = DenseTensor::from_matrix(sv.u * scale,
                                      {work.d_out, work.d_in, work.d_left, 1});
      s = std::move(ns);
      CanonicalResult out;
      double din_total = 1;
      for (const auto& site : c.sites) din_total *= site.d_in;
      const cd f = leftover / std::sqrt(din_total);
      const cd per_site = std::pow(f, 1.0 / static_cast<double>(n));
      for (auto& site : c.sites)
        for (auto& z : site.t.data()) z *= per_site;
      out.leftover = leftover;
      out.bond_dims.push_back(c.sites.front().d_right);
      for (const auto& site : c.sites) out.bond_dims.push_back(site.d_left);
      out.chain = std::move(c);
      return out;
    }
  }
  throw NumericError("to_canonical_form: unreachable");
}

struct CanonicalCheck {
  bool pass = false;
  std::vector<double> site_residuals;  // ||(1/d_in) sum A^dagger A - 1||_F
};

// Gauge condition test; operates on the boundary-absorbed chain.
inline CanonicalCheck check_canonical_form(const MpoChain& chain,
                                           double tol = 1e-10) {
  MpoChain c = absorb_boundary(chain);
  CanonicalCheck out;
  out.pass = true;
  for (const auto& s : c.sites) {
    Mat g = Mat::Zero(s.d_right, s.d_right);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j) {
        const Mat b = s.block(i, j);
        g += b.adjoint() * b;
      }
    g /= static_cast<double>(s.d_in);
    const double r = (g - Mat::Identity(s.d_right, s.d_right)).norm();
    out.site_residuals.push_back(r);
    if (r > tol) out.pass = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural conditions (canonical chains)
// ---------------------------------------------------------------------------

struct IsometryReport {
  std::vector<double> residuals;  // ||V_k^dagger V_k - 1|| per materialized k
  std::int64_t checked_up_to = 0;  // largest k that fit under the cap
  bool pass = true;
};

// Dense partial-product isometries V_k mapping the in-string of sites
// 1..k to (left bond, out-string); bond index most significant. For an MPU
// in canonical form every V_k is an isometry.
inline IsometryReport isometry_sequence(const MpoChain& chain,
                                        double tol = 1e-10,
                                        std::int64_t cap = kDenseCap) {
  MpoChain c = absorb_boundary(chain);
  IsometryReport rep;
  std::int64_t dims_out = 1, dims_in = 1;
  Mat acc;  // rows (m, I) with bond m most significant, cols J
  for (std::int64_t k = 0; k < c.length(); ++k) {
    const SiteTensor& s = c.sites[k];
    if (dims_out * s.d_out * s.d_left > cap || dims_in * s.d_in > cap) break;
    const std::int64_t rows_new = s.d_left * s.d_out * dims_out;
    const std::int64_t cols_new = s.d_in * dims_in;
    Mat next = Mat::Zero(rows_new, cols_new);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j) {
        const Mat blk = s.block(i, j);
        for (std::int64_t m = 0; m < s.d_left; ++m)
          for (std::int64_t r = 0; r < s.d_right; ++r) {
            const cd w = blk(m, r);
            if (w == cd(0, 0)) continue;
            if (k == 0) {
              next(m * s.d_out + i, j) += w;
            } else {
              for (std::int64_t io = 0; io < dims_out; ++io)
                for (std::int64_t jo = 0; jo < dims_in; ++jo)
                  next((m * s.d_out + i) * dims_out + io, j * dims_in + jo) +=
                      w * acc(r * dims_out + io, jo);
            }
          }
      }
    acc = std::move(next);
    dims_out *= s.d_out;
    dims_in *= s.d_in;
    // Canonical tensors already carry the sqrt(d) weight, so the raw
    // partial product is the isometry (V_N is the operator itself).
    const double res =
        (acc.adjoint() * acc - Mat::Identity(acc.cols(), acc.cols())).norm();
    rep.residuals.push_back(res);
    rep.checked_up_to = k + 1;
    if (res > tol) rep.pass = false;
  }
  return rep;
}

struct StructuralReport {
  bool canonical = false;
  bool pass = false;
  double max_trace_deviation = 0;      // rho traces and span tracelessness
  double max_hermiticity_residual = 0;
  double min_rho_eigenvalue = 0;
  IsometryReport isometries;
  UnitarityReport recursion;
};

// Necessary structural conditions satisfied by every MPU in canonical form:
// rho^(k) is a density matrix (Hermitian, PSD, unit trace), every span
// generator is traceless Hermitian, and the partial products are isometries.
inline StructuralReport check_structural_conditions(const MpoChain& chain,
                                                    const Tolerances& tol = {},
                                                    std::int64_t cap = kDenseCap) {
  MpoChain c = absorb_boundary(chain);
  StructuralReport rep;
  rep.canonical = check_canonical_form(c, 1e-8).pass;
  rep.recursion = check_unitarity_recursive(c, tol);
  rep.min_rho_eigenvalue = 1.0;
  // Re-run the recursion retaining Hermiticity and trace diagnostics.
  const std::int64_t n = c.length();
  Vec rho = Vec::Ones(1);
  std::vector<Vec> span_vecs;
  for (std::int64_t k = 0; k < n - 1; ++k) {
    const TransferFamily f = local_transfer(c.sites[k]);
    Vec rho_next = f.e * rho;
    std::vector<Vec> candidates;
    for (const Mat& s : f.s) candidates.push_back(s * rho);
    for (const Vec& x : span_vecs) {
      candidates.push_back(f.e * x);
      for (const Mat& s : f.s) candidates.push_back(s * x);
    }
    SpanBasis span(SpanField::kReal, tol.span, tol.check);
    for (const Vec& v : candidates) span.add(v);
    span_vecs = span.vectors();
    rho = std::move(rho_next);
    const std::int64_t dk = c.sites[k].d_left;
    const Mat rho_mat = devectorize_bond(rho, dk);
    rep.max_hermiticity_residual = std::max(
        rep.max_hermiticity_residual, (rho_mat - rho_mat.adjoint()).norm());
    rep.max_trace_deviation =
        std::max(rep.max_trace_deviation, std::abs(rho_mat.trace() - cd(1, 0)));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho_mat + rho_mat.adjoint()));
    rep.min_rho_eigenvalue =
        std::min(rep.min_rho_eigenvalue, es.eigenvalues().minCoeff());
    for (const Vec& x : span_vecs) {
      const Mat xm = devectorize_bond(x, dk);
      rep.max_hermiticity_residual = std::max(rep.max_hermiticity_residual,
                                              (xm - xm.adjoint()).norm());
      rep.max_trace_deviation =
          std::max(rep.max_trace_deviation, std::abs(xm.trace()));
    }
  }
  rep.isometries = isometry_sequence(c, tol.check, cap);
  rep.pass = rep.canonical && rep.recursion.pass && rep.isometries.pass &&
             rep.max_trace_deviation <= tol.check * 100 &&
             rep.max_hermiticity_residual <= tol.check * 100 &&
             rep.min_rho_eigenvalue >= -tol.check * 100;
  return rep;
}

// ---------------------------------------------------------------------------
// Completions: channel extracted from the tail of a chain
// ---------------------------------------------------------------------------

struct ChannelData {
  std::vector<Mat> kraus;  // d' x D_k each, one per fused out index
  Mat choi;                // (d'*D_k) square, PSD
  std::int64_t kraus_rank = 0;
  std::int64_t d_in = 0, d_out = 0;  // fused physical dims of the completion
  double tp_residual = 0;            // ||(1/d') sum A^dagger A - 1||
};

// Kraus family of the channel implemented by a completion chain (sites
// k+1..N). Only the left boundary vector is applied; the first site's right
// bond is the open cut feeding the channel, so the right vector is ignored.
// The completion must be left trace preserving, which holds automatically
// in canonical form.
inline ChannelData channel_from_completion(const MpoChain& completion,
                                           double tol = 1e-8,
                                           double rank_tol = 1e-10) {
  MpoChain c = absorb_left_boundary(completion);
  SiteTensor big = block_sites(c, 0, c.length());
  if (big.d_left != 1)
    throw ArgError("channel_from_completion: left bond must be 1");
  ChannelData ch;
  ch.d_in = big.d_in;
  ch.d_out = big.d_out;
  const std::int64_t dk = big.d_right;
  Mat tp = Mat::Zero(dk, dk);
  for (std::int64_t i = 0; i < big.d_out; ++i)
    for (std::int64_t j = 0; j < big.d_in; ++j) {
      const Mat b = big.block(i, j);  // 1 x dk row
      tp += b.adjoint() * b;
    }
  tp /= static_cast<double>(big.d_in);
  ch.tp_residual = (tp - Mat::Identity(dk, dk)).norm();
  if (ch.tp_residual > tol)
    throw PreconditionError(
        "channel_from_completion: completion is not left trace preserving "
        "(residual " + std::to_string(ch.tp_residual) + ")");
  const double scale = 1.0 / std::sqrt(static_cast<double>(big.d_in));
  for (std::int64_t i = 0; i < big.d_out; ++i) {
    Mat k(big.d_in, dk);
    for (std::int64_t j = 0; j < big.d_in; ++j)
      k.row(j) = big.block(i, j) * scale;
    ch.kraus.push_back(std::move(k));
  }
  const std::int64_t dim = big.d_in * dk;
  ch.choi = Mat::Zero(dim, dim);
  for (const Mat& k : ch.kraus) {
    const Vec v = flatten(k);  // column-major (j, n) pairs
    ch.choi += v * v.adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(ch.choi);
  // Rank on the eigenvalue (weight) scale: a square-root first would lift
  // O(eps * lambda_max) jitter above any reasonable relative cut.
  RVec ev = es.eigenvalues().reverse();
  ch.kraus_rank = numerical_rank(ev.cwiseMax(0.0), dim, rank_tol);
  return ch;
}

inline Mat apply_channel(const ChannelData& ch, const Mat& x) {
  Mat out = Mat::Zero(ch.d_in, ch.d_in);
  for (const Mat& k : ch.kraus) out += k * x * k.adjoint();
  return out;
}

struct ExtensionReport {
  bool pass = false;
  bool square = false;           // completion has equal fused in/out dims
  double rho_image_residual = 0;  // || T(rho) - 1/d' ||
  double span_image_residual = 0;  // max || T(X) ||
  std::int64_t kraus_rank = 0;
  std::int64_t d_prime = 0;
  bool agrees_with_recursion = false;
  double tp_residual = 0;
};

// Decides whether `completion` extends `prefix` (sites 1..k) to a unitary
// chain: the completion channel must send rho^(k) to the maximally mixed
// state, annihilate the generator span, and have Kraus rank d'. Only the
// prefix's right vector is applied; its last site's left bond is the open
// cut (the left vector is ignored), matching the ignored right vector of
// the completion. Cross-validated against the bond recursion on the
// concatenation.
inline ExtensionReport verify_extension(const MpoChain& prefix,
                                        const MpoChain& completion,
                                        const Tolerances& tol = {}) {
  MpoChain p = absorb_right_boundary(prefix);
  ExtensionReport rep;
  // Propagate rho and the span through the prefix.
  Vec rho = Vec::Ones(1);
  std::vector<Vec> span_vecs;
  for (std::int64_t k = 0; k < p.length(); ++k) {
    const TransferFamily f = local_transfer(p.sites[k]);
    Vec rho_next = f.e * rho;
    std::vector<Vec> candidates;
    for (const Mat& s : f.s) candidates.push_back(s * rho);
    for (const Vec& x : span_vecs) {
      candidates.push_back(f.e * x);
      for (const Mat& s : f.s) candidates.push_back(s * x);
    }
    SpanBasis span(SpanField::kReal, tol.span, tol.check);
    for (const Vec& v : candidates) span.add(v);
    span_vecs = span.vectors();
    rho = std::move(rho_next);
  }
  const std::int64_t dk = p.sites.back().d_left;
  ChannelData ch = channel_from_completion(completion, 1e-8, tol.rank);
  rep.tp_residual = ch.tp_residual;
  rep.square = (ch.d_in == ch.d_out);
  rep.d_prime = ch.d_in;
  rep.kraus_rank = ch.kraus_rank;
  if (ch.kraus[0].cols() != dk)
    throw ArgError("verify_extension: bond dimension mismatch");
  const Mat rho_mat = devectorize_bond(rho, dk);
  const Mat target =
      Mat::Identity(ch.d_in, ch.d_in) / static_cast<double>(ch.d_in);
  rep.rho_image_residual = (apply_channel(ch, rho_mat) - target).norm();
  for (const Vec& x : span_vecs) {
    const Mat xm = devectorize_bond(x, dk);
    rep.span_image_residual =
        std::max(rep.span_image_residual, apply_channel(ch, xm).norm());
  }
  rep.pass = rep.square && rep.kraus_rank == rep.d_prime &&
             rep.rho_image_residual <= tol.check &&
             rep.span_image_residual <= tol.check;
  // Cross-check: concatenated chain through the bond recursion.
  MpoChain full = p;
  MpoChain comp = absorb_left_boundary(completion);
  for (const auto& s : comp.sites) full.sites.push_back(s);
  full.boundary = Boundary::open(Vec::Ones(1), Vec::Ones(1));
  const UnitarityReport rec = check_unitarity_recursive(full, tol);
  rep.agrees_with_recursion = (rec.pass == rep.pass);
  return rep;
}

}  // namespace mpu
