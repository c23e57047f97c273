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
//
// Constructors for the worked examples: the multi-control Z family, one- and
// two-floor staircase circuits with their converse detector, the projected
// subspace unitaries, weighted-automaton phase unitaries with their ancilla
// circuit simulator, and the Schmidt-gap obstruction apparatus. These chains
// are the corpus every verification module is tested against.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mpu/chain.hpp"
#include "mpu/core.hpp"
#include "mpu/format.hpp"
#include "mpu/oracle.hpp"
#include "mpu/tensor.hpp"
#include "mpu/unitarity.hpp"

namespace mpu {

// ---------------------------------------------------------------------------
// Multi-control Z: 1 - 2|1...1><1...1|, bond dimension 2 at every cut.
// A^{00} = |0><0|, A^{11} = 1, boundary <l| = <0|+<1|, |r> = |0> - 2|1>.

inline SiteTensor multi_control_z_site() {
  SiteTensor s(2, 2, 2, 2);
  s.t.data().assign(s.t.data().size(), cd(0, 0));
  s.at(0, 0, 0, 0) = 1.0;                      // A^{00} = |0><0|
  s.at(1, 1, 0, 0) = 1.0;                      // A^{11} = 1
  s.at(1, 1, 1, 1) = 1.0;
  return s;
}

inline MpoChain multi_control_z(std::int64_t n) {
  if (n < 2) throw ArgError("multi_control_z: needs at least two sites");
  MpoChain c;
  c.sites.assign(static_cast<std::size_t>(n), multi_control_z_site());
  Vec l(2), r(2);
  l << 1, 1;
  r << 1, -2;
  c.boundary = Boundary::open(l, r);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Control-X staircase: uniform D = 2 tensor A^{ij}_{mn} = d_{m,i} d_{n,i^j}
// with the control on the lower-numbered (right) site. Materializes to the
// CNOT cascade with the rightmost gate applied first.

inline UniformMpu control_x_staircase(std::int64_t n) {
  if (n < 2) throw ArgError("control_x_staircase: needs at least two sites");
  SiteTensor s(2, 2, 2, 2);
  s.t.data().assign(s.t.data().size(), cd(0, 0));
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 2; ++j) s.at(i, j, i, i ^ j) = 1.0;
  Mat b = Mat::Zero(2, 2);  // |0>(<0| + <1|)
  b(0, 0) = 1.0;
  b(0, 1) = 1.0;
  UniformMpu u;
  u.site = s;
  u.boundary_b = b;
  u.n_min = 2;
  u.n_max = n;
  return u;
}

// The dense counterpart: CX on wires (k, k+1), control on wire k, applied in
// increasing k order.
inline std::vector<GatePlacement> cnot_staircase_gates(std::int64_t n) {
  Mat cx = Mat::Zero(4, 4);
  cx(0, 0) = 1.0;  // |t c> -> |t^c c>, high wire is the target
  cx(3, 1) = 1.0;
  cx(2, 2) = 1.0;
  cx(1, 3) = 1.0;
  std::vector<GatePlacement> gates;
  for (std::int64_t k = 1; k < n; ++k) gates.push_back({cx, k, 2});
  return gates;
}

// ---------------------------------------------------------------------------
// Subspace product unitary: U = 1 + sum_{ij} (V_{ij} - d_{ij}) |i..i><j..j|
// as a uniform D = d^2 + 1 tensor. Bond slots: 0 carries the identity, slots
// 1..d the diagonal pairs (a,a), the rest the off-diagonal pairs (i,j) in
// row-major order; the boundary weights slot (i,j) by V_{ij} - d_{ij}.

inline std::int64_t subspace_pair_slot(std::int64_t i, std::int64_t j,
                                       std::int64_t d) {
  if (i == j) return 1 + i;
  return 1 + d + i * (d - 1) + j - (j > i ? 1 : 0);
}

inline UniformMpu subspace_product_unitary(const Mat& v, std::int64_t d) {
  if (v.rows() != d || v.cols() != d)
    throw ArgError("subspace_product_unitary: v must be d x d");
  if ((v.adjoint() * v - Mat::Identity(d, d)).norm() > 1e-10)
    throw ArgError("subspace_product_unitary: v is not unitary");
  const std::int64_t D = d * d + 1;
  SiteTensor s(d, d, D, D);
  s.t.data().assign(s.t.data().size(), cd(0, 0));
  Mat b = Mat::Zero(D, D);
  b(0, 0) = 1.0;
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j) {
      const std::int64_t slot = subspace_pair_slot(i, j, d);
      if (i == j) s.at(i, j, 0, 0) = 1.0;
      s.at(i, j, slot, slot) = 1.0;
      b(slot, slot) = v(i, j) - (i == j ? 1.0 : 0.0);
    }
  UniformMpu u;
  u.site = s;
  u.boundary_b = b;
  return u;
}

// ---------------------------------------------------------------------------
// RG subspace unitary: U = 1 + sum_{ij} (V_{ij} - d_{ij}) |Psi_i><Psi_j| with
// |Psi_i> the renormalization fixed-point states of mutually orthogonal
// density matrices rho_i (Tr sqrt(rho_i) sqrt(rho_j) = 0 for i != j; that
// inner product is <Psi_i|Psi_j> at every length, so orthogonality is what
// makes U unitary). The states are carried on their rho supports, the bond
// is one identity slot plus a doubled (ket, conjugate ket) support pair and
// the physical leg is the fused (a, b) pair of the fixed-point tensor.
// Inputs are normalized to Tr rho = 1 so that <Psi_i|Psi_i> = 1.

inline UniformMpu rg_subspace_unitary(const std::vector<Mat>& rho_list,
                                      const Mat& v, double tol = 1e-10) {
  const std::int64_t r = static_cast<std::int64_t>(rho_list.size());
  if (r == 0) throw ArgError("rg_subspace_unitary: empty rho list");
  if (v.rows() != r || v.cols() != r)
    throw ArgError("rg_subspace_unitary: v must match the rho count");
  if ((v.adjoint() * v - Mat::Identity(r, r)).norm() > 1e-10)
    throw ArgError("rg_subspace_unitary: v is not unitary");
  const std::int64_t damb = rho_list[0].rows();

  std::vector<PsdRoot> roots;
  std::vector<Mat> sq;  // normalized square roots
  for (const Mat& rho : rho_list) {
    if (rho.rows() != damb || rho.cols() != damb)
      throw ArgError("rg_subspace_unitary: mixed ambient dimensions");
    const double tr = rho.real().trace();
    if (tr <= 0) throw ArgError("rg_subspace_unitary: rho has no weight");
    PsdRoot root = psd_root(rho / tr, tol);
    // Rebuild the root on the certified support only: the clamped sqrt keeps
    // sub-tolerance eigenvalues whose sqrt-amplified noise would fail the
    // orthogonality test below on exactly rank-deficient inputs.
    sq.push_back(root.support *
                 root.eigs.tail(root.rank).cwiseSqrt().cast<cd>().asDiagonal() *
                 root.support.adjoint());
    roots.push_back(std::move(root));
  }
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = i + 1; j < r; ++j)
      if (std::abs((sq[static_cast<std::size_t>(i)] *
                    sq[static_cast<std::size_t>(j)])
                       .trace()) > tol)
        throw ArgError("rg_subspace_unitary: rho supports are not orthogonal");

  std::int64_t total = 0;
  std::vector<std::int64_t> offset(static_cast<std::size_t>(r));
  for (std::int64_t i = 0; i < r; ++i) {
    offset[static_cast<std::size_t>(i)] = total;
    total += roots[static_cast<std::size_t>(i)].rank;
  }

  // Support-compressed fixed-point tensors, stacked block-diagonally. The
  // bond leg carries the columns of sqrt(rho)^T, so the invariant bond
  // subspace is the conjugated support and the compression isometry is
  // conj(W_i): Bhat^{(a b)} = directsum_i W_i^T (sqrt(rho_i)^T e_a e_b^T)
  // conj(W_i).
  const std::int64_t d = damb * damb;
  std::vector<Mat> bhat(static_cast<std::size_t>(d));
  for (std::int64_t a = 0; a < damb; ++a)
    for (std::int64_t b = 0; b < damb; ++b) {
      Mat m = Mat::Zero(total, total);
      for (std::int64_t i = 0; i < r; ++i) {
        const PsdRoot& root = roots[static_cast<std::size_t>(i)];
        const Vec u_a = root.support.transpose() *
                        sq[static_cast<std::size_t>(i)].transpose().col(a);
        const Eigen::RowVectorXcd w_b = root.support.row(b).conjugate();
        m.block(offset[static_cast<std::size_t>(i)],
                offset[static_cast<std::size_t>(i)], root.rank, root.rank) =
            u_a * w_b;
      }
      bhat[static_cast<std::size_t>(a * damb + b)] = std::move(m);
    }

  const std::int64_t D = total * total + 1;
  SiteTensor s(d, d, D, D);
  s.t.data().assign(s.t.data().size(), cd(0, 0));
  for (std::int64_t i = 0; i < d; ++i) s.at(i, i, 0, 0) = 1.0;
  auto pair_slot = [&](std::int64_t conj_idx, std::int64_t ket_idx) {
    return 1 + conj_idx * total + ket_idx;
  };
  for (std::int64_t io = 0; io < d; ++io)
    for (std::int64_t jo = 0; jo < d; ++jo) {
      const Mat& ket = bhat[static_cast<std::size_t>(io)];
      const Mat bra = bhat[static_cast<std::size_t>(jo)].conjugate();
      for (std::int64_t mu = 0; mu < total; ++mu)
        for (std::int64_t nu = 0; nu < total; ++nu) {
          if (ket(mu, nu) == cd(0, 0)) continue;
          for (std::int64_t mup = 0; mup < total; ++mup)
            for (std::int64_t nup = 0; nup < total; ++nup) {
              const cd wv = ket(mu, nu) * bra(mup, nup);
              if (wv != cd(0, 0))
                s.at(io, jo, pair_slot(mup, mu), pair_slot(nup, nu)) = wv;
            }
        }
    }

  Mat bmat = Mat::Zero(D, D);
  bmat(0, 0) = 1.0;
  auto block_of = [&](std::int64_t idx) {
    std::int64_t blk = r - 1;
    while (offset[static_cast<std::size_t>(blk)] > idx) --blk;
    return blk;
  };
  for (std::int64_t mu = 0; mu < total; ++mu)
    for (std::int64_t mup = 0; mup < total; ++mup) {
      const std::int64_t bi = block_of(mu), bj = block_of(mup);
      const cd wv = v(bi, bj) - (bi == bj ? 1.0 : 0.0);
      if (wv != cd(0, 0)) bmat(pair_slot(mup, mu), pair_slot(mup, mu)) = wv;
    }

  UniformMpu u;
  u.site = s;
  u.boundary_b = bmat;
  return u;
}

// ---------------------------------------------------------------------------
// Staircase circuits. One floor: gates U_1..U_N on wire pairs (k, k+1) of a
// ladder of N+1 qudits, U_1 applied first. Two floors: an additional earlier
// sweep V_N..V_2 on the same pairs, applied before every U. The chain below
// contracts the drawn diagram exactly; both families come out in canonical
// form without a sweep, one floor with bond D_k = d, two floors with D = d^2.

namespace detail {
inline std::int64_t staircase_local_dim(const std::vector<Mat>& u_list) {
  if (u_list.size() < 2)
    throw ArgError("staircase: needs at least two gates");
  const std::int64_t dd = u_list[0].rows();
  const std::int64_t d = static_cast<std::int64_t>(std::llround(std::sqrt(
      static_cast<double>(dd))));
  if (d * d != dd) throw ArgError("staircase: gates must act on qudit pairs");
  for (const Mat& u : u_list)
    if (u.rows() != dd || u.cols() != dd)
      throw ArgError("staircase: inconsistent gate dimensions");
  return d;
}
}  // namespace detail

inline MpoChain staircase(const std::vector<Mat>& u_list,
                          const std::vector<Mat>& v_list = {}) {
  const std::int64_t d = detail::staircase_local_dim(u_list);
  const std::int64_t n = static_cast<std::int64_t>(u_list.size());
  MpoChain c;
  if (v_list.empty()) {
    // Site k reads U_k[(m i), (j n)]: m the left bond (wire k+1 out), i the
    // physical out on wire k, j the physical in on wire k+1, n the right
    // bond (wire k in). End sites fuse the dangling ladder wires into the
    // physical leg.
    for (std::int64_t k = 1; k <= n; ++k) {
      const Mat& u = u_list[static_cast<std::size_t>(k - 1)];
      if (k == 1) {
        SiteTensor s(d, d * d, d, 1);
        for (std::int64_t m = 0; m < d; ++m)
          for (std::int64_t i = 0; i < d; ++i)
            for (std::int64_t j = 0; j < d * d; ++j)
              s.at(i, j, m, 0) = u(m * d + i, j);
        c.sites.push_back(std::move(s));
      } else if (k == n) {
        SiteTensor s(d * d, d, 1, d);
        for (std::int64_t i = 0; i < d * d; ++i)
          for (std::int64_t j = 0; j < d; ++j)
            for (std::int64_t nn = 0; nn < d; ++nn)
              s.at(i, j, 0, nn) = u(i, j * d + nn);
        c.sites.push_back(std::move(s));
      } else {
        SiteTensor s(d, d, d, d);
        for (std::int64_t m = 0; m < d; ++m)
          for (std::int64_t i = 0; i < d; ++i)
            for (std::int64_t j = 0; j < d; ++j)
              for (std::int64_t nn = 0; nn < d; ++nn)
                s.at(i, j, m, nn) = u(m * d + i, j * d + nn);
        c.sites.push_back(std::move(s));
      }
    }
  } else {
    if (v_list.size() + 1 != u_list.size())
      throw ArgError("staircase: two-floor form needs one V per inner rung");
    for (const Mat& vv : v_list)
      if (vv.rows() != d * d || vv.cols() != d * d)
        throw ArgError("staircase: inconsistent gate dimensions");
    // Bond pairs (upper floor, lower floor) fused as mu*d + ml. The internal
    // wire between U_k and V_k is summed on the spot, which is exactly the
    // drawn contraction of the stacked diagram. The end sites trade a scalar
    // 1/sqrt(d) against sqrt(d) so every site meets the canonical weight
    // (1/d_in) sum A^dagger A = 1 while the operator is untouched.
    const double end_scale = std::sqrt(static_cast<double>(d));
    for (std::int64_t k = 1; k <= n; ++k) {
      const Mat& u = u_list[static_cast<std::size_t>(k - 1)];
      if (k == 1) {
        SiteTensor s(d, d, d * d, 1);
        for (std::int64_t mu = 0; mu < d; ++mu)
          for (std::int64_t ml = 0; ml < d; ++ml)
            for (std::int64_t i = 0; i < d; ++i)
              for (std::int64_t j = 0; j < d; ++j)
                s.at(i, j, mu * d + ml, 0) =
                    u(mu * d + i, ml * d + j) / end_scale;
        c.sites.push_back(std::move(s));
      } else if (k == n) {
        const Mat& vv = v_list[static_cast<std::size_t>(k - 2)];
        SiteTensor s(d * d, d * d, 1, d * d);
        for (std::int64_t i = 0; i < d * d; ++i)
          for (std::int64_t j = 0; j < d * d; ++j)
            for (std::int64_t nu = 0; nu < d; ++nu)
              for (std::int64_t nl = 0; nl < d; ++nl) {
                cd acc(0, 0);
                for (std::int64_t ss = 0; ss < d; ++ss)
                  acc += u(i, ss * d + nu) * vv(ss * d + nl, j);
                s.at(i, j, 0, nu * d + nl) = acc * end_scale;
              }
        c.sites.push_back(std::move(s));
      } else {
        const Mat& vv = v_list[static_cast<std::size_t>(k - 2)];
        SiteTensor s(d, d, d * d, d * d);
        for (std::int64_t mu = 0; mu < d; ++mu)
          for (std::int64_t ml = 0; ml < d; ++ml)
            for (std::int64_t i = 0; i < d; ++i)
              for (std::int64_t j = 0; j < d; ++j)
                for (std::int64_t nu = 0; nu < d; ++nu)
                  for (std::int64_t nl = 0; nl < d; ++nl) {
                    cd acc(0, 0);
                    for (std::int64_t ss = 0; ss < d; ++ss)
                      acc += u(mu * d + i, ss * d + nu) * vv(ss * d + nl, ml * d + j);
                    s.at(i, j, mu * d + ml, nu * d + nl) = acc;
                  }
        c.sites.push_back(std::move(s));
      }
    }
  }
  Vec one(1);
  one << 1;
  c.boundary = Boundary::open(one, one);
  c.validate();
  return c;
}

struct StaircaseCircuit {
  std::vector<GatePlacement> gates;
  std::vector<std::int64_t> wire_dims;
};

// The explicit circuit the staircase chain contracts to, for the dense
// oracle: V_N..V_2 first (two-floor only), then U_1..U_N.
inline StaircaseCircuit staircase_circuit(const std::vector<Mat>& u_list,
                                          const std::vector<Mat>& v_list = {}) {
  const std::int64_t d = detail::staircase_local_dim(u_list);
  const std::int64_t n = static_cast<std::int64_t>(u_list.size());
  StaircaseCircuit out;
  out.wire_dims.assign(static_cast<std::size_t>(n + 1), d);
  if (!v_list.empty()) {
    if (v_list.size() + 1 != u_list.size())
      throw ArgError("staircase_circuit: V count mismatch");
    for (std::int64_t k = n; k >= 2; --k)
      out.gates.push_back({v_list[static_cast<std::size_t>(k - 2)], k, 2});
  }
  for (std::int64_t k = 1; k <= n; ++k)
    out.gates.push_back({u_list[static_cast<std::size_t>(k - 1)], k, 2});
  return out;
}

// ---------------------------------------------------------------------------
// Staircase converse: a canonical chain whose intermediate states are all
// maximally mixed (rho^(k) = 1/D_k) with full traceless span
// (dim S^(k) = D_k^2 - 1) is a staircase; the gates are read off by the
// diagonal reshape G_k[(m i), (j n)] = A_k^{ij}_{mn} and certified unitary.

struct StaircaseDetection {
  std::vector<Mat> gates;                // G_1..G_N
  std::vector<std::int64_t> bond_dims;   // D_0..D_N of the inspected chain
  std::vector<std::int64_t> out_dims, in_dims;
  double max_gate_residual = 0;          // worst ||G^dagger G - 1||_F
};

inline std::optional<StaircaseDetection> staircase_converse_detect(
    const MpoChain& chain, const Tolerances& tol = {}) {
  chain.validate();
  MpoChain c = absorb_boundary(chain);
  if (!check_canonical_form(c, 1e-8).pass)
    c = to_canonical_form(c, tol.rank).chain;

  std::vector<std::int64_t> bonds;
  bonds.push_back(c.sites.front().d_right);  // D_0 = 1 after absorption
  for (const SiteTensor& s : c.sites) bonds.push_back(s.d_left);

  const UnitarityReport rep = check_unitarity_recursive(c, tol);
  const std::int64_t n = c.length();
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t dk = bonds[static_cast<std::size_t>(k)];
    const auto& spectrum = rep.rho_spectra[static_cast<std::size_t>(k - 1)];
    for (double lam : spectrum)
      if (std::abs(lam - 1.0 / static_cast<double>(dk)) > tol.check)
        return std::nullopt;
    if (rep.span_dims[static_cast<std::size_t>(k - 1)] != dk * dk - 1)
      return std::nullopt;
  }

  StaircaseDetection det;
  det.bond_dims = bonds;
  for (std::int64_t k = 1; k <= n; ++k) {
    const SiteTensor& s = c.sites[static_cast<std::size_t>(k - 1)];
    det.out_dims.push_back(s.d_out);
    det.in_dims.push_back(s.d_in);
    const std::int64_t rows = s.d_left * s.d_out;
    const std::int64_t cols = s.d_in * s.d_right;
    if (rows != cols) return std::nullopt;
    Mat g(rows, cols);
    for (std::int64_t m = 0; m < s.d_left; ++m)
      for (std::int64_t i = 0; i < s.d_out; ++i)
        for (std::int64_t j = 0; j < s.d_in; ++j)
          for (std::int64_t nn = 0; nn < s.d_right; ++nn)
            g(m * s.d_out + i, j * s.d_right + nn) = s.at(i, j, m, nn);
    const double res =
        (g.adjoint() * g - Mat::Identity(rows, rows)).norm();
    det.max_gate_residual = std::max(det.max_gate_residual, res);
    if (res > tol.span * std::sqrt(static_cast<double>(rows)))
      return std::nullopt;
    det.gates.push_back(std::move(g));
  }
  return det;
}

// Contracts the detected gates back into a dense operator. G_k consumes
// (d_in(k), D_{k-1}) and produces (D_k, d_out(k)); the running product keeps
// the open bond as its most significant digit, so the final result (D_N = 1)
// is exactly the represented operator.
inline Mat staircase_gate_product(const StaircaseDetection& det,
                                  std::int64_t cap = kDenseCap) {
  const std::int64_t n = static_cast<std::int64_t>(det.gates.size());
  Mat acc = det.gates[0];
  std::int64_t outs = det.out_dims[0], ins = det.in_dims[0];
  for (std::int64_t k = 2; k <= n; ++k) {
    const Mat& g = det.gates[static_cast<std::size_t>(k - 1)];
    const std::int64_t din = det.in_dims[static_cast<std::size_t>(k - 1)];
    const std::int64_t dout = det.out_dims[static_cast<std::size_t>(k - 1)];
    if (din * ins > cap || det.bond_dims[static_cast<std::size_t>(k)] * dout * outs > cap)
      throw ResourceError("staircase_gate_product: dense cap exceeded");
    acc = kron(g, Mat::Identity(outs, outs)) * kron(Mat::Identity(din, din), acc);
    outs *= dout;
    ins *= din;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Deterministic weighted finite automaton. Site k maps a bond state
// i in [0, D_k) and a letter j to f^{(k)}(i, j) in [0, D_{k-1}) with weight
// e^{i theta^{(k)}(i, j)}; reading the word j_N..j_1 from site N down
// accumulates the phase of the induced diagonal unitary.

struct AutomatonSpec {
  std::int64_t n = 0;  // sites
  std::int64_t d = 2;  // alphabet (local dimension)
  std::vector<std::int64_t> bond_dims;       // D_0..D_N, D_0 = D_N = 1
  std::vector<Eigen::MatrixXi> f;            // f[k-1]: D_k x d
  std::vector<Eigen::MatrixXd> theta;        // theta[k-1]: D_k x d
};

inline void validate(const AutomatonSpec& a) {
  if (a.n < 1 || a.d < 2) throw ArgError("automaton: need n >= 1, d >= 2");
  if (static_cast<std::int64_t>(a.bond_dims.size()) != a.n + 1)
    throw ArgError("automaton: bond dim list must have n + 1 entries");
  if (a.bond_dims.front() != 1 || a.bond_dims.back() != 1)
    throw ArgError("automaton: end bonds must be trivial");
  if (static_cast<std::int64_t>(a.f.size()) != a.n ||
      static_cast<std::int64_t>(a.theta.size()) != a.n)
    throw ArgError("automaton: need one f and theta table per site");
  for (std::int64_t k = 1; k <= a.n; ++k) {
    const auto& fk = a.f[static_cast<std::size_t>(k - 1)];
    const auto& tk = a.theta[static_cast<std::size_t>(k - 1)];
    const std::int64_t dk = a.bond_dims[static_cast<std::size_t>(k)];
    const std::int64_t dprev = a.bond_dims[static_cast<std::size_t>(k - 1)];
    if (fk.rows() != dk || fk.cols() != a.d || tk.rows() != dk ||
        tk.cols() != a.d)
      throw ArgError("automaton: table shape at site " + std::to_string(k));
    for (std::int64_t i = 0; i < dk; ++i)
      for (std::int64_t j = 0; j < a.d; ++j)
        if (fk(i, j) < 0 || fk(i, j) >= dprev)
          throw ArgError("automaton: transition out of range at site " +
                         std::to_string(k));
  }
}

// The multi-control Z instance: f_{ij} = i*j on a width-2 automaton with the
// single phase theta^{(1)}(1, 1) = pi.
inline AutomatonSpec mcz_automaton(std::int64_t n) {
  if (n < 2) throw ArgError("mcz_automaton: needs at least two sites");
  AutomatonSpec a;
  a.n = n;
  a.d = 2;
  a.bond_dims.assign(static_cast<std::size_t>(n + 1), 2);
  a.bond_dims.front() = 1;
  a.bond_dims.back() = 1;
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t dk = a.bond_dims[static_cast<std::size_t>(k)];
    const std::int64_t dprev = a.bond_dims[static_cast<std::size_t>(k - 1)];
    Eigen::MatrixXi fk = Eigen::MatrixXi::Zero(dk, 2);
    for (std::int64_t i = 0; i < dk; ++i)
      for (std::int64_t j = 0; j < 2; ++j) {
        std::int64_t go = (k == n ? 1 : i) * j;  // top row acts as state 1
        fk(i, j) = static_cast<int>(std::min<std::int64_t>(go, dprev - 1));
      }
    a.f.push_back(fk);
    a.theta.push_back(Eigen::MatrixXd::Zero(dk, 2));
  }
  a.theta[0](1, 1) = std::acos(-1.0);
  validate(a);
  return a;
}

inline AutomatonSpec random_automaton(std::int64_t n, std::int64_t d,
                                      std::int64_t max_bond,
                                      std::mt19937_64& rng) {
  AutomatonSpec a;
  a.n = n;
  a.d = d;
  a.bond_dims.assign(static_cast<std::size_t>(n + 1), 1);
  std::uniform_int_distribution<std::int64_t> bond(1, max_bond);
  for (std::int64_t k = 1; k < n; ++k)
    a.bond_dims[static_cast<std::size_t>(k)] = bond(rng);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t dk = a.bond_dims[static_cast<std::size_t>(k)];
    const std::int64_t dprev = a.bond_dims[static_cast<std::size_t>(k - 1)];
    Eigen::MatrixXi fk(dk, d);
    Eigen::MatrixXd tk(dk, d);
    std::uniform_int_distribution<std::int64_t> go(0, dprev - 1);
    for (std::int64_t i = 0; i < dk; ++i)
      for (std::int64_t j = 0; j < d; ++j) {
        fk(i, j) = static_cast<int>(go(rng));
        tk(i, j) = angle(rng);
      }
    a.f.push_back(fk);
    a.theta.push_back(tk);
  }
  validate(a);
  return a;
}

// Runs the automaton on one word; digits[k-1] is the letter at site k.
inline double automaton_phase(const AutomatonSpec& a,
                              const std::vector<std::int64_t>& digits) {
  double acc = 0;
  std::int64_t s = 0;
  for (std::int64_t k = a.n; k >= 1; --k) {
    const std::int64_t j = digits[static_cast<std::size_t>(k - 1)];
    acc += a.theta[static_cast<std::size_t>(k - 1)](s, j);
    s = a.f[static_cast<std::size_t>(k - 1)](s, j);
  }
  return acc;
}

// The diagonal of the induced phase unitary, dense index order.
inline Vec automaton_phases(const AutomatonSpec& a) {
  validate(a);
  std::int64_t dim = 1;
  for (std::int64_t k = 0; k < a.n; ++k) dim *= a.d;
  Vec diag(dim);
  std::vector<std::int64_t> digits(static_cast<std::size_t>(a.n), 0);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::int64_t rest = idx;
    for (std::int64_t k = 0; k < a.n; ++k) {
      digits[static_cast<std::size_t>(k)] = rest % a.d;
      rest /= a.d;
    }
    diag(idx) = std::exp(cd(0, automaton_phase(a, digits)));
  }
  return diag;
}

inline Mat automaton_mpu(const AutomatonSpec& a) {
  return Vec(automaton_phases(a)).asDiagonal();
}

// MPS form of the weighted automaton, one tensor per site.
inline MpoChain automaton_mps(const AutomatonSpec& a) {
  validate(a);
  MpoChain c;
  for (std::int64_t k = 1; k <= a.n; ++k) {
    const std::int64_t dk = a.bond_dims[static_cast<std::size_t>(k)];
    const std::int64_t dprev = a.bond_dims[static_cast<std::size_t>(k - 1)];
    SiteTensor s(a.d, 1, dk, dprev);
    s.t.data().assign(s.t.data().size(), cd(0, 0));
    for (std::int64_t i = 0; i < dk; ++i)
      for (std::int64_t j = 0; j < a.d; ++j)
        s.at(j, 0, i, a.f[static_cast<std::size_t>(k - 1)](i, j)) =
            std::exp(cd(0, a.theta[static_cast<std::size_t>(k - 1)](i, j)));
    c.sites.push_back(std::move(s));
  }
  Vec one(1);
  one << 1;
  c.boundary = Boundary::open(one, one);
  c.validate();
  return c;
}

// Diagonal MPO carrying the same phases: A^{jj} = A_mps[j].
inline MpoChain automaton_mpu_chain(const AutomatonSpec& a) {
  MpoChain mps = automaton_mps(a);
  MpoChain c;
  for (const SiteTensor& m : mps.sites) {
    SiteTensor s(a.d, a.d, m.d_left, m.d_right);
    s.t.data().assign(s.t.data().size(), cd(0, 0));
    for (std::int64_t j = 0; j < a.d; ++j)
      s.set_block(j, j, m.block(j, 0));
    c.sites.push_back(std::move(s));
  }
  c.boundary = mps.boundary;
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Ancilla circuit for the automaton. D_k-level ancillas a_1..a_{N-1} start
// in |0>; a V sweep from site N down writes the automaton state into the
// ancillas with the phase applied on the way, then a U sweep from site 2 up
// subtracts the transitions again, returning every ancilla to |0> exactly.

struct AutomatonSimResult {
  Vec system_state;        // d^n amplitudes, ancillas projected on |0>
  double ancilla_leakage;  // norm of the residual outside ancilla |0>
};

inline AutomatonSimResult automaton_circuit_simulate(const AutomatonSpec& a,
                                                     const Vec& input) {
  validate(a);
  std::int64_t sys_dim = 1;
  for (std::int64_t k = 0; k < a.n; ++k) sys_dim *= a.d;
  if (input.size() != sys_dim)
    throw ArgError("automaton_circuit_simulate: input dim mismatch");

  // Register: ancillas a_1..a_{N-1} are the low digits, system sites above.
  std::vector<std::int64_t> anc_stride(static_cast<std::size_t>(a.n), 1);
  std::int64_t anc_dim = 1;
  for (std::int64_t k = 1; k <= a.n - 1; ++k) {
    anc_stride[static_cast<std::size_t>(k)] = anc_dim;  // stride of a_k
    anc_dim *= a.bond_dims[static_cast<std::size_t>(k)];
  }
  const std::int64_t dim = sys_dim * anc_dim;
  Vec state = Vec::Zero(dim);
  for (std::int64_t s = 0; s < sys_dim; ++s) state(s * anc_dim) = input(s);

  auto anc_digit = [&](std::int64_t idx, std::int64_t k) {
    return (idx / anc_stride[static_cast<std::size_t>(k)]) %
           a.bond_dims[static_cast<std::size_t>(k)];
  };
  auto sys_digit = [&](std::int64_t idx, std::int64_t k) {
    std::int64_t s = idx / anc_dim;
    for (std::int64_t l = 1; l < k; ++l) s /= a.d;
    return s % a.d;
  };

  // sign +1: V_k (add transition, apply phase); sign -1: U_k (subtract).
  auto sweep_site = [&](std::int64_t k, int sign) {
    const auto& fk = a.f[static_cast<std::size_t>(k - 1)];
    const auto& tk = a.theta[static_cast<std::size_t>(k - 1)];
    Vec next = Vec::Zero(dim);
    for (std::int64_t idx = 0; idx < dim; ++idx) {
      if (state(idx) == cd(0, 0)) continue;
      const std::int64_t s =
          (k == a.n) ? 0 : anc_digit(idx, k);  // a_k holds the state
      const std::int64_t j = sys_digit(idx, k);
      cd amp = state(idx);
      std::int64_t target = idx;
      if (k >= 2) {
        const std::int64_t dprev = a.bond_dims[static_cast<std::size_t>(k - 1)];
        const std::int64_t l = anc_digit(idx, k - 1);
        const std::int64_t lp =
            ((l + sign * fk(s, j)) % dprev + dprev) % dprev;
        target += (lp - l) * anc_stride[static_cast<std::size_t>(k - 1)];
      }
      if (sign > 0) amp *= std::exp(cd(0, tk(s, j)));
      next(target) += amp;
    }
    state = std::move(next);
  };

  for (std::int64_t k = a.n; k >= 1; --k) sweep_site(k, +1);
  for (std::int64_t k = 2; k <= a.n; ++k) sweep_site(k, -1);

  AutomatonSimResult out;
  out.system_state = Vec(sys_dim);
  double leak = 0;
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    if (idx % anc_dim == 0)
      out.system_state(idx / anc_dim) = state(idx);
    else
      leak += std::norm(state(idx));
  }
  out.ancilla_leakage = std::sqrt(leak);
  return out;
}

// ---------------------------------------------------------------------------
// Schmidt-gap obstruction. The three-angle canonical gate
// exp[i(tx XX + ty YY + tz ZZ)] is diagonal in the Bell basis, so it is
// assembled from its closed-form eigensystem rather than a matrix
// exponential.

inline Mat canonical_two_qubit_gate(double tx, double ty, double tz) {
  Mat bell(4, 4);
  const double s = 1.0 / std::sqrt(2.0);
  bell.setZero();
  bell(0, 0) = s;  bell(3, 0) = s;   // |Phi+>
  bell(0, 1) = s;  bell(3, 1) = -s;  // |Phi->
  bell(1, 2) = s;  bell(2, 2) = s;   // |Psi+>
  bell(1, 3) = s;  bell(2, 3) = -s;  // |Psi->
  Vec phases(4);
  phases << std::exp(cd(0, tx - ty + tz)), std::exp(cd(0, -tx + ty + tz)),
      std::exp(cd(0, tx + ty - tz)), std::exp(cd(0, -tx - ty - tz));
  return bell * phases.asDiagonal() * bell.adjoint();
}

// Unit-normalized descending operator Schmidt spectrum of a two-qubit gate.
inline RVec gate_schmidt_profile(const Mat& g) {
  SchmidtSpectrum sp = operator_schmidt(g, 2, 2, 0.0);
  RVec v = RVec::Zero(4);
  for (std::int64_t i = 0; i < sp.values.size() && i < 4; ++i)
    v(i) = sp.values(i);
  v /= v.norm();
  return v;
}

struct Prop3Report {
  RVec target;             // normalized spectrum of the left circuit
  double formula_residual; // distance to the closed-form prediction
  double min_distance;     // best single-gate approach after refinement
  std::array<double, 3> best_angles;
  double gap;              // == min_distance
};

namespace detail {
// Nelder-Mead on three angles; small and deterministic.
template <typename F>
std::pair<std::array<double, 3>, double> nelder_mead3(
    F f, std::array<double, 3> x0, double step, int iters) {
  using P = std::array<double, 3>;
  std::array<std::pair<P, double>, 4> sim;
  sim[0] = {x0, f(x0)};
  for (int i = 0; i < 3; ++i) {
    P x = x0;
    x[static_cast<std::size_t>(i)] += step;
    sim[static_cast<std::size_t>(i + 1)] = {x, f(x)};
  }
  auto centroid = [&](int skip) {
    P c{0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      if (i == skip) continue;
      for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)] +=
          sim[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(k)] / 3.0;
    }
    return c;
  };
  auto at = [&](const P& c, const P& x, double t) {
    P r;
    for (int k = 0; k < 3; ++k)
      r[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)] +
          t * (x[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]);
    return r;
  };
  for (int it = 0; it < iters; ++it) {
    std::sort(sim.begin(), sim.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    const P c = centroid(3);
    const P& worst = sim[3].first;
    P xr = at(c, worst, -1.0);
    const double fr = f(xr);
    if (fr < sim[0].second) {
      P xe = at(c, worst, -2.0);
      const double fe = f(xe);
      sim[3] = fe < fr ? std::make_pair(xe, fe) : std::make_pair(xr, fr);
    } else if (fr < sim[2].second) {
      sim[3] = {xr, fr};
    } else {
      P xc = at(c, worst, 0.5);
      const double fc = f(xc);
      if (fc < sim[3].second) {
        sim[3] = {xc, fc};
      } else {
        for (int i = 1; i < 4; ++i) {
          for (int k = 0; k < 3; ++k)
            sim[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(k)] =
                sim[0].first[static_cast<std::size_t>(k)] +
                0.5 * (sim[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(k)] -
                       sim[0].first[static_cast<std::size_t>(k)]);
          sim[static_cast<std::size_t>(i)].second =
              f(sim[static_cast<std::size_t>(i)].first);
        }
      }
    }
  }
  std::sort(sim.begin(), sim.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return {sim[0].first, sim[0].second};
}
}  // namespace detail

// Builds the three-qubit left circuit V~_2 (wires 2,3), CNOT (wires 1,2),
// U~_2 (wires 2,3) with the inner-rung gates exp[i(pi/4 XX + pi/4 YY +
// theta ZZ)], computes the operator Schmidt spectrum across the
// (wires 1,2) | (wire 3) cut, compares it against the closed form
// {2|cos t+|, 2|sin t+|, 2|cos t-|, 2|sin t-|}, t+- = theta_u +- theta_v,
// and minimizes the distance from that spectrum to anything a single
// two-qubit gate can produce.
inline Prop3Report prop3_schmidt_gap(double theta_u, double theta_v,
                                     std::int64_t grid = 48,
                                     int refine_iters = 200) {
  const double q = std::acos(-1.0) / 4.0;
  Mat cx = Mat::Zero(4, 4);
  cx(0, 0) = 1.0;  // control on wire 1, target on wire 2
  cx(3, 1) = 1.0;
  cx(2, 2) = 1.0;
  cx(1, 3) = 1.0;
  const std::vector<GatePlacement> gates = {
      {canonical_two_qubit_gate(q, q, theta_v), 2, 2},
      {cx, 1, 2},
      {canonical_two_qubit_gate(q, q, theta_u), 2, 2}};
  const Mat u = circuit_product(gates, {2, 2, 2});

  SchmidtSpectrum sp = operator_schmidt(u, 2, 4, 0.0);
  Prop3Report rep;
  rep.target = RVec::Zero(4);
  for (std::int64_t i = 0; i < sp.values.size() && i < 4; ++i)
    rep.target(i) = sp.values(i);
  rep.target /= rep.target.norm();

  RVec formula(4);
  const double tp = theta_u + theta_v, tm = theta_u - theta_v;
  formula << 2 * std::abs(std::cos(tp)), 2 * std::abs(std::sin(tp)),
      2 * std::abs(std::cos(tm)), 2 * std::abs(std::sin(tm));
  std::sort(formula.data(), formula.data() + 4, std::greater<double>());
  formula /= formula.norm();
  rep.formula_residual = (rep.target - formula).norm();

  auto distance = [&](const std::array<double, 3>& t) {
    return (gate_schmidt_profile(
                canonical_two_qubit_gate(t[0], t[1], t[2])) - rep.target)
        .norm();
  };
  const double hi = std::acos(-1.0) / 2.0;
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 3> best_t{0, 0, 0};
  for (std::int64_t ax = 0; ax < grid; ++ax)
    for (std::int64_t ay = 0; ay < grid; ++ay)
      for (std::int64_t az = 0; az < grid; ++az) {
        const std::array<double, 3> t = {
            hi * static_cast<double>(ax) / static_cast<double>(grid - 1),
            hi * static_cast<double>(ay) / static_cast<double>(grid - 1),
            hi * static_cast<double>(az) / static_cast<double>(grid - 1)};
        const double dist = distance(t);
        if (dist < best) {
          best = dist;
          best_t = t;
        }
      }
  auto refined = detail::nelder_mead3(distance, best_t,
                                      hi / static_cast<double>(grid - 1),
                                      refine_iters);
  if (refined.second < best) {
    best = refined.second;
    best_t = refined.first;
  }
  rep.min_distance = best;
  rep.best_angles = best_t;
  rep.gap = best;
  return rep;
}

// ---------------------------------------------------------------------------
// Small corpus helpers.

inline MpoChain identity_chain(std::int64_t n, std::int64_t d) {
  MpoChain c;
  for (std::int64_t k = 0; k < n; ++k) {
    SiteTensor s(d, d, 1, 1);
    s.t.data().assign(s.t.data().size(), cd(0, 0));
    for (std::int64_t i = 0; i < d; ++i) s.at(i, i, 0, 0) = 1.0;
    c.sites.push_back(std::move(s));
  }
  Vec one(1);
  one << 1;
  c.boundary = Boundary::open(one, one);
  return c;
}

// Product of one-site unitaries; us[0] acts on site 1.
inline MpoChain product_unitary_chain(const std::vector<Mat>& us) {
  MpoChain c;
  for (const Mat& u : us) {
    if (u.rows() != u.cols()) throw ArgError("product_unitary_chain: square");
    SiteTensor s(u.rows(), u.cols(), 1, 1);
    for (std::int64_t i = 0; i < u.rows(); ++i)
      for (std::int64_t j = 0; j < u.cols(); ++j) s.at(i, j, 0, 0) = u(i, j);
    c.sites.push_back(std::move(s));
  }
  Vec one(1);
  one << 1;
  c.boundary = Boundary::open(one, one);
  c.validate();
  return c;
}

// Dresses a chain with random one-site unitaries on the physical legs (the
// operator stays unitary iff it was) and an invertible gauge on every
// internal bond (the operator is unchanged but the canonical form is
// destroyed). Boundary bonds are left alone.
inline MpoChain decorate(const MpoChain& chain, std::mt19937_64& rng) {
  MpoChain c = chain;
  c.validate();
  for (SiteTensor& s : c.sites) {
    const Mat wout = random_unitary(s.d_out, rng);
    const Mat win = random_unitary(s.d_in, rng);
    SiteTensor fresh(s.d_out, s.d_in, s.d_left, s.d_right);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j) {
        Mat acc = Mat::Zero(s.d_left, s.d_right);
        for (std::int64_t ip = 0; ip < s.d_out; ++ip)
          for (std::int64_t jp = 0; jp < s.d_in; ++jp) {
            const cd w = wout(i, ip) * win(jp, j);
            if (w != cd(0, 0)) acc += w * s.block(ip, jp);
          }
        fresh.set_block(i, j, acc);
      }
    s = std::move(fresh);
  }
  std::uniform_real_distribution<double> stretch(0.6, 1.6);
  const std::int64_t n = c.length();
  for (std::int64_t k = 1; k < n; ++k) {
    const std::int64_t dk = c.sites[static_cast<std::size_t>(k - 1)].d_left;
    RVec sing(dk);
    for (std::int64_t i = 0; i < dk; ++i) sing(i) = stretch(rng);
    const Mat g = random_unitary(dk, rng) * sing.asDiagonal() *
                  random_unitary(dk, rng);
    const Mat ginv = g.inverse();
    SiteTensor& lo = c.sites[static_cast<std::size_t>(k - 1)];
    for (std::int64_t i = 0; i < lo.d_out; ++i)
      for (std::int64_t j = 0; j < lo.d_in; ++j)
        lo.set_block(i, j, g * lo.block(i, j));
    SiteTensor& hiS = c.sites[static_cast<std::size_t>(k)];
    for (std::int64_t i = 0; i < hiS.d_out; ++i)
      for (std::int64_t j = 0; j < hiS.d_in; ++j)
        hiS.set_block(i, j, hiS.block(i, j) * ginv);
  }
  return c;
}

}  // namespace mpu
