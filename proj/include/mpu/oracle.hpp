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
// Brute-force ground truth. Everything in this header is allowed to be
// exponential: explicit circuit products on mixed-radix wire registers,
// dense unitarity residuals, and the harness that runs bond-space checks
// against their dense counterparts and treats any disagreement as a bug.

#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpu/chain.hpp"
#include "mpu/core.hpp"
#include "mpu/unitarity.hpp"

namespace mpu {

// A gate on a contiguous block of wires. Wires are numbered from 1;
// wire 1 carries the least significant digit of the dense register index
// and within a gate the highest wire is the most significant row/column
// digit, matching the site ordering of MpoChain.
struct GatePlacement {
  Mat u;
  std::int64_t first_wire = 1;
  std::int64_t n_wires = 2;
};

inline std::int64_t register_dim(const std::vector<std::int64_t>& wire_dims) {
  std::int64_t n = 1;
  for (std::int64_t d : wire_dims) {
    if (d < 1) throw ArgError("register_dim: wire dims must be positive");
    n *= d;
  }
  return n;
}

// Dense embedding 1_above (x) u (x) 1_below of one placement.
inline Mat embed_gate(const GatePlacement& g,
                      const std::vector<std::int64_t>& wire_dims) {
  const std::int64_t n = static_cast<std::int64_t>(wire_dims.size());
  if (g.first_wire < 1 || g.n_wires < 1 || g.first_wire + g.n_wires - 1 > n)
    throw ArgError("embed_gate: placement outside the register");
  std::int64_t below = 1, span = 1, above = 1;
  for (std::int64_t w = 1; w <= n; ++w) {
    if (w < g.first_wire)
      below *= wire_dims[static_cast<std::size_t>(w - 1)];
    else if (w < g.first_wire + g.n_wires)
      span *= wire_dims[static_cast<std::size_t>(w - 1)];
    else
      above *= wire_dims[static_cast<std::size_t>(w - 1)];
  }
  if (g.u.rows() != span || g.u.cols() != span)
    throw ArgError("embed_gate: gate dim does not match its wire span");
  return kron(Mat::Identity(above, above), kron(g.u, Mat::Identity(below, below)));
}

// Ordered dense product; the first listed gate acts first on states, so the
// result is emb(g_last) * ... * emb(g_1). Empty circuit yields the identity.
inline Mat circuit_product(const std::vector<GatePlacement>& gates,
                           const std::vector<std::int64_t>& wire_dims,
                           std::int64_t cap = kDenseCap) {
  const std::int64_t dim = register_dim(wire_dims);
  if (dim > cap)
    throw ResourceError("circuit_product: register dim " + std::to_string(dim) +
                        " exceeds cap " + std::to_string(cap));
  Mat acc = Mat::Identity(dim, dim);
  for (const GatePlacement& g : gates) acc = embed_gate(g, wire_dims) * acc;
  return acc;
}

struct DenseUnitarityReport {
  bool pass = false;
  bool square = false;
  double residual = 0;  // ||U^dagger U - 1||_F over the dense operator
  std::int64_t dim_out = 0, dim_in = 0;
};

inline DenseUnitarityReport dense_unitarity_oracle(const MpoChain& chain,
                                                   double tol,
                                                   std::int64_t cap = kDenseCap) {
  DenseUnitarityReport rep;
  rep.dim_out = chain.total_out();
  rep.dim_in = chain.total_in();
  rep.square = rep.dim_out == rep.dim_in;
  if (!rep.square) return rep;  // not unitary by dimension count
  const Mat u = materialize(chain, cap);
  rep.residual = (u.adjoint() * u - Mat::Identity(rep.dim_in, rep.dim_in)).norm();
  rep.pass = rep.residual <= tol;
  return rep;
}

struct OracleConfig {
  std::int64_t max_total_dim = kDenseCap;   // dense materialization cap
  std::int64_t max_strings = std::int64_t{1} << 18;  // exhaustive-check cap
  Tolerances tol{};
  std::uint64_t seed = kDefaultSeed;
};

// One chain, every applicable verdict. The dense residual bound is scaled by
// sqrt(dim) relative to the bond-space tolerance: the recursion tests
// normalized functionals while the Frobenius norm accumulates over d^N
// entries.
struct CrossValidation {
  bool recursive_pass = false;
  double recursive_rho_dev = 0;
  double recursive_s_norm = 0;
  std::optional<bool> exhaustive_pass;
  double exhaustive_worst = 0;
  std::optional<bool> dense_pass;
  double dense_residual = 0;
  double dense_tol = 0;
  bool agree = false;  // no executed layer contradicts another
  bool overall_pass = false;
  std::uint64_t seed = 0;
  std::string detail;
};

inline CrossValidation cross_validate(const MpoChain& chain,
                                      const OracleConfig& cfg = {}) {
  chain.validate();
  CrossValidation out;
  out.seed = cfg.seed;

  const UnitarityReport rec = check_unitarity_recursive(chain, cfg.tol);
  out.recursive_pass = rec.pass;
  out.recursive_rho_dev = rec.rho_final_deviation;
  out.recursive_s_norm = rec.s_final_norm;

  std::int64_t strings = 1;
  bool strings_feasible = true;
  for (const SiteTensor& s : chain.sites) {
    strings *= s.d_in * s.d_in;
    if (strings > cfg.max_strings) {
      strings_feasible = false;
      break;
    }
  }
  if (strings_feasible) {
    const StringCheckReport sr =
        check_strings_exhaustive(chain, cfg.tol.check, cfg.max_strings);
    // String closure alone cannot see a dimension mismatch; gate it the same
    // way the recursion does so the layers share one notion of "unitary".
    out.exhaustive_pass = sr.pass && chain.total_out() == chain.total_in();
    out.exhaustive_worst =
        std::max(sr.identity_deviation, sr.max_string_violation);
  }

  const std::int64_t dim = std::max(chain.total_out(), chain.total_in());
  if (dim <= cfg.max_total_dim) {
    out.dense_tol = 10.0 * cfg.tol.check * std::sqrt(static_cast<double>(dim));
    const DenseUnitarityReport dr =
        dense_unitarity_oracle(chain, out.dense_tol, cfg.max_total_dim);
    out.dense_pass = dr.pass;
    out.dense_residual = dr.residual;
  }

  out.agree = true;
  if (out.exhaustive_pass && *out.exhaustive_pass != out.recursive_pass)
    out.agree = false;
  if (out.dense_pass && *out.dense_pass != out.recursive_pass) out.agree = false;

  std::ostringstream os;
  os << "recursive=" << (out.recursive_pass ? "pass" : "fail");
  if (out.exhaustive_pass)
    os << " exhaustive=" << (*out.exhaustive_pass ? "pass" : "fail");
  if (out.dense_pass) os << " dense=" << (*out.dense_pass ? "pass" : "fail");
  if (!out.agree) os << " DISAGREEMENT seed=" << out.seed;
  out.detail = os.str();

  out.overall_pass = out.agree && out.recursive_pass;
  return out;
}

}  // namespace mpu
