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

#include "mpu/basis.hpp"
#include "mpu/chain.hpp"
#include "mpu/core.hpp"

namespace mpu {

// Local transfer family of one site tensor on the doubled bond space
// (conjugate layer (x) ket layer, flat index m'*D + m):
//
//   M_{j'j} = sum_i conj(A^{ij'}) (x) A^{ij}
//   E       = S_0 = (1/d_in) sum_j M_{jj}
//   S_alpha = (1/d_in) sum_{j,j'} (sigma_alpha)_{j j'} M_{j'j},  alpha >= 1
//
// with the Hermitian basis normalized to Tr(sigma_a sigma_b) = d*delta_ab.
// Acting on a vectorized bond matrix X this is the map
// X -> (1/d_in) sum_{i,j,j'} (sigma_alpha)_{jj'} A^{ij} X (A^{ij'})^dagger,
// so Hermitian X stay Hermitian and E is completely positive.
struct TransferFamily {
  std::int64_t bond_left = 0, bond_right = 0;  // undoubled dims
  Mat e;               // bond_left^2 x bond_right^2
  std::vector<Mat> s;  // d_in^2 - 1 generators, same shape
};

inline TransferFamily local_transfer(const SiteTensor& site) {
  const std::int64_t d = site.d_in;
  const HermitianBasis basis(d);
  const std::int64_t dl = site.d_left, dr = site.d_right;
  TransferFamily f;
  f.bond_left = dl;
  f.bond_right = dr;
  // M_{j'j} built once, then contracted with each basis element.
  std::vector<Mat> m(static_cast<std::size_t>(d * d));
  for (std::int64_t jp = 0; jp < d; ++jp)
    for (std::int64_t j = 0; j < d; ++j) {
      Mat acc = Mat::Zero(dl * dl, dr * dr);
      for (std::int64_t i = 0; i < site.d_out; ++i)
        acc += kron(site.block(i, jp).conjugate(), site.block(i, j));
      m[jp * d + j] = std::move(acc);
    }
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::int64_t a = 0; a < basis.count(); ++a) {
    Mat acc = Mat::Zero(dl * dl, dr * dr);
    for (std::int64_t jp = 0; jp < d; ++jp)
      for (std::int64_t j = 0; j < d; ++j) {
        const cd w = basis[a](j, jp);
        if (w != cd(0, 0)) acc += w * m[jp * d + j];
      }
    acc *= inv_d;
    if (a == 0)
      f.e = std::move(acc);
    else
      f.s.push_back(std::move(acc));
  }
  return f;
}

// Doubled boundary B = conj(b) (x) b for closing transfer strings:
// Tr(b A-string) Tr(b A-string)^* style traces become Tr(B M-string).
inline Mat doubled_boundary(const Mat& b) {
  return kron(b.conjugate(), b);
}

inline Mat boundary_matrix(const MpoChain& chain) {
  chain.validate();
  switch (chain.boundary.kind) {
    case BoundaryKind::kPeriodic:
      return Mat::Identity(chain.sites.front().d_right,
                           chain.sites.front().d_right);
    case BoundaryKind::kGeneral:
      return chain.boundary.matrix;
    case BoundaryKind::kOpen: {
      // b = |r><l| without conjugation of l (see Boundary).
      return chain.boundary.right * chain.boundary.left.transpose();
    }
  }
  throw ArgError("boundary_matrix: unreachable");
}

}  // namespace mpu
