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

#include <optional>

#include "mpu/core.hpp"
#include "mpu/tensor.hpp"

namespace mpu {

// One site tensor A^{ij}_{mn}: i outgoing (ket) physical index, j incoming
// (bra) physical index, m left bond, n right bond. Per physical pair (i, j)
// the matrix A^{ij} sits in M_{D_left x D_right}. Storage is a DenseTensor
// with axes (i, j, m, n).
struct SiteTensor {
  std::int64_t d_out = 0, d_in = 0, d_left = 0, d_right = 0;
  DenseTensor t;  // shape {d_out, d_in, d_left, d_right}

  SiteTensor() = default;
  SiteTensor(std::int64_t dout, std::int64_t din, std::int64_t dl,
             std::int64_t dr)
      : d_out(dout), d_in(din), d_left(dl), d_right(dr),
        t({dout, din, dl, dr}) {}

  cd& at(std::int64_t i, std::int64_t j, std::int64_t m, std::int64_t n) {
    return t.at({i, j, m, n});
  }
  const cd& at(std::int64_t i, std::int64_t j, std::int64_t m,
               std::int64_t n) const {
    return t.at({i, j, m, n});
  }

  Mat block(std::int64_t i, std::int64_t j) const {
    Mat m(d_left, d_right);
    for (std::int64_t a = 0; a < d_left; ++a)
      for (std::int64_t b = 0; b < d_right; ++b) m(a, b) = at(i, j, a, b);
    return m;
  }

  void set_block(std::int64_t i, std::int64_t j, const Mat& m) {
    for (std::int64_t a = 0; a < d_left; ++a)
      for (std::int64_t b = 0; b < d_right; ++b) at(i, j, a, b) = m(a, b);
  }
};

enum class BoundaryKind { kOpen, kPeriodic, kGeneral };

// Boundary closure b of the bond chain. Open: b = |right><left| (rank one);
// periodic: b = identity; general: arbitrary b in M_{D_first x D_last},
// where D_first is the rightmost site's right bond and D_last the leftmost
// site's left bond. The represented operator has matrix elements
// Tr(b * A_N^{i_N j_N} ... A_1^{i_1 j_1}).
struct Boundary {
  BoundaryKind kind = BoundaryKind::kOpen;
  // `left` holds the components of the covector <l| as stored; it is applied
  // without conjugation (b = |r><l| has entries r_a * l_c).
  Vec left;    // <l|, length = leftmost site's left bond (open)
  Vec right;   // |r>, length = rightmost site's right bond (open)
  Mat matrix;  // general b (general)

  static Boundary open(const Vec& l, const Vec& r) {
    Boundary b;
    b.kind = BoundaryKind::kOpen;
    b.left = l;
    b.right = r;
    return b;
  }
  static Boundary periodic() {
    Boundary b;
    b.kind = BoundaryKind::kPeriodic;
    return b;
  }
  static Boundary general(const Mat& m) {
    Boundary b;
    b.kind = BoundaryKind::kGeneral;
    b.matrix = m;
    return b;
  }
};

// Matrix-product operator on N sites. sites[0] is site 1, the rightmost
// tensor factor (least significant digit of the fused index); sites[N-1] is
// site N, the leftmost factor. Dense indices fuse as
// sum_k i_k * d^(k-1) for equal local dimension d (mixed radix otherwise,
// site N most significant).
struct MpoChain {
  std::vector<SiteTensor> sites;
  Boundary boundary;

  std::int64_t length() const { return static_cast<std::int64_t>(sites.size()); }

  std::int64_t total_out() const {
    std::int64_t n = 1;
    for (const auto& s : sites) n *= s.d_out;
    return n;
  }
  std::int64_t total_in() const {
    std::int64_t n = 1;
    for (const auto& s : sites) n *= s.d_in;
    return n;
  }

  void validate() const {
    if (sites.empty()) throw ArgError("MpoChain: empty chain");
    for (std::size_t k = 0; k + 1 < sites.size(); ++k)
      if (sites[k].d_left != sites[k + 1].d_right)
        throw ArgError("MpoChain: bond mismatch between sites " +
                       std::to_string(k + 1) + " and " + std::to_string(k + 2));
    const std::int64_t d_last = sites.back().d_left;   // leftmost left bond
    const std::int64_t d_first = sites.front().d_right;  // rightmost right bond
    switch (boundary.kind) {
      case BoundaryKind::kOpen:
        if (boundary.left.size() != d_last || boundary.right.size() != d_first)
          throw ArgError("MpoChain: open boundary vector dims");
        break;
      case BoundaryKind::kPeriodic:
        if (d_last != d_first)
          throw ArgError("MpoChain: periodic boundary needs equal end bonds");
        break;
      case BoundaryKind::kGeneral:
        if (boundary.matrix.rows() != d_first || boundary.matrix.cols() != d_last)
          throw ArgError("MpoChain: general boundary matrix dims");
        break;
    }
  }
};

// Rewrites any boundary as an open one on an equivalent chain: every site
// is padded to identity (x) A_k on the bond, the right vector becomes the
// maximally entangled pairing and the left vector carries b. Bond dims grow
// by a factor of D_first; the represented operator is unchanged.
inline MpoChain inflate_boundary(const MpoChain& chain) {
  chain.validate();
  if (chain.boundary.kind == BoundaryKind::kOpen) return chain;
  Mat b;
  const std::int64_t d_first = chain.sites.front().d_right;
  if (chain.boundary.kind == BoundaryKind::kPeriodic)
    b = Mat::Identity(d_first, d_first);
  else
    b = chain.boundary.matrix;
  const std::int64_t d0 = b.rows();  // = d_first
  MpoChain out;
  out.sites.reserve(chain.sites.size());
  const Mat id = Mat::Identity(d0, d0);
  for (const auto& s : chain.sites) {
    SiteTensor ns(s.d_out, s.d_in, d0 * s.d_left, d0 * s.d_right);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j)
        ns.set_block(i, j, kron(id, s.block(i, j)));
    out.sites.push_back(std::move(ns));
  }
  const std::int64_t d_last = chain.sites.back().d_left;
  Vec l = Vec::Zero(d0 * d_last);
  for (std::int64_t a = 0; a < d0; ++a)
    for (std::int64_t c = 0; c < d_last; ++c) l(a * d_last + c) = b(a, c);
  Vec r = Vec::Zero(d0 * d_first);
  for (std::int64_t a = 0; a < d0; ++a) r(a * d_first + a) = 1.0;
  out.boundary = Boundary::open(l, r);
  return out;
}

// Absorbs only the right boundary vector into site 1, leaving the last
// site's left bond (and the left vector) untouched; used when the left end
// is an open cut. Open boundaries only.
inline MpoChain absorb_right_boundary(const MpoChain& chain) {
  chain.validate();
  if (chain.boundary.kind != BoundaryKind::kOpen)
    throw ArgError("absorb_right_boundary: open boundary required");
  MpoChain c = chain;
  {
    SiteTensor& s1 = c.sites.front();
    if (s1.d_right != 1) {
      SiteTensor ns(s1.d_out, s1.d_in, s1.d_left, 1);
      for (std::int64_t i = 0; i < s1.d_out; ++i)
        for (std::int64_t j = 0; j < s1.d_in; ++j)
          ns.set_block(i, j, s1.block(i, j) * c.boundary.right);
      s1 = std::move(ns);
    } else {
      for (std::int64_t i = 0; i < s1.d_out; ++i)
        for (std::int64_t j = 0; j < s1.d_in; ++j)
          s1.set_block(i, j, s1.block(i, j) * c.boundary.right(0));
    }
  }
  c.boundary = Boundary::open(c.boundary.left, Vec::Ones(1));
  return c;
}

// Mirror image: absorbs only the left boundary vector into site N, keeping
// site 1's right bond (and the right vector) as an open cut.
inline MpoChain absorb_left_boundary(const MpoChain& chain) {
  chain.validate();
  if (chain.boundary.kind != BoundaryKind::kOpen)
    throw ArgError("absorb_left_boundary: open boundary required");
  MpoChain c = chain;
  {
    SiteTensor& sn = c.sites.back();
    if (sn.d_left != 1) {
      SiteTensor ns(sn.d_out, sn.d_in, 1, sn.d_right);
      for (std::int64_t i = 0; i < sn.d_out; ++i)
        for (std::int64_t j = 0; j < sn.d_in; ++j)
          ns.set_block(i, j, c.boundary.left.transpose() * sn.block(i, j));
      sn = std::move(ns);
    } else {
      for (std::int64_t i = 0; i < sn.d_out; ++i)
        for (std::int64_t j = 0; j < sn.d_in; ++j)
          sn.set_block(i, j, c.boundary.left(0) * sn.block(i, j));
    }
  }
  c.boundary = Boundary::open(Vec::Ones(1), c.boundary.right);
  return c;
}

// Open-boundary chain with the boundary vectors absorbed into the end
// sites, so the leftmost left bond and rightmost right bond are 1.
// General and periodic boundaries are inflated first.
inline MpoChain absorb_boundary(const MpoChain& chain) {
  return absorb_left_boundary(absorb_right_boundary(inflate_boundary(chain)));
}

// Dense matrix of the represented operator. Guarded by `cap` on the total
// in/out dimensions (ResourceError beyond it).
inline Mat materialize(const MpoChain& chain, std::int64_t cap = kDenseCap) {
  chain.validate();
  if (chain.total_out() > cap || chain.total_in() > cap)
    throw ResourceError("materialize: dense dimension exceeds cap " +
                        std::to_string(cap));
  MpoChain c = absorb_boundary(chain);
  // Accumulate T[(I, J), n]: fused out string I, in string J (site order,
  // later sites more significant), open left bond n of the partial product.
  std::int64_t dims_out = 1, dims_in = 1;
  Mat acc = Mat::Ones(1, 1);  // rows (I, J) interleaved as I*dims_in + J
  for (const auto& s : c.sites) {
    const std::int64_t rows_new = dims_out * s.d_out * dims_in * s.d_in;
    Mat next = Mat::Zero(rows_new, s.d_left);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j) {
        const Mat blk = s.block(i, j);  // d_left x d_right
        for (std::int64_t io = 0; io < dims_out; ++io)
          for (std::int64_t jo = 0; jo < dims_in; ++jo) {
            const std::int64_t row_old = io * dims_in + jo;
            const std::int64_t row_new =
                ((i * dims_out + io) * s.d_in + j) * dims_in + jo;
            for (std::int64_t m = 0; m < s.d_left; ++m) {
              cd v(0, 0);
              for (std::int64_t r = 0; r < s.d_right; ++r)
                v += blk(m, r) * acc(row_old, r);
              next(row_new, m) += v;
            }
          }
      }
    acc = std::move(next);
    dims_out *= s.d_out;
    dims_in *= s.d_in;
  }
  Mat u(dims_out, dims_in);
  for (std::int64_t i = 0; i < dims_out; ++i)
    for (std::int64_t j = 0; j < dims_in; ++j) u(i, j) = acc(i * dims_in + j, 0);
  return u;
}

// Merges sites [first, first+count) into a single blocked site. Physical
// indices fuse with the later (more significant) site leading, matching the
// dense index convention.
inline SiteTensor block_sites(const MpoChain& chain, std::int64_t first,
                              std::int64_t count) {
  chain.validate();
  if (first < 0 || count < 1 || first + count > chain.length())
    throw ArgError("block_sites: range out of bounds");
  // Work right to left: start at site `first` (index base 0), absorb later.
  SiteTensor cur = chain.sites[first];
  for (std::int64_t k = 1; k < count; ++k) {
    const SiteTensor& s = chain.sites[first + k];
    SiteTensor ns(s.d_out * cur.d_out, s.d_in * cur.d_in, s.d_left,
                  cur.d_right);
    for (std::int64_t i2 = 0; i2 < s.d_out; ++i2)
      for (std::int64_t j2 = 0; j2 < s.d_in; ++j2)
        for (std::int64_t i1 = 0; i1 < cur.d_out; ++i1)
          for (std::int64_t j1 = 0; j1 < cur.d_in; ++j1)
            ns.set_block(i2 * cur.d_out + i1, j2 * cur.d_in + j1,
                         s.block(i2, j2) * cur.block(i1, j1));
    cur = std::move(ns);
  }
  return cur;
}

// Blocks a full chain by grouping consecutive sites, sizes[0] sites into
// the new site 1 and so on. Boundary is carried over unchanged.
inline MpoChain block_chain(const MpoChain& chain,
                            const std::vector<std::int64_t>& sizes) {
  std::int64_t total = 0;
  for (auto s : sizes) total += s;
  if (total != chain.length()) throw ArgError("block_chain: sizes must sum to N");
  MpoChain out;
  std::int64_t pos = 0;
  for (auto s : sizes) {
    out.sites.push_back(block_sites(chain, pos, s));
    pos += s;
  }
  out.boundary = chain.boundary;
  return out;
}

// Reversal: site order flipped, bonds transposed, physical legs swapped,
// boundary replaced by b^T. Densely this sends U to R U^T R with R the
// site-order reversal permutation (for equal local dimensions).
inline MpoChain reverse_chain(const MpoChain& chain) {
  chain.validate();
  MpoChain out;
  out.sites.reserve(chain.sites.size());
  for (auto it = chain.sites.rbegin(); it != chain.sites.rend(); ++it) {
    const SiteTensor& s = *it;
    SiteTensor ns(s.d_in, s.d_out, s.d_right, s.d_left);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j)
        ns.set_block(j, i, s.block(i, j).transpose());
    out.sites.push_back(std::move(ns));
  }
  switch (chain.boundary.kind) {
    case BoundaryKind::kOpen:
      out.boundary = Boundary::open(chain.boundary.right, chain.boundary.left);
      break;
    case BoundaryKind::kPeriodic:
      out.boundary = Boundary::periodic();
      break;
    case BoundaryKind::kGeneral:
      out.boundary = Boundary::general(chain.boundary.matrix.transpose());
      break;
  }
  return out;
}

// Choi-Jamiolkowski style vectorization: each site's physical pair (i, j)
// fuses to a single ket index i * d_in + j, turning the MPO into an MPS
// with local dimension d_out * d_in. Bonds and boundary are untouched.
inline MpoChain vectorize_to_mps(const MpoChain& chain) {
  chain.validate();
  MpoChain out;
  out.boundary = chain.boundary;
  for (const auto& s : chain.sites) {
    SiteTensor ns(s.d_out * s.d_in, 1, s.d_left, s.d_right);
    for (std::int64_t i = 0; i < s.d_out; ++i)
      for (std::int64_t j = 0; j < s.d_in; ++j)
        ns.set_block(i * s.d_in + j, 0, s.block(i, j));
    out.sites.push_back(std::move(ns));
  }
  return out;
}

// Gaussian random chain (not unitary); property-test fodder.
inline MpoChain random_chain(std::int64_t n, std::int64_t d, std::int64_t bond,
                             std::mt19937_64& rng) {
  if (n < 1 || d < 1 || bond < 1) throw ArgError("random_chain: bad dims");
  MpoChain c;
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t dl = (k == n - 1) ? 1 : bond;
    const std::int64_t dr = (k == 0) ? 1 : bond;
    SiteTensor s(d, d, dl, dr);
    for (std::int64_t i = 0; i < d; ++i)
      for (std::int64_t j = 0; j < d; ++j)
        s.set_block(i, j, random_complex_matrix(dl, dr, rng));
    c.sites.push_back(std::move(s));
  }
  c.boundary = Boundary::open(Vec::Ones(1), Vec::Ones(1));
  return c;
}

}  // namespace mpu
