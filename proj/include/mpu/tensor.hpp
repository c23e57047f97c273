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
#include <numeric>

#include "mpu/core.hpp"

namespace mpu {

// Dense complex tensor, row-major: the LAST axis varies fastest.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(size()), cd(0, 0));
  }

  DenseTensor(std::vector<std::int64_t> shape, std::vector<cd> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != size())
      throw ArgError("DenseTensor: data length does not match shape");
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }

  std::int64_t size() const {
    std::int64_t n = 1;
    for (auto s : shape_) {
      if (s <= 0) throw ArgError("DenseTensor: nonpositive axis length");
      n *= s;
    }
    return n;
  }

  const std::vector<cd>& data() const { return data_; }
  std::vector<cd>& data() { return data_; }

  cd& at(const std::vector<std::int64_t>& idx) { return data_[flat(idx)]; }
  const cd& at(const std::vector<std::int64_t>& idx) const {
    return data_[flat(idx)];
  }

  std::int64_t flat(const std::vector<std::int64_t>& idx) const {
    if (static_cast<std::int64_t>(idx.size()) != rank())
      throw ArgError("DenseTensor: index rank mismatch");
    std::int64_t f = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= shape_[k])
        throw ArgError("DenseTensor: index out of range");
      f = f * shape_[k] + idx[k];
    }
    return f;
  }

  double norm() const {
    double s = 0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  // Axis permutation: out.at(i[perm[0]], i[perm[1]], ...) = at(i[0], ...),
  // i.e. axis k of the result is axis perm[k] of the source.
  DenseTensor permute(const std::vector<std::int64_t>& perm) const {
    if (static_cast<std::int64_t>(perm.size()) != rank())
      throw ArgError("permute: rank mismatch");
    std::vector<std::int64_t> new_shape(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) new_shape[k] = shape_[perm[k]];
    DenseTensor out(new_shape);
    // Strides of the source axes in the destination's iteration order.
    std::vector<std::int64_t> src_stride(rank(), 1);
    for (std::int64_t k = rank() - 2; k >= 0; --k)
      src_stride[k] = src_stride[k + 1] * shape_[k + 1];
    std::vector<std::int64_t> stride_in_dst(rank());
    for (std::int64_t k = 0; k < rank(); ++k)
      stride_in_dst[k] = src_stride[perm[k]];
    std::vector<std::int64_t> idx(rank(), 0);
    const std::int64_t total = size();
    std::int64_t src = 0;
    for (std::int64_t f = 0; f < total; ++f) {
      out.data_[f] = data_[src];
      for (std::int64_t k = rank() - 1; k >= 0; --k) {
        src += stride_in_dst[k];
        if (++idx[k] < new_shape[k]) break;
        src -= stride_in_dst[k] * new_shape[k];
        idx[k] = 0;
      }
    }
    return out;
  }

  DenseTensor reshape(std::vector<std::int64_t> new_shape) const {
    DenseTensor out(std::move(new_shape), data_);
    if (out.size() != size()) throw ArgError("reshape: size mismatch");
    return out;
  }

  // Flatten to a matrix: rows fuse row_axes (in the given order, first axis
  // most significant), columns fuse the rest in their given order.
  Mat to_matrix(const std::vector<std::int64_t>& row_axes,
                const std::vector<std::int64_t>& col_axes) const {
    std::vector<std::int64_t> perm = row_axes;
    perm.insert(perm.end(), col_axes.begin(), col_axes.end());
    DenseTensor p = permute(perm);
    std::int64_t r = 1, c = 1;
    for (auto a : row_axes) r *= shape_[a];
    for (auto a : col_axes) c *= shape_[a];
    Mat m(r, c);
    for (std::int64_t i = 0; i < r; ++i)
      for (std::int64_t j = 0; j < c; ++j) m(i, j) = p.data_[i * c + j];
    return m;
  }

  static DenseTensor from_matrix(const Mat& m,
                                 std::vector<std::int64_t> shape) {
    DenseTensor out(std::move(shape));
    if (out.size() != m.rows() * m.cols())
      throw ArgError("from_matrix: size mismatch");
    const std::int64_t c = m.cols();
    for (std::int64_t i = 0; i < m.rows(); ++i)
      for (std::int64_t j = 0; j < c; ++j) out.data_[i * c + j] = m(i, j);
    return out;
  }

 private:
  std::vector<std::int64_t> shape_;
  std::vector<cd> data_;
};

// General pairwise contraction: sums axes_a[k] of a against axes_b[k] of b.
// Result axes are a's free axes (original order) then b's free axes.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            const std::vector<std::int64_t>& axes_a,
                            const std::vector<std::int64_t>& axes_b) {
  if (axes_a.size() != axes_b.size())
    throw ArgError("contract: axis list length mismatch");
  for (std::size_t k = 0; k < axes_a.size(); ++k)
    if (a.shape()[axes_a[k]] != b.shape()[axes_b[k]])
      throw ArgError("contract: contracted axis length mismatch");
  std::vector<std::int64_t> free_a, free_b;
  for (std::int64_t k = 0; k < a.rank(); ++k)
    if (std::find(axes_a.begin(), axes_a.end(), k) == axes_a.end())
      free_a.push_back(k);
  for (std::int64_t k = 0; k < b.rank(); ++k)
    if (std::find(axes_b.begin(), axes_b.end(), k) == axes_b.end())
      free_b.push_back(k);
  Mat ma = a.to_matrix(free_a, axes_a);
  Mat mb = b.to_matrix(axes_b, free_b);
  Mat mc = ma * mb;
  std::vector<std::int64_t> out_shape;
  for (auto k : free_a) out_shape.push_back(a.shape()[k]);
  for (auto k : free_b) out_shape.push_back(b.shape()[k]);
  if (out_shape.empty()) out_shape.push_back(1);  // scalar as shape {1}
  return DenseTensor::from_matrix(mc, out_shape);
}

struct SvdSplit {
  Mat u;        // rows x r, isometric columns
  RVec sigma;   // r positive singular values, descending
  Mat vh;       // r x cols, isometric rows
  std::int64_t rank = 0;
};

// Rank-revealing SVD split with the toolkit's relative cutoff
// (sigma > rank_tol * sigma_max * max(rows, cols)).
inline SvdSplit svd_split(const Mat& m, double rank_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  const std::int64_t r =
      numerical_rank(s, std::max(m.rows(), m.cols()), rank_tol);
  SvdSplit out;
  out.rank = r;
  out.u = svd.matrixU().leftCols(r);
  out.sigma = s.head(r);
  out.vh = svd.matrixV().leftCols(r).adjoint();
  return out;
}

// Realignment of an operator on C^{dA} (x) C^{dB}: row (a_out, a_in),
// column (b_out, b_in). Operator Schmidt values are its singular values.
inline Mat realign(const Mat& u, std::int64_t da, std::int64_t db) {
  if (u.rows() != da * db || u.cols() != da * db)
    throw ArgError("realign: operator dims do not match factors");
  Mat r(da * da, db * db);
  for (std::int64_t ao = 0; ao < da; ++ao)
    for (std::int64_t ai = 0; ai < da; ++ai)
      for (std::int64_t bo = 0; bo < db; ++bo)
        for (std::int64_t bi = 0; bi < db; ++bi)
          r(ao * da + ai, bo * db + bi) = u(ao * db + bo, ai * db + bi);
  return r;
}

struct SchmidtSpectrum {
  RVec values;          // all singular values of the realignment, descending
  std::int64_t rank = 0;  // numerical rank at the given tolerance
};

// Operator Schmidt spectrum across the (dA | dB) cut. The squared values
// always sum to ||u||_F^2; rank 1 iff u is a tensor product.
inline SchmidtSpectrum operator_schmidt(const Mat& u, std::int64_t da,
                                        std::int64_t db,
                                        double rank_tol = 1e-10) {
  Mat r = realign(u, da, db);
  Eigen::JacobiSVD<Mat> svd(r);
  SchmidtSpectrum out;
  out.values = svd.singularValues();
  out.rank = numerical_rank(out.values, std::max(r.rows(), r.cols()), rank_tol);
  return out;
}

}  // namespace mpu
