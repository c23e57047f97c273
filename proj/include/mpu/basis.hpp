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

// Hermitian operator basis {sigma_0 = identity, sigma_1, ...} of M_d with
// Tr(sigma_a sigma_b) = d * delta_ab. For d = 2 these are the Pauli
// matrices; for d > 2 the traceless part is the generalized Gell-Mann set
// scaled by sqrt(d/2). Ordering: for each index pair j < k (row-major) the
// symmetric then the antisymmetric element, then the d-1 diagonal elements.
class HermitianBasis {
 public:
  explicit HermitianBasis(std::int64_t d) : d_(d) {
    if (d < 1) throw ArgError("HermitianBasis: d must be positive");
    elems_.push_back(Mat::Identity(d, d));
    const double s = std::sqrt(static_cast<double>(d) / 2.0);
    for (std::int64_t j = 0; j < d; ++j)
      for (std::int64_t k = j + 1; k < d; ++k) {
        Mat sym = Mat::Zero(d, d);
        sym(j, k) = s;
        sym(k, j) = s;
        elems_.push_back(sym);
        Mat asym = Mat::Zero(d, d);
        asym(j, k) = cd(0, -s);
        asym(k, j) = cd(0, s);
        elems_.push_back(asym);
      }
    for (std::int64_t l = 1; l < d; ++l) {
      Mat h = Mat::Zero(d, d);
      const double f =
          std::sqrt(static_cast<double>(d) / static_cast<double>(l * (l + 1)));
      for (std::int64_t i = 0; i < l; ++i) h(i, i) = f;
      h(l, l) = -f * static_cast<double>(l);
      elems_.push_back(h);
    }
  }

  std::int64_t dim() const { return d_; }
  std::int64_t count() const { return static_cast<std::int64_t>(elems_.size()); }
  const Mat& operator[](std::int64_t a) const { return elems_[a]; }
  const std::vector<Mat>& elements() const { return elems_; }

  // Coefficients c_a with T = sum_a c_a sigma_a, i.e. c_a = Tr(sigma_a T)/d.
  std::vector<cd> decompose(const Mat& t) const {
    if (t.rows() != d_ || t.cols() != d_)
      throw ArgError("HermitianBasis: decompose dim mismatch");
    std::vector<cd> c(elems_.size());
    for (std::size_t a = 0; a < elems_.size(); ++a)
      c[a] = (elems_[a] * t).trace() / static_cast<double>(d_);
    return c;
  }

 private:
  std::int64_t d_;
  std::vector<Mat> elems_;
};

}  // namespace mpu
