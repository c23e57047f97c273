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
// JSON file formats. Complex numbers are [re, im] pairs throughout.
//
// Chain ("mpu-chain"): sites listed from site 1 (rightmost tensor factor,
// least significant digit) upward; site data is nested [i][j][m][n] with i
// the outgoing physical index, j incoming, m left bond, n right bond.
// Boundary is {"type": "open", "left": [...], "right": [...]},
// {"type": "periodic"} or {"type": "general", "matrix": [[...]]}.
//
// Uniform family ("mpu-uniform"): one repeated site tensor, a boundary
// matrix and the system sizes it should be checked at.
//
// Phase table ("phase-table"): entries [bitstring, theta] with the leftmost
// character of the bitstring the most significant (site N) digit.

#pragma once

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpu/chain.hpp"

namespace mpu {

using json = nlohmann::json;

inline json complex_to_json(const cd& z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ArgError("expected complex number as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ArgError("expected nonempty matrix");
  const std::int64_t rows = static_cast<std::int64_t>(j.size());
  const std::int64_t cols = static_cast<std::int64_t>(j[0].size());
  Mat m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i) {
    if (static_cast<std::int64_t>(j[i].size()) != cols)
      throw ArgError("ragged matrix rows");
    for (std::int64_t c = 0; c < cols; ++c) m(i, c) = complex_from_json(j[i][c]);
  }
  return m;
}

inline json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
  return a;
}

inline Vec vector_from_json(const json& j) {
  if (!j.is_array()) throw ArgError("expected vector");
  Vec v(static_cast<std::int64_t>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<std::int64_t>(i)) = complex_from_json(j[i]);
  return v;
}

inline json site_to_json(const SiteTensor& s) {
  json data = json::array();
  for (std::int64_t i = 0; i < s.d_out; ++i) {
    json ji = json::array();
    for (std::int64_t j = 0; j < s.d_in; ++j) ji.push_back(matrix_to_json(s.block(i, j)));
    data.push_back(std::move(ji));
  }
  return json{{"d_out", s.d_out},
              {"d_in", s.d_in},
              {"D_left", s.d_left},
              {"D_right", s.d_right},
              {"data", std::move(data)}};
}

inline SiteTensor site_from_json(const json& j) {
  for (const char* key : {"d_out", "d_in", "D_left", "D_right", "data"})
    if (!j.contains(key)) throw ArgError(std::string("site missing field ") + key);
  SiteTensor s(j["d_out"].get<std::int64_t>(), j["d_in"].get<std::int64_t>(),
               j["D_left"].get<std::int64_t>(), j["D_right"].get<std::int64_t>());
  const json& data = j["data"];
  if (static_cast<std::int64_t>(data.size()) != s.d_out)
    throw ArgError("site data: d_out mismatch");
  for (std::int64_t i = 0; i < s.d_out; ++i) {
    if (static_cast<std::int64_t>(data[i].size()) != s.d_in)
      throw ArgError("site data: d_in mismatch");
    for (std::int64_t jj = 0; jj < s.d_in; ++jj) {
      Mat m = matrix_from_json(data[i][jj]);
      if (m.rows() != s.d_left || m.cols() != s.d_right)
        throw ArgError("site data: bond dims mismatch");
      s.set_block(i, jj, m);
    }
  }
  return s;
}

inline json chain_to_json(const MpoChain& chain) {
  json sites = json::array();
  for (const auto& s : chain.sites) sites.push_back(site_to_json(s));
  json boundary;
  switch (chain.boundary.kind) {
    case BoundaryKind::kOpen:
      boundary = {{"type", "open"},
                  {"left", vector_to_json(chain.boundary.left)},
                  {"right", vector_to_json(chain.boundary.right)}};
      break;
    case BoundaryKind::kPeriodic:
      boundary = {{"type", "periodic"}};
      break;
    case BoundaryKind::kGeneral:
      boundary = {{"type", "general"},
                  {"matrix", matrix_to_json(chain.boundary.matrix)}};
      break;
  }
  return json{{"format", "mpu-chain"},
              {"version", 1},
              {"sites", std::move(sites)},
              {"boundary", std::move(boundary)}};
}

inline MpoChain chain_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != std::string("mpu-chain"))
    throw ArgError("not an mpu-chain document");
  MpoChain c;
  for (const auto& sj : j.at("sites")) c.sites.push_back(site_from_json(sj));
  const json& b = j.at("boundary");
  const std::string kind = b.at("type").get<std::string>();
  if (kind == "open")
    c.boundary = Boundary::open(vector_from_json(b.at("left")),
                                vector_from_json(b.at("right")));
  else if (kind == "periodic")
    c.boundary = Boundary::periodic();
  else if (kind == "general")
    c.boundary = Boundary::general(matrix_from_json(b.at("matrix")));
  else
    throw ArgError("unknown boundary type: " + kind);
  c.validate();
  return c;
}

// Uniform family: a repeated bulk tensor plus boundary matrix.
struct UniformMpu {
  SiteTensor site;     // square bond: d_left == d_right
  Mat boundary_b;      // closure matrix b
  std::int64_t n_min = 2, n_max = 6;
};

inline json uniform_to_json(const UniformMpu& u) {
  return json{{"format", "mpu-uniform"},
              {"version", 1},
              {"tensor", site_to_json(u.site)},
              {"boundary_matrix", matrix_to_json(u.boundary_b)},
              {"n_range", json::array({u.n_min, u.n_max})}};
}

inline UniformMpu uniform_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != std::string("mpu-uniform"))
    throw ArgError("not an mpu-uniform document");
  UniformMpu u;
  u.site = site_from_json(j.at("tensor"));
  if (u.site.d_left != u.site.d_right)
    throw ArgError("uniform tensor must have square bond");
  u.boundary_b = matrix_from_json(j.at("boundary_matrix"));
  if (u.boundary_b.rows() != u.site.d_left || u.boundary_b.cols() != u.site.d_left)
    throw ArgError("uniform boundary matrix dim mismatch");
  if (j.contains("n_range")) {
    u.n_min = j["n_range"][0].get<std::int64_t>();
    u.n_max = j["n_range"][1].get<std::int64_t>();
  }
  return u;
}

// Instantiates the uniform family at a concrete size.
inline MpoChain uniform_chain(const UniformMpu& u, std::int64_t n) {
  if (n < 1) throw ArgError("uniform_chain: n must be positive");
  MpoChain c;
  c.sites.assign(static_cast<std::size_t>(n), u.site);
  c.boundary = Boundary::general(u.boundary_b);
  return c;
}

// Diagonal phase action on computational bitstrings.
struct PhaseTable {
  std::int64_t n = 0;  // sites
  std::int64_t d = 2;  // local dimension
  std::vector<double> theta;  // length d^n, dense index order

  std::int64_t size() const {
    std::int64_t s = 1;
    for (std::int64_t k = 0; k < n; ++k) s *= d;
    return s;
  }
};

inline std::string index_to_string(std::int64_t idx, std::int64_t n,
                                   std::int64_t d) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (std::int64_t k = n - 1; k >= 0; --k) {
    s[static_cast<std::size_t>(n - 1 - k)] =
        static_cast<char>('0' + (idx / static_cast<std::int64_t>(std::pow(d, k))) % d);
  }
  return s;
}

inline json phase_table_to_json(const PhaseTable& t) {
  json entries = json::array();
  for (std::int64_t i = 0; i < t.size(); ++i)
    entries.push_back(json::array({index_to_string(i, t.n, t.d), t.theta[i]}));
  return json{{"format", "phase-table"},
              {"version", 1},
              {"n", t.n},
              {"d", t.d},
              {"entries", std::move(entries)}};
}

inline PhaseTable phase_table_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != std::string("phase-table"))
    throw ArgError("not a phase-table document");
  PhaseTable t;
  t.n = j.at("n").get<std::int64_t>();
  t.d = j.value("d", 2);
  t.theta.assign(static_cast<std::size_t>(t.size()), 0.0);
  for (const auto& e : j.at("entries")) {
    const std::string bits = e[0].get<std::string>();
    if (static_cast<std::int64_t>(bits.size()) != t.n)
      throw ArgError("phase-table: bitstring length mismatch");
    std::int64_t idx = 0;
    for (char c : bits) {
      const std::int64_t v = c - '0';
      if (v < 0 || v >= t.d) throw ArgError("phase-table: bad digit");
      idx = idx * t.d + v;
    }
    t.theta[static_cast<std::size_t>(idx)] = e[1].get<double>();
  }
  return t;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgError("parse error in " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ArgError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

// Bare matrices are accepted either wrapped ({"format": "matrix", ...}) or
// as a plain nested array.
inline Mat matrix_document(const json& j) {
  if (j.is_object()) {
    if (j.value("format", "") != std::string("matrix"))
      throw ArgError("not a matrix document");
    return matrix_from_json(j.at("data"));
  }
  return matrix_from_json(j);
}

inline json matrix_document_json(const Mat& m) {
  return json{{"format", "matrix"}, {"version", 1}, {"data", matrix_to_json(m)}};
}

}  // namespace mpu
