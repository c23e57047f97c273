// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mpu-verify Authors

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"

using namespace mpu;
using namespace mpu::testing;

namespace {

std::mt19937_64 rng_at(std::uint64_t salt) {
  return std::mt19937_64(kDefaultSeed ^ salt);
}

// Unique scratch path that cleans itself up when the section ends.
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& stem) {
    path = (std::filesystem::temp_directory_path() /
            (stem + "-" + std::to_string(::getpid()) + ".json"))
               .string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

bool chains_equal(const MpoChain& a, const MpoChain& b, double tol) {
  if (a.length() != b.length()) return false;
  for (std::int64_t k = 0; k < a.length(); ++k) {
    const SiteTensor& sa = a.sites[static_cast<std::size_t>(k)];
    const SiteTensor& sb = b.sites[static_cast<std::size_t>(k)];
    if (sa.d_out != sb.d_out || sa.d_in != sb.d_in ||
        sa.d_left != sb.d_left || sa.d_right != sb.d_right)
      return false;
    for (std::int64_t i = 0; i < sa.d_out; ++i)
      for (std::int64_t j = 0; j < sa.d_in; ++j)
        if ((sa.block(i, j) - sb.block(i, j)).norm() > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("complex, vector, and matrix JSON primitives round-trip") {
  auto rng = rng_at(61);

  SECTION("complex numbers are [re, im] pairs") {
    const cd z(1.25, -3.5);
    const json j = complex_to_json(z);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    REQUIRE(j[0].get<double>() == 1.25);
    REQUIRE(j[1].get<double>() == -3.5);
    REQUIRE(complex_from_json(j) == z);
    REQUIRE_THROWS_AS(complex_from_json(json::array({1.0})), ArgError);
    REQUIRE_THROWS_AS(complex_from_json(json{{"re", 1.0}}), ArgError);
  }

  SECTION("matrices round-trip entrywise") {
    const Mat m = random_complex_matrix(3, 4, rng);
    const Mat back = matrix_from_json(matrix_to_json(m));
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 4);
    REQUIRE((back - m).norm() == 0.0);
  }

  SECTION("ragged or empty matrices are rejected") {
    json ragged = json::array();
    ragged.push_back(json::array({complex_to_json(cd(1, 0)), complex_to_json(cd(2, 0))}));
    ragged.push_back(json::array({complex_to_json(cd(3, 0))}));
    REQUIRE_THROWS_AS(matrix_from_json(ragged), ArgError);
    REQUIRE_THROWS_AS(matrix_from_json(json::array()), ArgError);
    REQUIRE_THROWS_AS(matrix_from_json(json{{"rows", 2}}), ArgError);
  }

  SECTION("vectors round-trip") {
    Vec v(3);
    v << cd(1, 2), cd(-0.5, 0), cd(0, 7);
    const Vec back = vector_from_json(vector_to_json(v));
    REQUIRE((back - v).norm() == 0.0);
    REQUIRE_THROWS_AS(vector_from_json(json{{"v", 1}}), ArgError);
  }
}

TEST_CASE("site tensors serialize with fixed field names and [i][j][m][n] data") {
  auto rng = rng_at(62);
  SiteTensor s(2, 3, 2, 4);
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 3; ++j)
      for (std::int64_t m = 0; m < 2; ++m)
        for (std::int64_t n = 0; n < 4; ++n) s.at(i, j, m, n) = complex_gauss(rng);

  const json j = site_to_json(s);

  SECTION("field names are exactly the documented ones") {
    REQUIRE(j.at("d_out").get<std::int64_t>() == 2);
    REQUIRE(j.at("d_in").get<std::int64_t>() == 3);
    REQUIRE(j.at("D_left").get<std::int64_t>() == 2);
    REQUIRE(j.at("D_right").get<std::int64_t>() == 4);
    REQUIRE(j.contains("data"));
  }

  SECTION("data nesting is outgoing, incoming, left bond, right bond") {
    const cd want = s.at(1, 2, 0, 3);
    const cd got = complex_from_json(j.at("data")[1][2][0][3]);
    REQUIRE(std::abs(got - want) == 0.0);
  }

  SECTION("round-trip preserves every entry") {
    const SiteTensor back = site_from_json(j);
    REQUIRE(back.d_out == 2);
    REQUIRE(back.d_in == 3);
    for (std::int64_t i = 0; i < 2; ++i)
      for (std::int64_t jj = 0; jj < 3; ++jj)
        REQUIRE((back.block(i, jj) - s.block(i, jj)).norm() == 0.0);
  }

  SECTION("missing fields and shape mismatches are rejected") {
    for (const char* key : {"d_out", "d_in", "D_left", "D_right", "data"}) {
      json broken = j;
      broken.erase(key);
      REQUIRE_THROWS_AS(site_from_json(broken), ArgError);
    }
    json wrong = j;
    wrong["D_right"] = 5;  // data blocks are still 2 x 4
    REQUIRE_THROWS_AS(site_from_json(wrong), ArgError);
    json fewer = j;
    fewer["data"].erase(1);
    REQUIRE_THROWS_AS(site_from_json(fewer), ArgError);
  }
}

TEST_CASE("chain documents round-trip for every boundary kind") {
  auto rng = rng_at(63);

  SECTION("open boundary") {
    const MpoChain c = multi_control_z(4);
    const json j = chain_to_json(c);
    REQUIRE(j.at("format").get<std::string>() == "mpu-chain");
    REQUIRE(j.at("version").get<int>() == 1);
    REQUIRE(j.at("boundary").at("type").get<std::string>() == "open");
    const MpoChain back = chain_from_json(j);
    REQUIRE(chains_equal(c, back, 0.0));
    REQUIRE((materialize(back) - materialize(c)).norm() < 1e-14);
  }

  SECTION("sites are listed from site 1 upward") {
    std::vector<Mat> us = {gate_hadamard(), gate_phase(0.7)};
    const MpoChain c = product_unitary_chain(us);
    const json j = chain_to_json(c);
    const cd h00 = complex_from_json(j.at("sites")[0].at("data")[0][0][0][0]);
    REQUIRE(std::abs(h00 - cd(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  }

  SECTION("periodic boundary") {
    MpoChain c;
    for (int k = 0; k < 3; ++k) c.sites.push_back(multi_control_z_site());
    c.boundary = Boundary::periodic();
    const MpoChain back = chain_from_json(chain_to_json(c));
    REQUIRE(back.boundary.kind == BoundaryKind::kPeriodic);
    REQUIRE(chains_equal(c, back, 0.0));
  }

  SECTION("general boundary") {
    const MpoChain c = uniform_chain(control_x_staircase(3), 3);
    const MpoChain back = chain_from_json(chain_to_json(c));
    REQUIRE(back.boundary.kind == BoundaryKind::kGeneral);
    REQUIRE((back.boundary.matrix - c.boundary.matrix).norm() == 0.0);
    REQUIRE((materialize(back) - materialize(c)).norm() < 1e-14);
  }

  SECTION("random chain with haphazard bonds survives the trip") {
    const MpoChain c = random_chain(4, 2, 3, rng);
    REQUIRE(chains_equal(c, chain_from_json(chain_to_json(c)), 0.0));
  }

  SECTION("malformed documents are rejected") {
    REQUIRE_THROWS_AS(chain_from_json(json{{"format", "something-else"}}),
                      ArgError);
    REQUIRE_THROWS_AS(chain_from_json(json::array()), ArgError);

    json j = chain_to_json(multi_control_z(3));
    json bad_boundary = j;
    bad_boundary["boundary"] = json{{"type", "twisted"}};
    REQUIRE_THROWS_AS(chain_from_json(bad_boundary), ArgError);

    // Bond mismatch between adjacent sites must fail chain validation.
    json bad_bond = j;
    json wide = site_to_json(SiteTensor(2, 2, 3, 3));
    bad_bond["sites"][1] = wide;
    REQUIRE_THROWS_AS(chain_from_json(bad_bond), ArgError);
  }
}

TEST_CASE("uniform family documents round-trip and validate their shape") {
  const UniformMpu u = control_x_staircase(4);

  SECTION("round-trip") {
    const json j = uniform_to_json(u);
    REQUIRE(j.at("format").get<std::string>() == "mpu-uniform");
    const UniformMpu back = uniform_from_json(j);
    REQUIRE(back.n_min == u.n_min);
    REQUIRE(back.n_max == u.n_max);
    REQUIRE((back.boundary_b - u.boundary_b).norm() == 0.0);
    for (std::int64_t i = 0; i < 2; ++i)
      for (std::int64_t j2 = 0; j2 < 2; ++j2)
        REQUIRE((back.site.block(i, j2) - u.site.block(i, j2)).norm() == 0.0);
  }

  SECTION("n_range is optional and defaults to [2, 6]") {
    json j = uniform_to_json(u);
    j.erase("n_range");
    const UniformMpu back = uniform_from_json(j);
    REQUIRE(back.n_min == 2);
    REQUIRE(back.n_max == 6);
  }

  SECTION("non-square bond tensors are rejected") {
    json j = uniform_to_json(u);
    j["tensor"] = site_to_json(SiteTensor(2, 2, 3, 2));
    REQUIRE_THROWS_AS(uniform_from_json(j), ArgError);
  }

  SECTION("boundary matrix must match the bond dimension") {
    json j = uniform_to_json(u);
    j["boundary_matrix"] = matrix_to_json(Mat::Identity(3, 3));
    REQUIRE_THROWS_AS(uniform_from_json(j), ArgError);
  }

  SECTION("wrong format tag is rejected") {
    REQUIRE_THROWS_AS(uniform_from_json(json{{"format", "mpu-chain"}}),
                      ArgError);
  }

  SECTION("instantiation repeats the tensor with the general boundary") {
    const MpoChain c = uniform_chain(u, 3);
    REQUIRE(c.length() == 3);
    REQUIRE(c.boundary.kind == BoundaryKind::kGeneral);
    REQUIRE((materialize(c) - slow_materialize(c)).norm() < 1e-12);
    REQUIRE_THROWS_AS(uniform_chain(u, 0), ArgError);
  }
}

TEST_CASE("phase tables round-trip with most-significant-first bitstrings") {
  SECTION("index_to_string puts the top site leftmost") {
    REQUIRE(index_to_string(6, 3, 2) == "110");
    REQUIRE(index_to_string(1, 3, 2) == "001");
    REQUIRE(index_to_string(5, 2, 3) == "12");
  }

  SECTION("round-trip of a dense table") {
    PhaseTable t;
    t.n = 3;
    t.d = 2;
    t.theta.resize(8);
    for (std::size_t i = 0; i < 8; ++i)
      t.theta[i] = 0.25 * static_cast<double>(i);
    const json j = phase_table_to_json(t);
    REQUIRE(j.at("format").get<std::string>() == "phase-table");
    REQUIRE(j.at("entries").size() == 8);
    // Entry 6 pairs the bitstring "110" with theta[6].
    REQUIRE(j.at("entries")[6][0].get<std::string>() == "110");
    REQUIRE(j.at("entries")[6][1].get<double>() == 1.5);
    const PhaseTable back = phase_table_from_json(j);
    REQUIRE(back.n == 3);
    REQUIRE(back.d == 2);
    REQUIRE(back.theta == t.theta);
  }

  SECTION("local dimension defaults to 2 when absent") {
    json j = json{{"format", "phase-table"},
                  {"version", 1},
                  {"n", 1},
                  {"entries", json::array({json::array({"1", 3.14})})}};
    const PhaseTable t = phase_table_from_json(j);
    REQUIRE(t.d == 2);
    REQUIRE(t.theta[1] == 3.14);
    REQUIRE(t.theta[0] == 0.0);
  }

  SECTION("bad digits and wrong lengths are rejected") {
    json j = json{{"format", "phase-table"},
                  {"n", 2},
                  {"d", 2},
                  {"entries", json::array({json::array({"12", 0.5})})}};
    REQUIRE_THROWS_AS(phase_table_from_json(j), ArgError);
    j["entries"] = json::array({json::array({"011", 0.5})});
    REQUIRE_THROWS_AS(phase_table_from_json(j), ArgError);
    REQUIRE_THROWS_AS(phase_table_from_json(json{{"format", "chain"}}),
                      ArgError);
  }
}

TEST_CASE("matrix documents accept wrapped and bare forms") {
  auto rng = rng_at(64);
  const Mat m = random_complex_matrix(2, 3, rng);

  SECTION("wrapped document round-trips") {
    const json j = matrix_document_json(m);
    REQUIRE(j.at("format").get<std::string>() == "matrix");
    REQUIRE((matrix_document(j) - m).norm() == 0.0);
  }

  SECTION("a plain nested array is accepted as-is") {
    REQUIRE((matrix_document(matrix_to_json(m)) - m).norm() == 0.0);
  }

  SECTION("objects with another format tag are rejected") {
    REQUIRE_THROWS_AS(matrix_document(json{{"format", "mpu-chain"}}), ArgError);
  }
}

TEST_CASE("JSON files save and load through the filesystem") {
  SECTION("chain file round-trip") {
    TempFile tmp("mpu-format-chain");
    const MpoChain c = multi_control_z(3);
    save_json_file(tmp.path, chain_to_json(c));
    const MpoChain back = chain_from_json(load_json_file(tmp.path));
    REQUIRE(chains_equal(c, back, 0.0));
  }

  SECTION("missing files are reported by name") {
    REQUIRE_THROWS_WITH(load_json_file("/nonexistent/mpu-nowhere.json"),
                        Catch::Matchers::ContainsSubstring("mpu-nowhere"));
  }

  SECTION("parse errors are wrapped in the library error type") {
    TempFile tmp("mpu-format-garbage");
    std::ofstream(tmp.path) << "{ not json at all";
    REQUIRE_THROWS_AS(load_json_file(tmp.path), ArgError);
  }

  SECTION("unwritable paths are rejected") {
    REQUIRE_THROWS_AS(save_json_file("/nonexistent/dir/out.json", json{}),
                      ArgError);
  }
}
