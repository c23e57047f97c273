// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mpu-verify Authors

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace mpu;
using namespace mpu::testing;

namespace {

std::mt19937_64 rng_at(std::uint64_t salt) {
  return std::mt19937_64(kDefaultSeed ^ salt);
}

std::vector<std::int64_t> qubit_wires(std::int64_t n) {
  return std::vector<std::int64_t>(static_cast<std::size_t>(n), 2);
}

double rel_diff(const Mat& got, const Mat& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

// Fixed-point state amplitudes of a density matrix: the word (a_k, b_k)
// carries weight Tr[sqrt(rho)^T E_{a_N b_N} ... sqrt(rho)^T E_{a_1 b_1}],
// site N leftmost to match the chain contraction order.
Vec fixed_point_state(const Mat& rho, std::int64_t n) {
  const std::int64_t damb = rho.rows();
  // Support-truncated root: psd_root keeps sub-tolerance eigenvalues in
  // .sqrt, and their sqrt-amplified noise would pollute the amplitudes.
  const PsdRoot root = psd_root(rho, 1e-10);
  const Mat sq = (root.support *
                  root.eigs.tail(root.rank).cwiseSqrt().cast<cd>().asDiagonal() *
                  root.support.adjoint())
                     .transpose();
  const std::int64_t d = damb * damb;
  std::int64_t dim = 1;
  for (std::int64_t k = 0; k < n; ++k) dim *= d;
  Vec psi(dim);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    Mat acc = Mat::Identity(damb, damb);
    std::int64_t rest = idx;
    // Site 1 is the least significant digit; multiply its factor in last.
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t fused = rest % d;
      rest /= d;
      const std::int64_t a = fused / damb, b = fused % damb;
      Mat m = Mat::Zero(damb, damb);
      m.col(b) = sq.col(a);  // sqrt(rho)^T e_a e_b^T
      acc = m * acc;         // higher sites multiply from the left
    }
    psi(idx) = acc.trace();
  }
  return psi;
}

}  // namespace

TEST_CASE("multi-control Z equals the dense reflection on the all-ones word") {
  for (std::int64_t n = 2; n <= 6; ++n) {
    const MpoChain c = multi_control_z(n);
    const Mat got = materialize(c);
    const Mat slow = slow_materialize(c);
    REQUIRE(rel_diff(got, slow) < 1e-13);
    const Mat want = slow_mcz_dense(n);
    REQUIRE(rel_diff(got, want) < 1e-13);
    // 1 - 2|1..1><1..1| exactly.
    const std::int64_t last = got.rows() - 1;
    REQUIRE(got(last, last) == cd(-1.0, 0.0));
    REQUIRE(got(0, 0) == cd(1.0, 0.0));
  }
}

TEST_CASE("control-X staircase family matches its gate circuit") {
  for (std::int64_t n = 2; n <= 5; ++n) {
    const UniformMpu fam = control_x_staircase(n);
    const Mat got = materialize(uniform_chain(fam, n));
    const Mat want = circuit_product(cnot_staircase_gates(n), qubit_wires(n));
    REQUIRE(rel_diff(got, want) < 1e-13);
    REQUIRE(check_unitarity_recursive(uniform_chain(fam, n)).pass);
  }
}

TEST_CASE("one-floor staircases contract to their circuits and are born canonical") {
  auto rng = rng_at(41);
  for (std::int64_t n : {2, 3, 5}) {
    const std::vector<Mat> us = haar_list(n, 4, rng);
    const MpoChain c = staircase(us);
    REQUIRE(c.length() == n);
    const StaircaseCircuit circ = staircase_circuit(us);
    const Mat want = circuit_product(circ.gates, circ.wire_dims);
    REQUIRE(rel_diff(materialize(c), want) < 1e-12);
    REQUIRE(rel_diff(slow_materialize(c), want) < 1e-12);
    REQUIRE(check_canonical_form(c).pass);
    REQUIRE(check_unitarity_recursive(c).pass);
  }
  // Qutrit rungs exercise d > 2.
  const std::vector<Mat> uq = haar_list(2, 9, rng);
  const MpoChain cq = staircase(uq);
  const StaircaseCircuit cc = staircase_circuit(uq);
  REQUIRE(rel_diff(materialize(cq), circuit_product(cc.gates, cc.wire_dims)) <
          1e-12);
  REQUIRE(check_canonical_form(cq).pass);
}

TEST_CASE("two-floor staircases contract to their circuits and are born canonical") {
  auto rng = rng_at(42);
  const std::int64_t n = 4;
  const std::vector<Mat> us = haar_list(n, 4, rng);
  const std::vector<Mat> vs = haar_list(n - 1, 4, rng);
  const MpoChain c = staircase(us, vs);
  for (std::size_t k = 1; k + 1 < c.sites.size(); ++k)
    REQUIRE(c.sites[k].d_left == 4);
  const StaircaseCircuit circ = staircase_circuit(us, vs);
  const Mat want = circuit_product(circ.gates, circ.wire_dims);
  REQUIRE(rel_diff(materialize(c), want) < 1e-12);
  REQUIRE(rel_diff(slow_materialize(c), want) < 1e-12);
  REQUIRE(check_canonical_form(c).pass);
  REQUIRE(check_unitarity_recursive(c).pass);
  REQUIRE_THROWS_AS(staircase(us, haar_list(n, 4, rng)), ArgError);
}

TEST_CASE("staircase detection certifies gates and rebuilds the operator") {
  auto rng = rng_at(43);
  const std::vector<Mat> us = haar_list(4, 4, rng);
  const MpoChain c = staircase(us);
  const Mat dense = materialize(c);

  auto det = staircase_converse_detect(c);
  REQUIRE(det.has_value());
  REQUIRE(det->bond_dims == std::vector<std::int64_t>{1, 2, 2, 2, 1});
  REQUIRE(det->gates.size() == 4);
  REQUIRE(det->max_gate_residual < 1e-10);
  REQUIRE(rel_diff(staircase_gate_product(*det), dense) < 1e-11);

  // Physical dressing plus bond gauges keeps the staircase property; the
  // detected gates rebuild the dressed operator.
  const MpoChain messy = decorate(c, rng);
  auto det2 = staircase_converse_detect(messy);
  REQUIRE(det2.has_value());
  REQUIRE(det2->max_gate_residual < 1e-9);
  REQUIRE(rel_diff(staircase_gate_product(*det2), materialize(messy)) < 1e-9);
}

TEST_CASE("staircase detection rejects non-staircase chains") {
  auto rng = rng_at(44);
  REQUIRE_FALSE(staircase_converse_detect(multi_control_z(4)).has_value());
  REQUIRE_FALSE(
      staircase_converse_detect(random_chain(4, 2, 3, rng)).has_value());
  // Two-floor chains have rectangular end reshapes in the one-floor sense.
  const std::vector<Mat> us = haar_list(3, 4, rng);
  const std::vector<Mat> vs = haar_list(2, 4, rng);
  REQUIRE_FALSE(staircase_converse_detect(staircase(us, vs)).has_value());
  // Product chains are trivial staircases with unit bonds.
  auto det = staircase_converse_detect(identity_chain(4, 2));
  REQUIRE(det.has_value());
  REQUIRE(det->bond_dims == std::vector<std::int64_t>{1, 1, 1, 1, 1});
  REQUIRE(rel_diff(staircase_gate_product(*det),
                   Mat::Identity(16, 16)) < 1e-12);
}

TEST_CASE("automaton multi-control Z instance reproduces the reflection") {
  for (std::int64_t n = 2; n <= 6; ++n) {
    const AutomatonSpec a = mcz_automaton(n);
    const Mat want = slow_mcz_dense(n);
    REQUIRE(rel_diff(automaton_mpu(a), want) < 1e-13);
    const MpoChain c = automaton_mpu_chain(a);
    REQUIRE(rel_diff(slow_materialize(c), want) < 1e-13);
    REQUIRE(check_unitarity_recursive(c).pass);
    // The MPS form carries one phase amplitude per word.
    const Mat psi = slow_materialize(automaton_mps(a));
    REQUIRE(psi.cols() == 1);
    for (std::int64_t i = 0; i < psi.rows(); ++i)
      REQUIRE(std::abs(psi(i, 0) - want(i, i)) < 1e-13);
  }
}

TEST_CASE("random automata induce the diagonal phase unitary they encode") {
  auto rng = rng_at(45);
  for (int trial = 0; trial < 4; ++trial) {
    const std::int64_t d = (trial % 2 == 0) ? 2 : 3;
    const AutomatonSpec a = random_automaton(4, d, 3, rng);
    const Mat dense = automaton_mpu(a);
    const MpoChain c = automaton_mpu_chain(a);
    REQUIRE(rel_diff(slow_materialize(c), dense) < 1e-12);
    REQUIRE(check_unitarity_recursive(c).pass);
    // Every diagonal entry is a pure phase.
    for (std::int64_t i = 0; i < dense.rows(); ++i)
      REQUIRE(std::abs(std::abs(dense(i, i)) - 1.0) < 1e-13);
  }
}

TEST_CASE("automaton ancilla circuit applies the phases and cleans up") {
  auto rng = rng_at(46);
  std::vector<AutomatonSpec> specs;
  specs.push_back(mcz_automaton(4));
  specs.push_back(mcz_automaton(2));
  specs.push_back(random_automaton(4, 2, 3, rng));
  specs.push_back(random_automaton(3, 3, 4, rng));
  for (const AutomatonSpec& a : specs) {
    const Mat u = automaton_mpu(a);
    Vec input = Vec::Zero(u.rows());
    for (std::int64_t i = 0; i < input.size(); ++i)
      input(i) = complex_gauss(rng);
    input /= input.norm();
    const AutomatonSimResult sim = automaton_circuit_simulate(a, input);
    REQUIRE(sim.ancilla_leakage < 1e-12);
    REQUIRE((sim.system_state - u * input).norm() < 1e-12);
  }
  const AutomatonSpec a = mcz_automaton(3);
  Vec bad(3);
  bad.setZero();
  REQUIRE_THROWS_AS(automaton_circuit_simulate(a, bad), ArgError);
}

TEST_CASE("subspace product unitary acts as V on constant words") {
  const Mat h = gate_hadamard();
  const UniformMpu fam = subspace_product_unitary(h, 2);
  REQUIRE(fam.site.d_left == 5);
  for (std::int64_t n = 2; n <= 4; ++n) {
    const MpoChain c = uniform_chain(fam, n);
    const Mat got = (n <= 3) ? slow_materialize(c) : materialize(c);
    const std::int64_t dim = got.rows();
    Mat want = Mat::Identity(dim, dim);
    const std::int64_t ones = dim - 1;
    want(0, 0) += h(0, 0) - 1.0;
    want(0, ones) += h(0, 1);
    want(ones, 0) += h(1, 0);
    want(ones, ones) += h(1, 1) - 1.0;
    REQUIRE(rel_diff(got, want) < 1e-12);
    REQUIRE(check_unitarity_recursive(c).pass);
  }
}

TEST_CASE("subspace product unitary handles qutrits and rejects bad inputs") {
  auto rng = rng_at(47);
  const Mat v = random_unitary(3, rng);
  const UniformMpu fam = subspace_product_unitary(v, 3);
  const std::int64_t n = 2;
  const Mat got = slow_materialize(uniform_chain(fam, n));
  auto constant_word = [&](std::int64_t i) { return i * 3 + i; };  // d=3, n=2
  Mat want = Mat::Identity(9, 9);
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j)
      want(constant_word(i), constant_word(j)) +=
          v(i, j) - (i == j ? 1.0 : 0.0);
  REQUIRE(rel_diff(got, want) < 1e-12);

  // Slot layout: 0 is the identity slot, pairs fill 1..d^2 bijectively.
  std::vector<bool> seen(10, false);
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j) {
      const std::int64_t slot = subspace_pair_slot(i, j, 3);
      REQUIRE(slot >= 1);
      REQUIRE(slot <= 9);
      REQUIRE_FALSE(seen[static_cast<std::size_t>(slot)]);
      seen[static_cast<std::size_t>(slot)] = true;
    }

  REQUIRE_THROWS_AS(subspace_product_unitary(v, 2), ArgError);
  Mat notu = Mat::Identity(2, 2);
  notu(1, 1) = 2.0;
  REQUIRE_THROWS_AS(subspace_product_unitary(notu, 2), ArgError);
}

TEST_CASE("rg subspace unitary on orthogonal pure states swaps basis words") {
  Mat rho0 = Mat::Zero(2, 2), rho1 = Mat::Zero(2, 2);
  rho0(0, 0) = 1.0;
  rho1(1, 1) = 1.0;
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  const UniformMpu fam = rg_subspace_unitary({rho0, rho1}, x);
  for (std::int64_t n = 2; n <= 3; ++n) {
    const MpoChain c = uniform_chain(fam, n);
    const Mat got = slow_materialize(c);
    const std::int64_t dim = got.rows();
    // Fixed points are the constant fused words 0..0 and 3..3 (pair (1,1)).
    std::int64_t w1 = 0;
    for (std::int64_t k = 0, p = 1; k < n; ++k, p *= 4) w1 += 3 * p;
    Mat want = Mat::Identity(dim, dim);
    want(0, 0) = 0.0;
    want(w1, w1) = 0.0;
    want(0, w1) = 1.0;
    want(w1, 0) = 1.0;
    REQUIRE(rel_diff(got, want) < 1e-12);
    REQUIRE(check_unitarity_recursive(c).pass);
  }
}

TEST_CASE("rg subspace unitary matches the fixed-point expansion on mixed supports") {
  auto rng = rng_at(48);
  const Mat q = random_unitary(3, rng);
  RVec w1(3), w2(3);
  w1 << 0.3, 0.7, 0.0;
  w2 << 0.0, 0.0, 1.0;
  const Mat rho1 = q * w1.cast<cd>().asDiagonal() * q.adjoint();
  const Mat rho2 = q * w2.cast<cd>().asDiagonal() * q.adjoint();
  const Mat v = random_unitary(2, rng);
  const UniformMpu fam = rg_subspace_unitary({rho1, rho2}, v);
  REQUIRE(fam.site.d_out == 9);
  REQUIRE(fam.site.d_left == 10);  // identity slot + (2 + 1)^2 support pairs

  for (std::int64_t n = 2; n <= 3; ++n) {
    const MpoChain c = uniform_chain(fam, n);
    const Mat got = (n == 2) ? slow_materialize(c) : materialize(c);
    const Vec psi1 = fixed_point_state(rho1, n);
    const Vec psi2 = fixed_point_state(rho2, n);
    REQUIRE(std::abs(psi1.norm() - 1.0) < 1e-12);
    REQUIRE(std::abs(psi2.norm() - 1.0) < 1e-12);
    REQUIRE(std::abs(psi1.dot(psi2)) < 1e-12);
    const std::int64_t dim = got.rows();
    Mat want = Mat::Identity(dim, dim);
    std::vector<Vec> psis = {psi1, psi2};
    for (std::int64_t i = 0; i < 2; ++i)
      for (std::int64_t j = 0; j < 2; ++j)
        want += (v(i, j) - (i == j ? 1.0 : 0.0)) * psis[static_cast<std::size_t>(i)] *
                psis[static_cast<std::size_t>(j)].adjoint();
    REQUIRE(rel_diff(got, want) < 1e-11);
  }
  REQUIRE(check_unitarity_recursive(uniform_chain(fam, 2)).pass);

  Mat overlap = Mat::Identity(3, 3) / 3.0;
  Mat pure = Mat::Zero(3, 3);
  pure(0, 0) = 1.0;
  REQUIRE_THROWS_AS(rg_subspace_unitary({overlap, pure}, random_unitary(2, rng)),
                    ArgError);
  REQUIRE_THROWS_AS(rg_subspace_unitary({rho1, rho2}, random_unitary(3, rng)),
                    ArgError);
}

TEST_CASE("canonical two-qubit gate reproduces known special points") {
  auto rng = rng_at(49);
  const double q = std::acos(-1.0) / 4.0;
  REQUIRE(rel_diff(canonical_two_qubit_gate(0, 0, 0), Mat::Identity(4, 4)) <
          1e-14);
  // Swap point: exp[i pi/4 (XX+YY+ZZ)] = e^{i pi/4} SWAP.
  const cd w = std::exp(cd(0, q));
  REQUIRE(rel_diff(canonical_two_qubit_gate(q, q, q), w * gate_swap()) <
          1e-13);
  // iSWAP point.
  Mat iswap = Mat::Zero(4, 4);
  iswap(0, 0) = 1.0;
  iswap(3, 3) = 1.0;
  iswap(2, 1) = cd(0, 1);
  iswap(1, 2) = cd(0, 1);
  REQUIRE(rel_diff(canonical_two_qubit_gate(q, q, 0), iswap) < 1e-13);
  for (int trial = 0; trial < 3; ++trial) {
    std::uniform_real_distribution<double> ang(0.0, 2.0);
    const Mat g = canonical_two_qubit_gate(ang(rng), ang(rng), ang(rng));
    REQUIRE((g.adjoint() * g - Mat::Identity(4, 4)).norm() < 1e-13);
  }
}

TEST_CASE("gate Schmidt profile follows the Pauli coefficient magnitudes") {
  auto rng = rng_at(50);
  std::uniform_real_distribution<double> ang(0.0, 1.6);
  for (int trial = 0; trial < 5; ++trial) {
    const double tx = ang(rng), ty = ang(rng), tz = ang(rng);
    const double cx = std::cos(tx), sx = std::sin(tx);
    const double cy = std::cos(ty), sy = std::sin(ty);
    const double cz = std::cos(tz), sz = std::sin(tz);
    std::array<double, 4> lam = {
        std::abs(cd(cx * cy * cz, sx * sy * sz)),
        std::abs(cd(cx * sy * sz, sx * cy * cz)),
        std::abs(cd(cy * sx * sz, sy * cx * cz)),
        std::abs(cd(cz * sx * sy, sz * cx * cy))};
    std::sort(lam.begin(), lam.end(), std::greater<double>());
    const RVec got =
        gate_schmidt_profile(canonical_two_qubit_gate(tx, ty, tz));
    for (int i = 0; i < 4; ++i)
      REQUIRE(std::abs(got(i) - lam[static_cast<std::size_t>(i)]) < 1e-12);
  }
  // Controlled-phase line: profile {cos t, sin t} up to ordering.
  const RVec cp = gate_schmidt_profile(canonical_two_qubit_gate(0, 0, 0.3));
  REQUIRE(std::abs(cp(0) - std::cos(0.3)) < 1e-13);
  REQUIRE(std::abs(cp(1) - std::sin(0.3)) < 1e-13);
  REQUIRE(std::abs(cp(2)) < 1e-13);
  const RVec sw = gate_schmidt_profile(gate_swap());
  for (int i = 0; i < 4; ++i) REQUIRE(std::abs(sw(i) - 0.5) < 1e-13);
  const Mat prod = kron(gate_hadamard(), gate_phase(0.7));
  const RVec pr = gate_schmidt_profile(prod);
  REQUIRE(std::abs(pr(0) - 1.0) < 1e-13);
  REQUIRE(std::abs(pr(1)) < 1e-13);
}

TEST_CASE("left-circuit Schmidt spectrum matches the two-angle closed form") {
  const double pi = std::acos(-1.0);
  // theta_u = theta_v = pi/8: closed form {2, sqrt2, sqrt2, 0} normalized.
  const Prop3Report eq = prop3_schmidt_gap(pi / 8, pi / 8, 8, 10);
  RVec want(4);
  want << 2.0, std::sqrt(2.0), std::sqrt(2.0), 0.0;
  want /= want.norm();
  REQUIRE((eq.target - want).norm() < 1e-9);
  REQUIRE(eq.formula_residual < 1e-9);

  std::mt19937_64 rng = rng_at(51);
  std::uniform_real_distribution<double> ang(0.05, 1.5);
  for (int trial = 0; trial < 3; ++trial) {
    const Prop3Report r =
        prop3_schmidt_gap(ang(rng), ang(rng), 8, 10);
    REQUIRE(r.formula_residual < 1e-9);
    REQUIRE(std::abs(r.target.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("single-gate family reaches degenerate targets but not generic ones") {
  // theta_v = 0 collapses the spectrum to a pairwise-degenerate profile that
  // a single gate with t_y = pi/4 reproduces, so the minimized distance
  // drops to zero; a generic pair stays bounded away.
  const Prop3Report zero = prop3_schmidt_gap(0.3, 0.0, 24, 200);
  REQUIRE(zero.min_distance < 1e-6);
  const Prop3Report gap = prop3_schmidt_gap(0.3, 0.7, 24, 200);
  REQUIRE(gap.gap == gap.min_distance);
  REQUIRE(gap.gap > 1e-3);
}

TEST_CASE("corpus helpers build what their names promise") {
  auto rng = rng_at(52);
  REQUIRE(rel_diff(materialize(identity_chain(5, 2)), Mat::Identity(32, 32)) <
          1e-14);
  const std::vector<Mat> us = haar_list(3, 2, rng);
  const Mat want = kron(us[2], kron(us[1], us[0]));
  REQUIRE(rel_diff(materialize(product_unitary_chain(us)), want) < 1e-13);

  const MpoChain canon = to_canonical_form(multi_control_z(5)).chain;
  const MpoChain messy = decorate(canon, rng);
  REQUIRE_FALSE(check_canonical_form(messy).pass);
  REQUIRE(check_unitarity_recursive(messy).pass);
  for (std::size_t k = 0; k < canon.sites.size(); ++k) {
    REQUIRE(messy.sites[k].d_left == canon.sites[k].d_left);
    REQUIRE(messy.sites[k].d_right == canon.sites[k].d_right);
  }
}
