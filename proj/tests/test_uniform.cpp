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

UniformMpu mcz_uniform(std::int64_t n_max) {
  UniformMpu u;
  u.site = multi_control_z_site();
  Mat b(2, 2);
  b << 1, 1, -2, -2;  // |r><l| with <l| = (1, 1), |r> = (1, -2)
  u.boundary_b = b;
  u.n_min = 2;
  u.n_max = n_max;
  return u;
}

Mat hadamard_2x2() {
  Mat h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

// D = 1 bulk whose blocks are the entries of a single-site unitary, so the
// family is V tensor ... tensor V by construction.
UniformMpu product_bulk(const Mat& v, std::int64_t n_max) {
  const std::int64_t d = v.rows();
  UniformMpu u;
  u.site = SiteTensor(d, d, 1, 1);
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j) u.site.at(i, j, 0, 0) = v(i, j);
  u.boundary_b = Mat::Identity(1, 1);
  u.n_min = 2;
  u.n_max = n_max;
  return u;
}

// Applies the cyclic shift that moves every site one step up (site n wraps
// to site 1) to both index legs of a dense operator on n sites of local
// dimension d. Site 1 is the least significant dense digit.
Mat cyclic_shift_conjugate(const Mat& u, std::int64_t n, std::int64_t d) {
  const std::int64_t dim = u.rows();
  std::vector<std::int64_t> perm(static_cast<std::size_t>(dim));
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    const std::int64_t top = idx / (dim / d);  // digit of site n
    const std::int64_t rest = idx % (dim / d);
    perm[static_cast<std::size_t>(idx)] = rest * d + top;
  }
  Mat out(dim, dim);
  for (std::int64_t r = 0; r < dim; ++r)
    for (std::int64_t c = 0; c < dim; ++c)
      out(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]) =
          u(r, c);
  return out;
}

bool dense_shift_invariant(const UniformMpu& u, std::int64_t n) {
  const Mat dense = materialize(uniform_chain(u, n));
  const Mat shifted = cyclic_shift_conjugate(dense, n, u.site.d_in);
  return (dense - shifted).norm() <= 1e-10 * std::max(1.0, dense.norm());
}

Mat ketbra(std::int64_t i, std::int64_t j) {
  Mat m = Mat::Zero(2, 2);
  m(i, j) = 1.0;
  return m;
}

// Random density matrix with full support, trace normalized to 1.
Mat random_density(std::int64_t d, std::mt19937_64& rng) {
  const Mat g = random_complex_matrix(d, d, rng);
  Mat rho = g * g.adjoint() + 0.05 * Mat::Identity(d, d);
  rho /= rho.trace().real();
  return rho;
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat hermitian_sqrt(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cd>().asDiagonal() *
         es.eigenvectors().adjoint();
}

// The fused physical index of the fixed-point site is io = a * d + b; its
// block B^{(a b)} is the d x d bond matrix at that physical setting.
Mat rg_block(const SiteTensor& t, std::int64_t a, std::int64_t b) {
  const std::int64_t d = t.d_left;
  Mat m(d, d);
  for (std::int64_t r = 0; r < d; ++r)
    for (std::int64_t c = 0; c < d; ++c) m(r, c) = t.at(a * d + b, 0, r, c);
  return m;
}

// Periodic chain of n fixed-point sites; materializes to the d^{2n}-entry
// amplitude column of the length-n fixed-point state.
Vec rg_state(const Mat& rho, std::int64_t n) {
  MpoChain c;
  c.sites.assign(static_cast<std::size_t>(n), rg_fixed_point_tensor(rho));
  c.boundary = Boundary::periodic();
  c.validate();
  return materialize(c).col(0);
}

}  // namespace

TEST_CASE("algebra span: closure dimension and depth", "[uniform][span]") {
  const Mat id2 = Mat::Identity(2, 2);

  const AlgebraSpan only_id = generate_algebra({id2}, false);
  CHECK(only_id.basis.size() == 1);
  CHECK(only_id.complete);

  const AlgebraSpan diag = generate_algebra({ketbra(0, 0)}, true);
  CHECK(diag.basis.size() == 2);
  CHECK(diag.complete);

  // Raising and lowering operators reach the full matrix algebra with the
  // length-two products |0><0| and |1><1|.
  const AlgebraSpan full = generate_algebra({ketbra(0, 1), ketbra(1, 0)}, false);
  CHECK(full.basis.size() == 4);
  CHECK(full.complete);
  CHECK(full.closure_depth == 2);

  const AlgebraSpan capped =
      generate_algebra({ketbra(0, 1), ketbra(1, 0)}, false, 1e-8, 2);
  CHECK_FALSE(capped.complete);

  CHECK_THROWS_AS(generate_algebra({}, false), ArgError);
  CHECK_THROWS_AS(generate_algebra({id2, Mat::Identity(3, 3)}, false), ArgError);
}

TEST_CASE("commutant dimension matches the block structure", "[uniform][span]") {
  // The control-Z bulk word span is diagonal with pattern (x, y, y, y); its
  // commutant is the block algebra M_1 + M_3 of dimension 1 + 9.
  const UniformSpans spans = find_stable_blocking(mcz_uniform(4));
  const std::vector<Mat> comm = commutant(spans.a, 4);
  CHECK(comm.size() == 10);
  for (const Mat& x : comm)
    for (const Mat& f : spans.a) CHECK((x * f - f * x).norm() < 1e-8);

  // Full matrix algebra: commutant is the scalars.
  std::vector<Mat> units;
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 2; ++j) units.push_back(ketbra(i, j));
  CHECK(commutant(units, 2).size() == 1);

  // Empty set: everything commutes.
  CHECK(commutant({}, 2).size() == 4);
}

TEST_CASE("translation invariance: abelian bulk passes", "[uniform][ti]") {
  const UniformMpu u = mcz_uniform(6);
  const TiReport rep = check_translation_invariance(u);
  CHECK(rep.pass);
  CHECK(rep.algebra_complete);
  // Blocks |0><0| and the identity span a two-dimensional abelian algebra.
  CHECK(rep.algebra_dim == 2);
  CHECK(rep.max_violation < 1e-12);

  for (std::int64_t n : {3, 4}) CHECK(dense_shift_invariant(u, n));
}

TEST_CASE("translation invariance: noncommuting closure fails", "[uniform][ti]") {
  // Raising/lowering blocks generate all of M_2; b = |0><1| then pairs with
  // a commutator of trace weight one, e.g. Tr(b [|1><0|, |0><0|]) = 1.
  const TiReport rep =
      check_translation_invariance(ketbra(0, 1), {ketbra(0, 1), ketbra(1, 0)});
  CHECK_FALSE(rep.pass);
  CHECK(rep.algebra_dim == 4);
  CHECK(rep.max_violation > 0.1);

  // The staircase has a direction: its closure matrix fails the criterion and
  // the dense family is indeed not shift invariant.
  const UniformMpu stair = control_x_staircase(4);
  CHECK_FALSE(check_translation_invariance(stair).pass);
  CHECK_FALSE(dense_shift_invariant(stair, 3));

  CHECK_THROWS_AS(check_translation_invariance(Mat::Zero(2, 3), {ketbra(0, 0)}),
                  ArgError);
}

TEST_CASE("translation invariance: diagonal-slot families pass", "[uniform][ti]") {
  const UniformMpu sub = subspace_product_unitary(hadamard_2x2(), 2);
  const TiReport rep = check_translation_invariance(sub);
  CHECK(rep.pass);
  CHECK(dense_shift_invariant(sub, 3));

  auto rng = rng_at(0x7157u);
  const Mat q = haar_list(1, 2, rng)[0];
  const Mat v = haar_list(1, 2, rng)[0];
  std::vector<Mat> rhos = {q * ketbra(0, 0) * q.adjoint(),
                           q * ketbra(1, 1) * q.adjoint()};
  const UniformMpu rg = rg_subspace_unitary(rhos, v);
  CHECK(check_translation_invariance(rg).pass);
  CHECK(dense_shift_invariant(rg, 3));
}

TEST_CASE("uniform unitarity: pass families across the declared range",
          "[uniform][unitarity]") {
  const UniformUnitarityReport mcz = check_uniform_unitarity(mcz_uniform(6));
  CHECK(mcz.pass);
  REQUIRE(mcz.sizes.size() == 5);
  for (const UniformSizeResult& r : mcz.sizes) {
    CHECK(r.check.overall_pass);
    CHECK(r.check.agree);
  }

  CHECK(check_uniform_unitarity(control_x_staircase(5)).pass);

  UniformMpu sub = subspace_product_unitary(hadamard_2x2(), 2);
  sub.n_max = 4;
  CHECK(check_uniform_unitarity(sub).pass);
}

TEST_CASE("uniform unitarity: failing closures are flagged at every size",
          "[uniform][unitarity]") {
  // Tracing the control-Z bulk periodically gives diag(..., 2): never unitary.
  UniformMpu per;
  per.site = multi_control_z_site();
  per.boundary_b = Mat::Identity(2, 2);
  per.n_min = 2;
  per.n_max = 4;
  const UniformUnitarityReport rep = check_uniform_unitarity(per);
  CHECK_FALSE(rep.pass);
  for (const UniformSizeResult& r : rep.sizes) CHECK_FALSE(r.check.overall_pass);

  // Generic random bulk: not unitary either.
  auto rng = rng_at(0x0153u);
  UniformMpu rnd;
  rnd.site = SiteTensor(2, 2, 2, 2);
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 2; ++j)
      for (std::int64_t m = 0; m < 2; ++m)
        for (std::int64_t n = 0; n < 2; ++n)
          rnd.site.at(i, j, m, n) = complex_gauss(rng);
  rnd.boundary_b = random_complex_matrix(2, 2, rng);
  rnd.n_min = 2;
  rnd.n_max = 3;
  CHECK_FALSE(check_uniform_unitarity(rnd).pass);

  UniformMpu bad = mcz_uniform(4);
  bad.n_min = 0;
  CHECK_THROWS_AS(check_uniform_unitarity(bad), ArgError);
  bad.n_min = 5;
  CHECK_THROWS_AS(check_uniform_unitarity(bad), ArgError);
}

TEST_CASE("blocked word spans stabilize at one site", "[uniform][blocking]") {
  // Control-Z bulk: diagonal transfer family, two-dimensional word span with
  // a single traceless direction.
  const TransferFamily tf = local_transfer(multi_control_z_site());
  const UniformSpans spans = find_stable_blocking(tf);
  CHECK(spans.q == 1);
  CHECK(spans.dim == 4);
  CHECK(spans.stabilized);
  CHECK(spans.a.size() == 2);
  REQUIRE(spans.s.size() == 1);

  Vec e_diag(4), s_dir(4);
  e_diag << 1.0, 0.5, 0.5, 0.5;
  s_dir << 0.0, -1.0, -1.0, -1.0;
  s_dir /= std::sqrt(3.0);
  CHECK((spans.e - Mat(e_diag.asDiagonal())).norm() < 1e-12);
  CHECK((spans.s[0] - Mat(s_dir.asDiagonal())).norm() < 1e-12);

  // Control-X staircase: four-dimensional span, three traceless directions,
  // already multiplicatively closed at a single site.
  const UniformSpans cx = find_stable_blocking(control_x_staircase(4));
  CHECK(cx.q == 1);
  CHECK(cx.dim == 4);
  CHECK(cx.stabilized);
  CHECK(cx.a.size() == 4);
  REQUIRE(cx.s.size() == 3);
  CHECK(std::abs(cx.s[0].trace()) < 1e-12);
  CHECK(std::abs(cx.s[1].trace()) < 1e-12);
  CHECK(std::abs(cx.s[2].trace() - 1.0) < 1e-12);

  // Blocking an already stable span cannot grow it.
  const UniformSpans two = uniform_blocked_spans(tf, 2);
  CHECK(two.a.size() == spans.a.size());
  CHECK(detail::equal_span(two.a, spans.a, 1e-8));
  const UniformSpans cx2 = uniform_blocked_spans(local_transfer(
                                                     control_x_staircase(4).site),
                                                 2);
  CHECK(detail::equal_span(cx2.a, cx.a, 1e-8));
}

TEST_CASE("semisimple decomposition: abelian diagonal span", "[uniform][ss]") {
  const UniformSpans spans = find_stable_blocking(mcz_uniform(4));
  const SemisimpleDecomposition dec = semisimple_decompose(spans.a, spans.e);
  REQUIRE(dec.semisimple);
  CHECK(dec.n == 4);
  CHECK(dec.span_dim == 2);
  CHECK(dec.blocks.size() == 4);
  for (const SsBlock& b : dec.blocks) CHECK(b.d == 1);
  REQUIRE(dec.groups.size() == 2);
  CHECK(dec.groups[0].d == 1);
  CHECK(dec.groups[0].m == 1);
  CHECK(dec.groups[1].d == 1);
  CHECK(dec.groups[1].m == 3);
  REQUIRE(dec.groups[0].lambdas.size() == 1);
  CHECK(std::abs(dec.groups[0].lambdas[0] - cd(1.0, 0.0)) < 1e-10);
  for (const cd& l : dec.groups[1].lambdas)
    CHECK(std::abs(l - cd(0.5, 0.0)) < 1e-10);
  CHECK(dec.block_residual < 1e-8);
  CHECK((dec.g * dec.g_inv - Mat::Identity(4, 4)).norm() < 1e-8);

  // Same seed, same decomposition; the group signature is seed independent.
  const SemisimpleDecomposition again = semisimple_decompose(spans.a, spans.e);
  CHECK((again.g - dec.g).norm() < 1e-12);
  const SemisimpleDecomposition other =
      semisimple_decompose(spans.a, spans.e, Tolerances{}, 0x5eedu);
  REQUIRE(other.semisimple);
  REQUIRE(other.groups.size() == 2);
  CHECK(other.groups[0].m == 1);
  CHECK(other.groups[1].m == 3);
}

TEST_CASE("semisimple decomposition: full matrix algebra is one block",
          "[uniform][ss]") {
  std::vector<Mat> units;
  for (std::int64_t i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < 3; ++j) {
      Mat m = Mat::Zero(3, 3);
      m(i, j) = 1.0;
      units.push_back(m);
    }
  const SemisimpleDecomposition dec = semisimple_decompose(units);
  REQUIRE(dec.semisimple);
  REQUIRE(dec.blocks.size() == 1);
  CHECK(dec.blocks[0].d == 3);
  REQUIRE(dec.groups.size() == 1);
  CHECK(dec.groups[0].d == 3);
  CHECK(dec.groups[0].m == 1);
}

TEST_CASE("semisimple decomposition: nilpotent direction is certified",
          "[uniform][ss]") {
  const UniformSpans cx = find_stable_blocking(control_x_staircase(4));
  const SemisimpleDecomposition dec = semisimple_decompose(cx.a, cx.e);
  CHECK_FALSE(dec.semisimple);
  REQUIRE(dec.radical.has_value());
  const RadicalCertificate& rad = *dec.radical;
  CHECK(std::abs(rad.element.norm() - 1.0) < 1e-10);
  CHECK(rad.trace_residual < 1e-8);
  CHECK(rad.nilpotent_norm < 1e-8);
  REQUIRE(rad.invariant_subspace.cols() >= 1);
  REQUIRE(rad.invariant_subspace.cols() < 4);

  // The certified subspace is invariant under the whole span.
  const Mat p = rad.invariant_subspace * rad.invariant_subspace.adjoint();
  const Mat q = Mat::Identity(4, 4) - p;
  for (const Mat& f : cx.a) CHECK((q * f * p).norm() < 1e-8);

  // Sanity on the certificate's meaning: the raw S_X generator is itself
  // trace-orthogonal to the span, so the radical is genuinely nonzero.
  const TransferFamily tf = local_transfer(control_x_staircase(4).site);
  for (const Mat& f : cx.a) CHECK(std::abs((tf.s[0] * f).trace()) < 1e-12);
}

TEST_CASE("structure verification: boundary trace weights", "[uniform][structure]") {
  const UniformMpu u = mcz_uniform(6);
  const UniformSpans spans = find_stable_blocking(u);
  const SemisimpleDecomposition dec = semisimple_decompose(spans.a, spans.e);
  REQUIRE(dec.semisimple);
  const Mat bq = doubled_boundary(u.boundary_b);

  // The doubled boundary is conj(b) x b; on the diagonal blocks its weights
  // are (1, -2, -2, 4): unit weight on the identity block, and the lambda =
  // 1/2 class cancels (-2 - 2 + 4 = 0).
  const StructureReport rep =
      verify_semisimple_structure(dec, spans.e, spans.s, bq);
  CHECK(rep.pass);
  CHECK(rep.identity_blocks == 1);
  CHECK(rep.witness_blocks == 3);
  CHECK(rep.scalar_blocks == 0);
  CHECK(rep.null_blocks == 0);
  CHECK(rep.words_checked > 0);
  for (const StructureItem& item : rep.items) {
    INFO(item.what << " residual " << item.residual);
    CHECK(item.pass);
  }

  // Trivial bulk: one identity block and nothing else.
  const UniformMpu prod = product_bulk(hadamard_2x2(), 4);
  const UniformSpans pspans = find_stable_blocking(prod);
  CHECK(pspans.s.empty());
  const SemisimpleDecomposition pdec = semisimple_decompose(pspans.a, pspans.e);
  REQUIRE(pdec.semisimple);
  const StructureReport prep = verify_semisimple_structure(
      pdec, pspans.e, pspans.s, doubled_boundary(prod.boundary_b));
  CHECK(prep.pass);
  CHECK(prep.identity_blocks == 1);
  CHECK(prep.witness_blocks == 0);

  // Non-semisimple input is a contract violation.
  const UniformSpans cx = find_stable_blocking(control_x_staircase(4));
  const SemisimpleDecomposition cxdec = semisimple_decompose(cx.a, cx.e);
  CHECK_THROWS_AS(
      verify_semisimple_structure(cxdec, cx.e, cx.s, Mat::Identity(4, 4)),
      ArgError);
}

TEST_CASE("factorization: product bulk splits with the right local gate",
          "[uniform][factorization]") {
  const Mat h = hadamard_2x2();
  const UniformMpu prod = product_bulk(h, 5);
  const FactorizationReport rep = check_factorization(prod);
  REQUIRE(rep.factorizes);
  CHECK(rep.schmidt_ratio < 1e-10);
  CHECK(rep.max_residual < 1e-7);
  CHECK(std::abs(rep.phase_step - cd(1.0, 0.0)) < 1e-8);
  REQUIRE(rep.v.rows() == 2);
  // V is the Hadamard up to a global phase.
  const cd z = (rep.v.adjoint() * h).trace() / 2.0;
  CHECK(std::abs(std::abs(z) - 1.0) < 1e-8);
  CHECK((rep.v * z - h).norm() < 1e-8);

  // The spans-supplied overload agrees with the convenience form.
  const FactorizationReport same =
      check_factorization(prod, find_stable_blocking(prod));
  CHECK(same.factorizes == rep.factorizes);
  CHECK((same.v - rep.v).norm() < 1e-12);
}

TEST_CASE("factorization: trace witnesses obstruct entangling bulks",
          "[uniform][factorization]") {
  // Control-Z bulk: the single traceless direction has trace -sqrt(3) after
  // normalization (raw weight -3/2 against Frobenius norm sqrt(3)/2).
  const FactorizationReport mcz = check_factorization(mcz_uniform(5));
  CHECK_FALSE(mcz.factorizes);
  REQUIRE(mcz.witness_word == std::vector<std::int64_t>{1});
  CHECK(std::abs(mcz.witness_value - std::sqrt(3.0)) < 1e-10);

  // Control-X staircase: the third traceless direction carries unit trace.
  const FactorizationReport cx = check_factorization(control_x_staircase(4));
  CHECK_FALSE(cx.factorizes);
  REQUIRE(cx.witness_word == std::vector<std::int64_t>{3});
  CHECK(std::abs(cx.witness_value - 1.0) < 1e-10);
}

TEST_CASE("fixed-point site tensor: entries, weight, blocking identity",
          "[uniform][rg]") {
  const Mat half = 0.5 * Mat::Identity(2, 2);
  const SiteTensor t = rg_fixed_point_tensor(half);
  CHECK(t.d_out == 4);
  CHECK(t.d_in == 1);
  CHECK(t.d_left == 2);
  CHECK(t.d_right == 2);

  // Entries sqrt(rho)(a, m) delta(b, n) with sqrt(1/2) = 1/sqrt(2) identity;
  // squared Frobenius weight d * Tr(rho) = 2.
  double w2 = 0;
  for (std::int64_t a = 0; a < 2; ++a)
    for (std::int64_t b = 0; b < 2; ++b)
      for (std::int64_t m = 0; m < 2; ++m)
        for (std::int64_t n = 0; n < 2; ++n) {
          const cd got = t.at(a * 2 + b, 0, m, n);
          const cd want =
              (a == m && b == n) ? cd(1.0 / std::sqrt(2.0), 0.0) : cd(0.0, 0.0);
          CHECK(std::abs(got - want) < 1e-12);
          w2 += std::norm(got);
        }
  CHECK(std::abs(w2 - 2.0) < 1e-12);

  // Blocking two sites reproduces the tensor up to sqrt(rho) weights:
  // B^{(ab)} B^{(ce)} = sqrt(rho)(c, b) B^{(ae)}. That is the fixed-point
  // property under real-space renormalization.
  for (std::int64_t d : {2, 3}) {
    auto rng = rng_at(0x2006u + static_cast<std::uint64_t>(d));
    const Mat rho = random_density(d, rng);
    const Mat sq = hermitian_sqrt(rho);
    const SiteTensor ft = rg_fixed_point_tensor(rho);
    for (std::int64_t a = 0; a < d; ++a)
      for (std::int64_t b = 0; b < d; ++b)
        for (std::int64_t c = 0; c < d; ++c)
          for (std::int64_t e = 0; e < d; ++e) {
            const Mat lhs = rg_block(ft, a, b) * rg_block(ft, c, e);
            const Mat rhs = sq(c, b) * rg_block(ft, a, e);
            REQUIRE((lhs - rhs).norm() < 1e-10);
          }
  }

  CHECK_THROWS_AS(rg_fixed_point_tensor(diag2(1.0, -0.1)),
                  ArgError);
  Mat skew(2, 2);
  skew << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(rg_fixed_point_tensor(skew), ArgError);
}

TEST_CASE("fixed-point states: overlaps follow the root trace", "[uniform][rg]") {
  auto rng = rng_at(0xf1f0u);
  const Mat rho1 = random_density(2, rng);
  const Mat rho2 = random_density(2, rng);
  const cd pair_trace = (hermitian_sqrt(rho1) * hermitian_sqrt(rho2)).trace();

  for (std::int64_t n : {2, 3}) {
    const Vec psi1 = rg_state(rho1, n);
    const Vec psi2 = rg_state(rho2, n);
    // Trace-normalized inputs give unit-norm states at every length.
    CHECK(std::abs(psi1.norm() - 1.0) < 1e-10);
    CHECK(std::abs(psi2.norm() - 1.0) < 1e-10);
    // <Psi_rho | Psi_sigma> = Tr(sqrt(rho) sqrt(sigma))^n.
    const cd want = std::pow(pair_trace, static_cast<double>(n));
    CHECK(std::abs(psi1.dot(psi2) - want) < 1e-10);
  }

  // Orthogonal supports: exactly orthogonal states, the unitarity mechanism
  // of the subspace construction.
  const Mat q = haar_list(1, 2, rng)[0];
  const Mat pa = q * diag2(1.0, 0.0) * q.adjoint();
  const Mat pb = q * diag2(0.0, 1.0) * q.adjoint();
  for (std::int64_t n : {2, 3})
    CHECK(std::abs(rg_state(pa, n).dot(rg_state(pb, n))) < 1e-10);
}

TEST_CASE("uniform analysis: end-to-end verdicts", "[uniform][analysis]") {
  // Product bulk: everything passes and the family factorizes.
  const UniformReport prod = analyze_uniform(product_bulk(hadamard_2x2(), 4));
  CHECK(prod.pass);
  CHECK(prod.ti.pass);
  CHECK(prod.unitarity.pass);
  REQUIRE(prod.structure.has_value());
  CHECK(prod.structure->pass);
  CHECK(prod.factorization.factorizes);

  // Control-Z bulk: passes with a three-member cancellation class, does not
  // factorize.
  const UniformReport mcz = analyze_uniform(mcz_uniform(5));
  CHECK(mcz.pass);
  CHECK(mcz.ti.pass);
  CHECK(mcz.unitarity.pass);
  REQUIRE(mcz.decomposition.semisimple);
  REQUIRE(mcz.structure.has_value());
  CHECK(mcz.structure->pass);
  CHECK(mcz.structure->identity_blocks == 1);
  CHECK(mcz.structure->witness_blocks == 3);
  CHECK_FALSE(mcz.factorization.factorizes);

  // Staircase: unitary at every size but directional, and its word span is
  // not semisimple, so no structure report is produced.
  const UniformReport cx = analyze_uniform(control_x_staircase(4));
  CHECK_FALSE(cx.pass);
  CHECK_FALSE(cx.ti.pass);
  CHECK(cx.unitarity.pass);
  CHECK_FALSE(cx.decomposition.semisimple);
  CHECK(cx.decomposition.radical.has_value());
  CHECK_FALSE(cx.structure.has_value());

  // Subspace product bulk at D = 5.
  UniformMpu sub = subspace_product_unitary(hadamard_2x2(), 2);
  sub.n_max = 4;
  const UniformReport srep = analyze_uniform(sub);
  CHECK(srep.pass);
  CHECK(srep.ti.pass);
  CHECK(srep.unitarity.pass);

  // Fixed-point subspace family: the composite verdict equals its parts.
  auto rng = rng_at(0xa7a7u);
  const Mat q = haar_list(1, 2, rng)[0];
  const Mat v = haar_list(1, 2, rng)[0];
  UniformMpu rg = rg_subspace_unitary(
      {q * diag2(1.0, 0.0) * q.adjoint(),
       q * diag2(0.0, 1.0) * q.adjoint()},
      v);
  rg.n_max = 3;
  const UniformReport rrep = analyze_uniform(rg);
  CHECK(rrep.ti.pass);
  CHECK(rrep.unitarity.pass);
  CHECK(rrep.pass == (rrep.ti.pass && rrep.unitarity.pass &&
                      (!rrep.structure || rrep.structure->pass)));
}
