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
// Uniform-bulk analysis. A uniform family (one repeated site tensor plus a
// closure matrix) is probed size by size for unitarity, tested for
// translation invariance of the closure, and its transfer span is blocked
// until multiplicatively stable. The stable span is then split into
// irreducible blocks when its trace form is nondegenerate, with a certified
// radical element otherwise, and the closure weights are checked against the
// structural constraints that unitarity at every size imposes on the blocks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mpu/chain.hpp"
#include "mpu/core.hpp"
#include "mpu/format.hpp"
#include "mpu/oracle.hpp"
#include "mpu/span.hpp"
#include "mpu/transfer.hpp"
#include "mpu/unitarity.hpp"

namespace mpu {

namespace detail {

// Frobenius inner product <a, b> with the first argument conjugated.
inline cd frob_inner(const Mat& a, const Mat& b) {
  return (a.conjugate().array() * b.array()).sum();
}

// Tr(a b) without forming the product.
inline cd trace_product(const Mat& a, const Mat& b) {
  return (a.array() * b.transpose().array()).sum();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Translation invariance of the closure.

struct TiReport {
  bool pass = false;
  double max_violation = 0;  // worst |Tr(b [X, Y])| over algebra basis pairs
  std::int64_t algebra_dim = 0;
  bool algebra_complete = true;  // false when the span cap stopped the closure
};

// The operator family is invariant under cyclic shifts iff the closure
// matrix commutes with the algebra generated by the site blocks inside the
// trace: Tr(b [X, Y]) = 0 for all X, Y in that algebra. Bilinearity makes a
// basis sweep sufficient.
inline TiReport check_translation_invariance(const Mat& b,
                                             const std::vector<Mat>& gens,
                                             double tol = 1e-10,
                                             double span_tol = 1e-8) {
  if (b.rows() != b.cols()) throw ArgError("ti check: closure must be square");
  AlgebraSpan alg = generate_algebra(gens, /*include_identity=*/false, span_tol);
  TiReport rep;
  rep.algebra_dim = static_cast<std::int64_t>(alg.basis.size());
  rep.algebra_complete = alg.complete;
  for (std::size_t x = 0; x < alg.basis.size(); ++x)
    for (std::size_t y = x + 1; y < alg.basis.size(); ++y) {
      const Mat comm = alg.basis[x] * alg.basis[y] - alg.basis[y] * alg.basis[x];
      rep.max_violation =
          std::max(rep.max_violation, std::abs(detail::trace_product(b, comm)));
    }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

inline TiReport check_translation_invariance(const UniformMpu& u,
                                             double tol = 1e-10) {
  std::vector<Mat> gens;
  gens.reserve(static_cast<std::size_t>(u.site.d_out * u.site.d_in));
  for (std::int64_t i = 0; i < u.site.d_out; ++i)
    for (std::int64_t j = 0; j < u.site.d_in; ++j)
      gens.push_back(u.site.block(i, j));
  return check_translation_invariance(u.boundary_b, gens, tol);
}

// ---------------------------------------------------------------------------
// Size-by-size unitarity.

struct UniformSizeResult {
  std::int64_t n = 0;
  CrossValidation check;
};

struct UniformUnitarityReport {
  bool pass = false;  // every size passes and no route disagrees
  std::vector<UniformSizeResult> sizes;
};

// Runs the recursive check, and where affordable the exhaustive string and
// dense routes, at every size in the family's declared range.
inline UniformUnitarityReport check_uniform_unitarity(const UniformMpu& u,
                                                      const OracleConfig& cfg = {}) {
  if (u.n_min < 1 || u.n_max < u.n_min)
    throw ArgError("uniform unitarity: bad size range");
  UniformUnitarityReport rep;
  rep.pass = true;
  for (std::int64_t n = u.n_min; n <= u.n_max; ++n) {
    UniformSizeResult r;
    r.n = n;
    r.check = cross_validate(uniform_chain(u, n), cfg);
    rep.pass = rep.pass && r.check.overall_pass;
    rep.sizes.push_back(std::move(r));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Blocked transfer spans.

struct UniformSpans {
  std::int64_t q = 1;     // sites per block
  std::int64_t dim = 0;   // doubled bond dimension (matrices are dim x dim)
  Mat e;                  // blocked identity-weight generator E^q
  std::vector<Mat> s;     // orthonormal basis of the blocked traceless sector
  std::vector<Mat> a;     // orthonormal basis of the full length-q word span
  bool stabilized = false;  // span of length-2q words equals the length-q span
};

namespace detail {

// Orthonormal span of length-k generator words, built level by level:
// words of length k+1 are spanned by (basis of length k) times a generator.
// The traceless sector tracks words containing at least one S generator;
// E^k is carried separately so pure-E prefixes stay available.
struct WordLevels {
  std::vector<std::vector<Mat>> w;  // w[k]: orthonormal basis, words of length k
  std::vector<std::vector<Mat>> s;  // s[k]: same, words with >= 1 S factor
  std::vector<Mat> e_pow;           // e_pow[k] = E^k
};

inline WordLevels word_levels(const TransferFamily& tf, std::int64_t depth,
                              double span_tol) {
  if (tf.bond_left != tf.bond_right)
    throw ArgError("blocked spans: transfer family must have square bond");
  const std::int64_t n = tf.e.rows();
  std::vector<Mat> gens;
  gens.push_back(tf.e);
  for (const Mat& m : tf.s) gens.push_back(m);

  WordLevels lv;
  lv.w.resize(static_cast<std::size_t>(depth) + 1);
  lv.s.resize(static_cast<std::size_t>(depth) + 1);
  lv.e_pow.resize(static_cast<std::size_t>(depth) + 1);
  lv.e_pow[0] = Mat::Identity(n, n);

  auto build = [&](const std::vector<Mat>& prev, const std::vector<Mat>& extra) {
    SpanBasis sp(SpanField::kComplex, span_tol);
    for (const Mat& p : prev)
      for (const Mat& g : gens) sp.add(flatten(p * g));
    for (const Mat& m : extra) sp.add(flatten(m));
    std::vector<Mat> out;
    out.reserve(sp.vectors().size());
    for (const Vec& v : sp.vectors()) out.push_back(unflatten(v, n, n));
    return out;
  };

  for (std::int64_t k = 1; k <= depth; ++k) {
    lv.e_pow[k] = lv.e_pow[k - 1] * tf.e;
    if (k == 1) {
      lv.w[1] = build({}, gens);
      lv.s[1] = build({}, tf.s);
      continue;
    }
    lv.w[k] = build(lv.w[k - 1], {});
    std::vector<Mat> fresh;  // words whose only S factor is the last letter
    for (const Mat& m : tf.s) fresh.push_back(lv.e_pow[k - 1] * m);
    lv.s[k] = build(lv.s[k - 1], fresh);
  }
  return lv;
}

inline bool equal_span(const std::vector<Mat>& a, const std::vector<Mat>& b,
                       double span_tol) {
  if (a.size() != b.size()) return false;
  SpanBasis sp(SpanField::kComplex, span_tol);
  for (const Mat& m : a) sp.add(flatten(m));
  for (const Mat& m : b)
    if (!sp.contains(flatten(m))) return false;
  return true;
}

}  // namespace detail

inline UniformSpans uniform_blocked_spans(const TransferFamily& tf,
                                          std::int64_t q,
                                          double span_tol = 1e-8) {
  if (q < 1) throw ArgError("blocked spans: q must be positive");
  detail::WordLevels lv = detail::word_levels(tf, 2 * q, span_tol);
  UniformSpans sp;
  sp.q = q;
  sp.dim = tf.e.rows();
  sp.e = lv.e_pow[static_cast<std::size_t>(q)];
  sp.s = lv.s[static_cast<std::size_t>(q)];
  sp.a = lv.w[static_cast<std::size_t>(q)];
  sp.stabilized = detail::equal_span(lv.w[static_cast<std::size_t>(q)],
                                     lv.w[static_cast<std::size_t>(2 * q)],
                                     span_tol);
  return sp;
}

// Doubles the block size until the word span reproduces itself under
// multiplication. Returns the first stable blocking, or the q_max spans with
// `stabilized == false` when none of the probed sizes is stable.
inline UniformSpans find_stable_blocking(const TransferFamily& tf,
                                         std::int64_t q_max = 4,
                                         double span_tol = 1e-8) {
  for (std::int64_t q = 1; q <= q_max; q *= 2) {
    UniformSpans sp = uniform_blocked_spans(tf, q, span_tol);
    if (sp.stabilized || 2 * q > q_max) return sp;
  }
  return uniform_blocked_spans(tf, q_max, span_tol);
}

inline UniformSpans find_stable_blocking(const UniformMpu& u,
                                         std::int64_t q_max = 4,
                                         double span_tol = 1e-8) {
  return find_stable_blocking(local_transfer(u.site), q_max, span_tol);
}

// ---------------------------------------------------------------------------
// Semisimple decomposition of a matrix span closed under multiplication.

struct SsBlock {
  Mat basis;               // ambient n x d, orthonormal columns
  std::int64_t d = 0;      // block dimension
  std::int64_t group = -1;  // index into groups, -1 for null blocks
  cd lambda{0.0, 0.0};     // scale against the anchor (or the group root)
  bool null_block = false;  // every span element restricts to zero here
};

struct SsGroup {
  std::int64_t d = 0;  // dimension of each member block
  std::int64_t m = 0;  // number of members
  std::vector<std::int64_t> members;
  std::vector<cd> lambdas;
};

// Witness that the span is not semisimple: a nonzero element orthogonal to
// the whole span under the trace form. Such an element is nilpotent and its
// image generates a proper invariant subspace.
struct RadicalCertificate {
  Mat element;                 // unit Frobenius norm
  double trace_residual = 0;   // max |Tr(element F_a)| over the span basis
  double nilpotent_norm = 0;   // ||element^p|| for p >= ambient dimension
  Mat invariant_subspace;      // orthonormal columns, proper and span-invariant
};

struct SemisimpleDecomposition {
  bool semisimple = false;
  std::int64_t n = 0;         // ambient dimension
  std::int64_t span_dim = 0;  // dimension of the input span
  std::vector<SsBlock> blocks;
  std::vector<SsGroup> groups;
  Mat g, g_inv;               // g_inv * M * g is block diagonal on the span
  double gram_cond = 0;       // condition number of the trace form
  double block_residual = 0;  // worst off-block leakage after conjugation
  int attempts = 0;
  std::optional<RadicalCertificate> radical;
};

namespace detail {

// Tests whether two irreducible restriction families are equal up to a
// similarity and one common scale: rb[a] = c T ra[a] T^{-1}. The scale is
// eliminated by comparing W = R(Z)^{-1} R(Z') for two generic span elements,
// whose similarity class is scale free; T then comes from the Sylvester
// kernel of W_b T = T W_a and c from a least squares fit over the family.
inline std::optional<cd> blocks_equivalent(const std::vector<Mat>& ra,
                                           const std::vector<Mat>& rb,
                                           std::mt19937_64& rng, double tol) {
  const std::int64_t d = ra.empty() ? 0 : ra[0].rows();
  if (d == 0 || rb.empty() || rb[0].rows() != d) return std::nullopt;
  const std::size_t c = ra.size();
  if (rb.size() != c) return std::nullopt;

  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<cd> z1(c), z2(c);
    for (std::size_t a = 0; a < c; ++a) z1[a] = complex_gauss(rng);
    for (std::size_t a = 0; a < c; ++a) z2[a] = complex_gauss(rng);
    auto combo = [&](const std::vector<Mat>& r, const std::vector<cd>& z) {
      Mat m = Mat::Zero(d, d);
      for (std::size_t a = 0; a < c; ++a) m += z[a] * r[a];
      return m;
    };
    const Mat za = combo(ra, z1), zb = combo(rb, z1);
    Eigen::FullPivLU<Mat> lua(za), lub(zb);
    if (!lua.isInvertible() || !lub.isInvertible()) continue;
    const Mat wa = lua.solve(combo(ra, z2));
    const Mat wb = lub.solve(combo(rb, z2));

    Mat k = kron(Mat::Identity(d, d), wb) - kron(wa.transpose(), Mat::Identity(d, d));
    Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sig = svd.singularValues();
    // The kernel threshold is anchored to the operand scale, not to the
    // largest singular value: for equivalent one-dimensional blocks the
    // whole Sylvester operator is rounding noise and a relative-to-itself
    // test would reject it.
    const double wscale = std::max({1.0, wa.norm(), wb.norm()});
    if (sig(sig.size() - 1) > 1e-8 * wscale) return std::nullopt;
    const Mat t = unflatten(svd.matrixV().col(sig.size() - 1), d, d);
    Eigen::FullPivLU<Mat> lut(t);
    if (!lut.isInvertible()) continue;
    const Mat t_inv = lut.inverse();

    cd num = 0;
    double den = 0;
    std::vector<Mat> conj(c);
    for (std::size_t a = 0; a < c; ++a) {
      conj[a] = t * ra[a] * t_inv;
      num += frob_inner(conj[a], rb[a]);
      den += conj[a].squaredNorm();
    }
    if (den <= 0) continue;
    const cd scale = num / den;
    double res = 0, ref = 0;
    for (std::size_t a = 0; a < c; ++a) {
      res = std::max(res, (rb[a] - scale * conj[a]).norm());
      ref = std::max(ref, rb[a].norm());
    }
    if (res <= tol * std::max(1.0, ref)) return scale;
  }
  return std::nullopt;
}

}  // namespace detail

// Splits the multiplicatively closed span of `span_mats` into irreducible
// invariant blocks. Semisimplicity is decided by the trace form Tr(F_a F_b):
// nondegenerate iff the span has zero radical. On failure the kernel yields a
// certified radical element. On success the space is cut along eigenspaces of
// a random complex element of the commutant; blocks are grouped by
// projective equivalence and the per-block scale is anchored so that
// lambda = Tr(restriction of `anchor`)/d, with the group root at 1 when the
// anchor vanishes on the group. Groups are ordered by dimension, then by
// descending scale. Throws NumericError when no conjugation with bounded
// condition number certifies the split.
inline SemisimpleDecomposition semisimple_decompose(
    const std::vector<Mat>& span_mats, const Mat& anchor = Mat(),
    const Tolerances& tol = {}, std::uint64_t seed = kDefaultSeed) {
  if (span_mats.empty()) throw ArgError("semisimple_decompose: empty span");
  const std::int64_t n = span_mats[0].rows();
  for (const Mat& m : span_mats)
    if (m.rows() != n || m.cols() != n)
      throw ArgError("semisimple_decompose: square matrices of one size required");
  if (anchor.size() != 0 && (anchor.rows() != n || anchor.cols() != n))
    throw ArgError("semisimple_decompose: anchor dimension mismatch");

  SemisimpleDecomposition dec;
  dec.n = n;

  // Orthonormal span basis.
  SpanBasis sp(SpanField::kComplex, tol.span);
  for (const Mat& m : span_mats) sp.add(flatten(m));
  const std::int64_t c = sp.dim();
  if (c == 0) throw ArgError("semisimple_decompose: zero span");
  std::vector<Mat> f;
  f.reserve(static_cast<std::size_t>(c));
  for (const Vec& v : sp.vectors()) f.push_back(unflatten(v, n, n));
  dec.span_dim = c;

  // Trace form. Degenerate iff the radical is nonzero.
  Mat gram(c, c);
  for (std::int64_t a = 0; a < c; ++a)
    for (std::int64_t b = a; b < c; ++b) {
      const cd t = detail::trace_product(f[static_cast<std::size_t>(a)],
                                         f[static_cast<std::size_t>(b)]);
      gram(a, b) = t;
      gram(b, a) = t;
    }
  Eigen::JacobiSVD<Mat> gsvd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& gs = gsvd.singularValues();
  const double gmax = gs(0);
  const double gcut = gmax * tol.rank * static_cast<double>(c);
  std::int64_t grank = 0;
  for (std::int64_t i = 0; i < c; ++i)
    if (gs(i) > gcut) ++grank;

  if (grank < c) {
    RadicalCertificate cert;
    Mat r = Mat::Zero(n, n);
    const Vec x = gsvd.matrixV().col(c - 1);
    for (std::int64_t a = 0; a < c; ++a) r += x(a) * f[static_cast<std::size_t>(a)];
    r /= r.norm();
    cert.element = r;
    for (std::int64_t a = 0; a < c; ++a)
      cert.trace_residual = std::max(
          cert.trace_residual,
          std::abs(detail::trace_product(r, f[static_cast<std::size_t>(a)])));
    Mat p = r;  // repeated squaring past the ambient dimension
    for (std::int64_t pw = 1; pw < n; pw *= 2) p = p * p;
    cert.nilpotent_norm = p.norm();
    // Closure of the image under the span: a proper invariant subspace.
    SpanBasis vs(SpanField::kComplex, tol.span);
    for (std::int64_t j = 0; j < n; ++j) vs.add(r.col(j));
    for (bool grew = true; grew;) {
      grew = false;
      const std::vector<Vec> snap = vs.vectors();
      for (const Vec& v : snap)
        for (const Mat& m : f)
          if (vs.add(m * v)) grew = true;
    }
    Mat sub(n, vs.dim());
    for (std::int64_t j = 0; j < vs.dim(); ++j)
      sub.col(j) = vs.vectors()[static_cast<std::size_t>(j)];
    cert.invariant_subspace = sub;
    dec.gram_cond = gs(c - 1) > 0 ? gmax / gs(c - 1) : std::numeric_limits<double>::infinity();
    dec.radical = std::move(cert);
    dec.semisimple = false;
    return dec;
  }
  dec.gram_cond = gmax / gs(c - 1);
  if (dec.gram_cond > tol.cond_limit)
    throw NumericError("semisimple_decompose: trace form too ill conditioned to certify");

  const std::vector<Mat> comm = commutant(f, n, tol.rank);
  std::mt19937_64 rng(seed);

  struct Split {
    std::vector<Mat> bases;                   // orthonormal columns per block
    std::vector<std::vector<Mat>> restrict_;  // per block, per span element
    Mat g, g_inv;
    double leak = 0;
  };
  std::optional<Split> split;
  const double inv_tol = 10 * tol.span;

  for (int attempt = 0; attempt < 6 && !split; ++attempt) {
    ++dec.attempts;
    Mat x = Mat::Zero(n, n);
    for (const Mat& m : comm) x += complex_gauss(rng) * m;
    Eigen::ComplexEigenSolver<Mat> es(x);
    if (es.info() != Eigen::Success) continue;
    const Vec ev = es.eigenvalues();
    double scale = 1.0;
    for (std::int64_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(ev(i)));
    const double ctol = tol.cluster * scale;

    std::vector<cd> centers;
    std::vector<std::vector<std::int64_t>> clusters;
    for (std::int64_t i = 0; i < n; ++i) {
      bool placed = false;
      for (std::size_t k = 0; k < centers.size() && !placed; ++k)
        if (std::abs(ev(i) - centers[k]) <= ctol) {
          clusters[k].push_back(i);
          placed = true;
        }
      if (!placed) {
        centers.push_back(ev(i));
        clusters.push_back({i});
      }
    }

    Split cand;
    std::int64_t total = 0;
    for (const auto& cl : clusters) {
      const std::int64_t d = static_cast<std::int64_t>(cl.size());
      Mat cols(n, d);
      for (std::int64_t j = 0; j < d; ++j)
        cols.col(j) = es.eigenvectors().col(cl[static_cast<std::size_t>(j)]);
      Eigen::HouseholderQR<Mat> qr(cols);
      Mat q = qr.householderQ() * Mat::Identity(n, d);
      cand.bases.push_back(std::move(q));
      total += d;
    }
    if (total != n) continue;

    Mat g(n, n);
    std::int64_t off = 0;
    for (const Mat& bmat : cand.bases) {
      g.block(0, off, n, bmat.cols()) = bmat;
      off += bmat.cols();
    }
    Eigen::JacobiSVD<Mat> gsplit(g);
    const auto& sv = gsplit.singularValues();
    if (sv(sv.size() - 1) <= 0 || sv(0) / sv(sv.size() - 1) > tol.cond_limit)
      continue;
    cand.g = g;
    cand.g_inv = g.partialPivLu().inverse();

    // Conjugate every span element; all off-block leakage must vanish.
    bool ok = true;
    cand.restrict_.assign(cand.bases.size(), {});
    for (const Mat& fa : f) {
      Mat m = cand.g_inv * fa * cand.g;
      std::int64_t o = 0;
      for (std::size_t l = 0; l < cand.bases.size(); ++l) {
        const std::int64_t d = cand.bases[l].cols();
        cand.restrict_[l].push_back(m.block(o, o, d, d));
        m.block(o, o, d, d).setZero();
        o += d;
      }
      cand.leak = std::max(cand.leak, m.norm());
      if (cand.leak > inv_tol) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    // Non-null blocks must restrict onto a full matrix algebra.
    for (std::size_t l = 0; l < cand.bases.size() && ok; ++l) {
      const std::int64_t d = cand.bases[l].cols();
      double mx = 0;
      for (const Mat& r : cand.restrict_[l]) mx = std::max(mx, r.norm());
      if (mx <= inv_tol) continue;
      SpanBasis rs(SpanField::kComplex, tol.span);
      for (const Mat& r : cand.restrict_[l]) rs.add(flatten(r));
      if (rs.dim() != d * d) ok = false;
    }
    if (ok) split = std::move(cand);
  }
  if (!split)
    throw NumericError("semisimple_decompose: no well conditioned block split found");

  dec.block_residual = split->leak;
  const std::size_t nb = split->bases.size();

  std::vector<SsBlock> blocks(nb);
  for (std::size_t l = 0; l < nb; ++l) {
    blocks[l].basis = split->bases[l];
    blocks[l].d = split->bases[l].cols();
    double mx = 0;
    for (const Mat& r : split->restrict_[l]) mx = std::max(mx, r.norm());
    blocks[l].null_block = mx <= inv_tol;
  }

  // Group by projective equivalence; scales are relative to the group root.
  std::vector<SsGroup> groups;
  std::vector<cd> rel(nb, cd(1.0, 0.0));
  for (std::size_t l = 0; l < nb; ++l) {
    if (blocks[l].null_block) continue;
    bool joined = false;
    for (std::size_t gi = 0; gi < groups.size() && !joined; ++gi) {
      SsGroup& grp = groups[gi];
      if (grp.d != blocks[l].d) continue;
      const std::size_t root = static_cast<std::size_t>(grp.members[0]);
      if (auto scale = detail::blocks_equivalent(split->restrict_[root],
                                                 split->restrict_[l], rng,
                                                 10 * tol.span)) {
        grp.members.push_back(static_cast<std::int64_t>(l));
        ++grp.m;
        rel[l] = *scale;
        blocks[l].group = static_cast<std::int64_t>(gi);
        joined = true;
      }
    }
    if (!joined) {
      SsGroup grp;
      grp.d = blocks[l].d;
      grp.m = 1;
      grp.members = {static_cast<std::int64_t>(l)};
      groups.push_back(std::move(grp));
      blocks[l].group = static_cast<std::int64_t>(groups.size()) - 1;
    }
  }

  // Anchor the scales.
  std::vector<Mat> anchor_blocks(nb);
  if (anchor.size() != 0) {
    Mat a = split->g_inv * anchor * split->g;
    std::int64_t o = 0;
    for (std::size_t l = 0; l < nb; ++l) {
      anchor_blocks[l] = a.block(o, o, blocks[l].d, blocks[l].d);
      o += blocks[l].d;
    }
  }
  for (SsGroup& grp : groups) {
    double tmax = 0;
    std::vector<cd> tvals(grp.members.size(), cd(0, 0));
    if (anchor.size() != 0)
      for (std::size_t k = 0; k < grp.members.size(); ++k) {
        const std::size_t l = static_cast<std::size_t>(grp.members[k]);
        tvals[k] = anchor_blocks[l].trace() / static_cast<double>(grp.d);
        tmax = std::max(tmax, std::abs(tvals[k]));
      }
    for (std::size_t k = 0; k < grp.members.size(); ++k) {
      const std::size_t l = static_cast<std::size_t>(grp.members[k]);
      blocks[l].lambda = tmax > 1e-8 ? tvals[k] : rel[l];
    }
  }

  // Order groups by dimension, then by descending scale profile; null blocks
  // go last. Blocks and the similarity are rebuilt in that order.
  auto lam_key = [&](const SsGroup& grp) {
    std::vector<cd> v;
    for (std::int64_t mem : grp.members)
      v.push_back(blocks[static_cast<std::size_t>(mem)].lambda);
    std::sort(v.begin(), v.end(), [](cd a, cd b) {
      if (a.real() != b.real()) return a.real() > b.real();
      return a.imag() > b.imag();
    });
    return v;
  };
  std::vector<std::size_t> gorder(groups.size());
  for (std::size_t i = 0; i < gorder.size(); ++i) gorder[i] = i;
  std::sort(gorder.begin(), gorder.end(), [&](std::size_t x, std::size_t y) {
    if (groups[x].d != groups[y].d) return groups[x].d < groups[y].d;
    const auto kx = lam_key(groups[x]), ky = lam_key(groups[y]);
    for (std::size_t i = 0; i < std::min(kx.size(), ky.size()); ++i) {
      if (kx[i].real() != ky[i].real()) return kx[i].real() > ky[i].real();
      if (kx[i].imag() != ky[i].imag()) return kx[i].imag() > ky[i].imag();
    }
    return kx.size() > ky.size();
  });

  std::vector<std::int64_t> order;
  for (std::size_t rank = 0; rank < gorder.size(); ++rank)
    for (std::int64_t mem : groups[gorder[rank]].members) order.push_back(mem);
  for (std::size_t l = 0; l < nb; ++l)
    if (blocks[l].null_block) order.push_back(static_cast<std::int64_t>(l));

  SemisimpleDecomposition out;
  out.semisimple = true;
  out.n = n;
  out.span_dim = c;
  out.gram_cond = dec.gram_cond;
  out.block_residual = dec.block_residual;
  out.attempts = dec.attempts;
  out.g = Mat(n, n);
  std::int64_t off = 0;
  std::vector<std::int64_t> newpos(nb);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t l = static_cast<std::size_t>(order[k]);
    newpos[l] = static_cast<std::int64_t>(k);
    out.g.block(0, off, n, blocks[l].d) = blocks[l].basis;
    off += blocks[l].d;
    out.blocks.push_back(blocks[l]);
  }
  out.g_inv = out.g.partialPivLu().inverse();
  for (std::size_t rank = 0; rank < gorder.size(); ++rank) {
    SsGroup grp = groups[gorder[rank]];
    for (std::int64_t& mem : grp.members) mem = newpos[static_cast<std::size_t>(mem)];
    grp.lambdas.clear();
    for (std::int64_t mem : grp.members)
      grp.lambdas.push_back(out.blocks[static_cast<std::size_t>(mem)].lambda);
    out.groups.push_back(std::move(grp));
  }
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    SsBlock& blk = out.blocks[k];
    if (blk.null_block) {
      blk.group = -1;
      continue;
    }
    for (std::size_t gi = 0; gi < out.groups.size(); ++gi)
      for (std::int64_t mem : out.groups[gi].members)
        if (mem == static_cast<std::int64_t>(k)) blk.group = static_cast<std::int64_t>(gi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural constraints on the closure weights.

struct StructureItem {
  std::string what;
  double residual = 0;
  bool pass = false;
};

struct StructureReport {
  bool pass = false;
  std::int64_t identity_blocks = 0;  // blocks where E = 1 and all S vanish
  std::int64_t scalar_blocks = 0;    // S-free blocks with E a non-unit scalar
  std::int64_t witness_blocks = 0;   // blocks carrying a nonzero S restriction
  std::int64_t null_blocks = 0;
  std::int64_t words_checked = 0;
  std::vector<StructureItem> items;
};

namespace detail {

struct WordScan {
  double e_deviation = 0;  // worst |Tr(B E^k) - 1|
  double s_violation = 0;  // worst |Tr(B w)| over S-containing words
  std::int64_t words = 0;
};

// Breadth-first sweep over generator words up to `max_len`, capped in count.
// Pure-E words are compared against closure value 1, every word with an S
// factor against 0.
inline WordScan scan_word_traces(const Mat& b, const Mat& e,
                                 const std::vector<Mat>& s,
                                 std::int64_t max_len, std::int64_t cap) {
  WordScan ws;
  struct Node {
    Mat prod;
    bool has_s;
  };
  std::vector<Node> level;
  level.push_back({e, false});
  for (const Mat& m : s) level.push_back({m, true});
  for (std::int64_t len = 1; len <= max_len && !level.empty(); ++len) {
    for (const Node& nd : level) {
      const double t = std::abs(trace_product(b, nd.prod) - (nd.has_s ? 0.0 : 1.0));
      if (nd.has_s)
        ws.s_violation = std::max(ws.s_violation, t);
      else
        ws.e_deviation = std::max(ws.e_deviation, t);
      ++ws.words;
    }
    if (len == max_len) break;
    std::vector<Node> next;
    for (const Node& nd : level) {
      if (ws.words + static_cast<std::int64_t>(next.size()) >= cap) break;
      next.push_back({nd.prod * e, nd.has_s});
      for (const Mat& m : s) {
        if (ws.words + static_cast<std::int64_t>(next.size()) >= cap) break;
        next.push_back({nd.prod * m, true});
      }
    }
    level = std::move(next);
  }
  return ws;
}

}  // namespace detail

// Checks the constraints that unitarity at every size places on a semisimple
// blocked span and its closure matrix `b`:
//   - the traceless sector satisfies span(S E) = span(E S) inside span(S S),
//   - at least one block is identity type (E = 1, S = 0) and the closure
//     weight summed over identity blocks is 1,
//   - S-free blocks with scalar E = t, t not in {0, 1}, carry closure weights
//     that cancel within each coinciding-t class, which then has >= 2 members,
//   - blocks with a nonzero S restriction have nonzero scale, and closure
//     weights cancel within each class of coinciding scales,
//   - generator words close correctly: Tr(B E^k) = 1, Tr(B w) = 0 for words
//     with an S factor.
inline StructureReport verify_semisimple_structure(
    const SemisimpleDecomposition& dec, const Mat& e,
    const std::vector<Mat>& s_list, const Mat& b, std::int64_t n_max = -1,
    double tol = 1e-8) {
  if (!dec.semisimple)
    throw ArgError("structure verification requires a semisimple decomposition");
  const std::int64_t n = dec.n;
  if (e.rows() != n || e.cols() != n || b.rows() != n || b.cols() != n)
    throw ArgError("structure verification: dimension mismatch");

  StructureReport rep;
  auto push = [&](const std::string& what, double residual, bool ok) {
    rep.items.push_back({what, residual, ok});
  };

  // Span constraints on the traceless sector.
  if (!s_list.empty()) {
    SpanBasis se(SpanField::kComplex, tol), ss(SpanField::kComplex, tol);
    for (const Mat& s : s_list) se.add(flatten(s * e));
    for (const Mat& s1 : s_list)
      for (const Mat& s2 : s_list) ss.add(flatten(s1 * s2));
    double r_comm = 0, r_incl = 0;
    for (const Mat& s : s_list) {
      const Vec es = flatten(e * s);
      const Vec sev = flatten(s * e);
      const double nrm = std::max(1.0, es.norm());
      r_comm = std::max(r_comm, se.residual(es) / nrm);
      r_incl = std::max(r_incl, ss.residual(sev) / std::max(1.0, sev.norm()));
      r_incl = std::max(r_incl, ss.residual(es) / nrm);
    }
    push("span(SE) equals span(ES)", r_comm, r_comm <= tol);
    push("span(SE) within span(SS)", r_incl, r_incl <= tol);
  }

  // Conjugate into the block frame.
  const Mat ec = dec.g_inv * e * dec.g;
  const Mat bc = dec.g_inv * b * dec.g;
  std::vector<Mat> sc;
  sc.reserve(s_list.size());
  for (const Mat& s : s_list) sc.push_back(dec.g_inv * s * dec.g);

  enum class Kind { kIdentity, kScalar, kWitness, kNull };
  const std::size_t nb = dec.blocks.size();
  std::vector<Kind> kind(nb);
  std::vector<cd> tval(nb), bweight(nb);
  std::int64_t off = 0;
  for (std::size_t l = 0; l < nb; ++l) {
    const std::int64_t d = dec.blocks[l].d;
    const Mat eb = ec.block(off, off, d, d);
    double smax = 0;
    for (const Mat& s : sc) smax = std::max(smax, s.block(off, off, d, d).norm());
    tval[l] = eb.trace() / static_cast<double>(d);
    bweight[l] = bc.block(off, off, d, d).trace();
    const double scalar_dev = (eb - tval[l] * Mat::Identity(d, d)).norm();
    if (smax > tol)
      kind[l] = Kind::kWitness;
    else if (eb.norm() <= tol)
      kind[l] = Kind::kNull;
    else if ((eb - Mat::Identity(d, d)).norm() <= tol)
      kind[l] = Kind::kIdentity;
    else if (scalar_dev <= tol)
      kind[l] = Kind::kScalar;
    else
      kind[l] = Kind::kWitness;  // E not scalar forces S-type treatment
    off += d;
  }
  for (std::size_t l = 0; l < nb; ++l) switch (kind[l]) {
      case Kind::kIdentity: ++rep.identity_blocks; break;
      case Kind::kScalar: ++rep.scalar_blocks; break;
      case Kind::kWitness: ++rep.witness_blocks; break;
      case Kind::kNull: ++rep.null_blocks; break;
    }

  push("identity block present", rep.identity_blocks >= 1 ? 0.0 : 1.0,
       rep.identity_blocks >= 1);
  cd wid = 0;
  for (std::size_t l = 0; l < nb; ++l)
    if (kind[l] == Kind::kIdentity) wid += bweight[l];
  push("identity closure weight equals 1", std::abs(wid - cd(1.0, 0.0)),
       std::abs(wid - cd(1.0, 0.0)) <= tol);

  // Scalar-E classes: weights cancel and cancellation needs company.
  {
    std::vector<std::size_t> idx;
    for (std::size_t l = 0; l < nb; ++l)
      if (kind[l] == Kind::kScalar && std::abs(tval[l]) > tol) idx.push_back(l);
    std::vector<bool> used(idx.size(), false);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (used[i]) continue;
      std::vector<std::size_t> cls{idx[i]};
      used[i] = true;
      for (std::size_t j = i + 1; j < idx.size(); ++j)
        if (!used[j] && std::abs(tval[idx[i]] - tval[idx[j]]) <= 1e-6) {
          cls.push_back(idx[j]);
          used[j] = true;
        }
      cd sum = 0;
      double absum = 0;
      for (std::size_t l : cls) {
        sum += bweight[l];
        absum += std::abs(bweight[l]);
      }
      if (absum <= tol) continue;  // vanishing weights need no cancellation
      push("scalar class closure weights cancel", std::abs(sum),
           std::abs(sum) <= tol);
      push("scalar class has a partner", cls.size() >= 2 ? 0.0 : 1.0,
           cls.size() >= 2);
    }
  }

  // Witness-carrying groups: nonzero scales, weights cancel per scale class.
  for (const SsGroup& grp : dec.groups) {
    bool carries = false;
    for (std::int64_t mem : grp.members)
      if (kind[static_cast<std::size_t>(mem)] == Kind::kWitness) carries = true;
    if (!carries) continue;
    double lmin = std::numeric_limits<double>::infinity();
    for (std::int64_t mem : grp.members)
      lmin = std::min(lmin, std::abs(dec.blocks[static_cast<std::size_t>(mem)].lambda));
    push("witness group scale nonzero", lmin > tol ? 0.0 : 1.0, lmin > tol);

    std::vector<bool> used(grp.members.size(), false);
    for (std::size_t i = 0; i < grp.members.size(); ++i) {
      if (used[i]) continue;
      std::vector<std::size_t> cls{static_cast<std::size_t>(grp.members[i])};
      used[i] = true;
      const cd li = dec.blocks[static_cast<std::size_t>(grp.members[i])].lambda;
      for (std::size_t j = i + 1; j < grp.members.size(); ++j) {
        const cd lj = dec.blocks[static_cast<std::size_t>(grp.members[j])].lambda;
        if (!used[j] && std::abs(li - lj) <= 1e-6) {
          cls.push_back(static_cast<std::size_t>(grp.members[j]));
          used[j] = true;
        }
      }
      cd sum = 0;
      double absum = 0;
      for (std::size_t l : cls) {
        sum += bweight[l];
        absum += std::abs(bweight[l]);
      }
      if (absum <= tol) continue;
      push("witness class closure weights cancel", std::abs(sum),
           std::abs(sum) <= tol);
      push("witness class has a partner", cls.size() >= 2 ? 0.0 : 1.0,
           cls.size() >= 2);
    }
  }

  // Direct word-trace functionals.
  if (n_max < 0) {
    std::vector<cd> seen;
    for (std::size_t l = 0; l < nb; ++l) {
      if (dec.blocks[l].null_block) continue;
      bool fresh = true;
      for (cd v : seen)
        if (std::abs(v - dec.blocks[l].lambda) <= 1e-6) fresh = false;
      if (fresh) seen.push_back(dec.blocks[l].lambda);
    }
    n_max = std::min<std::int64_t>(12, static_cast<std::int64_t>(seen.size()) +
                                           dec.span_dim);
  }
  const detail::WordScan ws =
      detail::scan_word_traces(b, e, s_list, n_max, /*cap=*/4000);
  rep.words_checked = ws.words;
  push("pure-E words close to 1", ws.e_deviation, ws.e_deviation <= tol);
  push("S-carrying words close to 0", ws.s_violation, ws.s_violation <= tol);

  rep.pass = true;
  for (const StructureItem& it : rep.items) rep.pass = rep.pass && it.pass;
  return rep;
}

// ---------------------------------------------------------------------------
// Factorization into a product of single-site unitaries.

struct FactorizationReport {
  bool factorizes = false;
  Mat v;             // single-site unitary, valid when factorizes
  cd phase_step{1.0, 0.0};  // U_{n+1} gains this phase over U_n tensor V
  double schmidt_ratio = 0;  // second operator Schmidt weight of U_2, relative
  double max_residual = 0;   // worst relative dense deviation over the range
  std::vector<std::int64_t> witness_word;  // 0 = E, k = k-th S basis element
  double witness_value = 0;                // |Tr(word)| of the witness
  std::string detail;
};

// A uniform family factorizes as U_n = exp(i theta_n) V tensor ... tensor V
// exactly when the blocked traceless sector vanishes. With an empty sector the
// candidate V is read off a rank-one operator Schmidt split of U_2 and
// verified densely across sizes; otherwise a generator word with nonvanishing
// trace is returned, which obstructs every product form.
inline FactorizationReport check_factorization(const UniformMpu& u,
                                               const UniformSpans& spans,
                                               std::int64_t n_hi = 5,
                                               double tol = 1e-8) {
  FactorizationReport rep;
  if (!spans.s.empty()) {
    struct Node {
      Mat prod;
      bool has_s;
      std::vector<std::int64_t> word;
    };
    std::vector<Node> level;
    level.push_back({spans.e, false, {0}});
    for (std::size_t k = 0; k < spans.s.size(); ++k)
      level.push_back({spans.s[k], true, {static_cast<std::int64_t>(k) + 1}});
    std::int64_t budget = 2000;
    for (std::int64_t len = 1; len <= 4 && budget > 0; ++len) {
      for (const Node& nd : level) {
        if (!nd.has_s) continue;
        const double t = std::abs(nd.prod.trace());
        if (t > tol && t > rep.witness_value) {
          rep.witness_value = t;
          rep.witness_word = nd.word;
        }
      }
      if (!rep.witness_word.empty() || len == 4) break;
      std::vector<Node> next;
      for (const Node& nd : level) {
        for (std::size_t k = 0; k <= spans.s.size() && budget > 0; ++k, --budget) {
          Node nn;
          nn.prod = nd.prod * (k == 0 ? spans.e : spans.s[k - 1]);
          nn.has_s = nd.has_s || k > 0;
          nn.word = nd.word;
          nn.word.push_back(static_cast<std::int64_t>(k));
          next.push_back(std::move(nn));
        }
      }
      level = std::move(next);
    }
    rep.detail = rep.witness_word.empty()
                     ? "traceless sector nonzero; no short trace witness found"
                     : "trace witness obstructs factorization";
    return rep;
  }

  const std::int64_t d = u.site.d_in;
  if (u.site.d_out != d) {
    rep.detail = "output and input site dimensions differ";
    return rep;
  }

  // Candidate V from a rank-one split of U_2 across the site cut.
  const Mat u2 = materialize(uniform_chain(u, 2));
  Mat r(d * d, d * d);
  for (std::int64_t i1 = 0; i1 < d; ++i1)
    for (std::int64_t j1 = 0; j1 < d; ++j1)
      for (std::int64_t i2 = 0; i2 < d; ++i2)
        for (std::int64_t j2 = 0; j2 < d; ++j2)
          r(i1 * d + j1, i2 * d + j2) = u2(i2 * d + i1, j2 * d + j1);
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rep.schmidt_ratio =
      svd.singularValues()(0) > 0
          ? svd.singularValues()(1) / svd.singularValues()(0)
          : 1.0;
  if (rep.schmidt_ratio > tol) {
    rep.detail = "operator Schmidt rank of U_2 exceeds one";
    return rep;
  }
  Mat m1(d, d);
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j) m1(i, j) = svd.matrixU()(i * d + j, 0);
  Eigen::JacobiSVD<Mat> pol(m1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rep.v = pol.matrixU() * pol.matrixV().adjoint();

  // Dense verification: U_n must be a pure phase times V tensor powers.
  Mat vpow = rep.v;
  cd z_prev = 0;
  bool have_prev = false;
  for (std::int64_t n = 1; n <= n_hi; ++n) {
    if (n > 1) vpow = kron(rep.v, vpow);
    const double dim = std::pow(static_cast<double>(d), n);
    if (dim > static_cast<double>(kDenseCap)) break;
    const Mat un = materialize(uniform_chain(u, n));
    const cd z = (vpow.adjoint() * un).trace() / dim;
    if (std::abs(z) < 0.5) {
      rep.detail = "size " + std::to_string(n) + " is not a phase times a product";
      rep.max_residual = 1.0;
      return rep;
    }
    const cd phase = z / std::abs(z);
    rep.max_residual = std::max(
        rep.max_residual, (un - phase * vpow).norm() / std::sqrt(dim));
    if (have_prev) rep.phase_step = phase / (z_prev / std::abs(z_prev));
    z_prev = z;
    have_prev = true;
  }
  rep.factorizes = rep.max_residual <= 10 * tol;
  rep.detail = rep.factorizes ? "product form verified densely"
                              : "dense residual exceeds tolerance";
  return rep;
}

inline FactorizationReport check_factorization(const UniformMpu& u,
                                               std::int64_t n_hi = 5,
                                               double tol = 1e-8) {
  return check_factorization(u, find_stable_blocking(u), n_hi, tol);
}

// ---------------------------------------------------------------------------
// Renormalization fixed-point tensor.

// Matrix-product state site whose n-fold contraction with itself reproduces
// the fixed-point states of a density matrix rho: physical index (a, b) of
// dimension d^2 with a leading, bond dimension d, entries
// t[(a b), (m n)] = sqrt(rho)(a, m) delta(b, n). Throws ArgError when rho is
// not positive semidefinite. The Frobenius weight of the site is
// Tr(rho) * d; no normalization is applied.
inline SiteTensor rg_fixed_point_tensor(const Mat& rho, double tol = 1e-10) {
  const PsdRoot root = psd_root(rho, tol);
  const std::int64_t d = rho.rows();
  SiteTensor t(d * d, 1, d, d);
  for (std::int64_t a = 0; a < d; ++a)
    for (std::int64_t b = 0; b < d; ++b) {
      Mat m = Mat::Zero(d, d);
      m.col(b) = root.sqrt.row(a).transpose();
      t.set_block(a * d + b, 0, m);
    }
  return t;
}

// ---------------------------------------------------------------------------
// Combined uniform-family analysis.

struct UniformReport {
  TiReport ti;
  UniformUnitarityReport unitarity;
  UniformSpans spans;
  SemisimpleDecomposition decomposition;
  std::optional<StructureReport> structure;  // present when semisimple
  FactorizationReport factorization;
  bool pass = false;
};

inline UniformReport analyze_uniform(const UniformMpu& u,
                                     const OracleConfig& cfg = {}) {
  UniformReport rep;
  rep.ti = check_translation_invariance(u);
  rep.unitarity = check_uniform_unitarity(u, cfg);
  const TransferFamily tf = local_transfer(u.site);
  rep.spans = find_stable_blocking(tf);
  std::vector<Mat> span_mats = rep.spans.a;
  rep.decomposition =
      semisimple_decompose(span_mats, rep.spans.e, cfg.tol, cfg.seed);
  if (rep.decomposition.semisimple) {
    const Mat bq = doubled_boundary(u.boundary_b);
    rep.structure = verify_semisimple_structure(rep.decomposition, rep.spans.e,
                                                rep.spans.s, bq);
  }
  rep.factorization = check_factorization(u, rep.spans);
  rep.pass = rep.ti.pass && rep.unitarity.pass &&
             (!rep.structure || rep.structure->pass);
  return rep;
}

}  // namespace mpu
