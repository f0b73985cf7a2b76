#include <gtest/gtest.h>

#include <algorithm>

#include "krein/assignment.hpp"
#include "krein/ssf.hpp"

using namespace krein;

namespace {

const cplx I(0.0, 1.0);

ComplexMatrix diag(std::initializer_list<cplx> v) {
  ComplexVector d(static_cast<Index>(v.size()));
  Index k = 0;
  for (cplx x : v) d[k++] = x;
  return d.asDiagonal();
}

// U = I_2, A = diag(pi/2, 0): one eigenphase sweeps (0, pi/2).
struct Commuting {
  UnitaryMatrix u = UnitaryMatrix::identity(2);
  HermitianMatrix a = HermitianMatrix(diag({pi / 2, 0.0}));
};

double brute_assignment(const Eigen::MatrixXd& score) {
  std::vector<int> p(static_cast<std::size_t>(score.rows()));
  std::iota(p.begin(), p.end(), 0);
  double best = -1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += score(static_cast<Index>(i), p[i]);
    best = std::max(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST(Assignment, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int n = 1; n <= 7; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd score(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) score(i, j) = uni(rng);
      const auto col = max_weight_assignment(score);
      std::vector<Index> seen(col);
      std::sort(seen.begin(), seen.end());
      for (Index k = 0; k < n; ++k) EXPECT_EQ(seen[k], k);
      double total = 0.0;
      for (Index i = 0; i < n; ++i) total += score(i, col[i]);
      EXPECT_NEAR(total, brute_assignment(score), 1e-12);
    }
  }
  EXPECT_THROW(max_weight_assignment(Eigen::MatrixXd(2, 3)), validation_error);
  EXPECT_TRUE(max_weight_assignment(Eigen::MatrixXd(0, 0)).empty());
}

TEST(Tracking, ZeroGeneratorGivesConstantBranches) {
  const auto u = random_haar_unitary(5, 2);
  const auto braid = track_eigenphases(u, HermitianMatrix::zero(5));
  for (std::size_t j = 0; j < braid.branch_count(); ++j) {
    for (double th : braid.branches[j]) EXPECT_NEAR(th, braid.start(j), 1e-12);
  }
}

TEST(Tracking, CommutingCaseFollowsStraightLines) {
  Commuting c;
  const auto braid = track_eigenphases(c.u, c.a);
  std::vector<double> ends{braid.end(0), braid.end(1)};
  std::sort(ends.begin(), ends.end());
  EXPECT_NEAR(ends[0], 0.0, 1e-12);
  EXPECT_NEAR(ends[1], pi / 2, 1e-12);
  // The moving branch is linear in s.
  const std::size_t moving = std::abs(braid.end(0)) > 0.1 ? 0 : 1;
  for (std::size_t k = 0; k < braid.s_grid.size(); ++k) {
    EXPECT_NEAR(braid.branches[moving][k], braid.s_grid[k] * pi / 2, 1e-12);
  }
}

TEST(Tracking, EndpointsAreEigenvaluesOfV) {
  const auto u = random_haar_unitary(8, 11);
  const auto a = random_hermitian(8, 2, 1.0, 11);
  const auto braid = track_eigenphases(u, a);
  const auto dv = decompose_unitary(path_point(u, a, 1.0));
  std::vector<char> used(8, 0);
  for (std::size_t j = 0; j < braid.branch_count(); ++j) {
    const cplx z = unit(braid.end(j));
    double best = 1e300;
    Index at = -1;
    for (Index i = 0; i < 8; ++i) {
      if (!used[i] && std::abs(z - dv.values[i]) < best) best = std::abs(z - dv.values[i]), at = i;
    }
    used[at] = 1;
    EXPECT_LE(best, 1e-8);
  }
}

TEST(Tracking, DegenerateStartIsResolved) {
  // U with a repeated eigenvalue; intra-cluster choices must not change xi.
  const auto basis = random_haar_unitary(4, 6);
  const UnitaryMatrix u(basis.matrix() * diag({1.0, 1.0, I, -1.0}) * basis.matrix().adjoint());
  const auto a = random_hermitian(4, 2, 1.0, 6);
  const CircleFunction f(random_trig_poly(5, 6));
  EXPECT_LE(verify_trace_formula(f, u, a).rel_error, 1e-9);
}

TEST(Tracking, PolicyValidation) {
  Commuting c;
  TrackingPolicy p;
  p.min_overlap = 0.4;
  EXPECT_THROW(track_eigenphases(c.u, c.a, p), validation_error);
  p = {};
  p.max_increment = 2.0;
  EXPECT_THROW(track_eigenphases(c.u, c.a, p), validation_error);
  p = {};
  p.initial_steps = 0;
  EXPECT_THROW(track_eigenphases(c.u, c.a, p), validation_error);
  p = {};
  p.max_depth = -1;
  EXPECT_THROW(track_eigenphases(c.u, c.a, p), validation_error);
  EXPECT_THROW(track_eigenphases(c.u, HermitianMatrix::zero(3)), validation_error);
}

TEST(Tracking, DepthExhaustionReportsInterval) {
  const auto u = random_haar_unitary(6, 1);
  const auto a = random_hermitian(6, 3, 3.0, 1);
  TrackingPolicy p;
  p.initial_steps = 1;
  p.max_depth = 0;
  try {
    track_eigenphases(u, a, p);
    FAIL() << "expected a tracking error";
  } catch (const tracking_error& e) {
    EXPECT_EQ(e.s_lo(), 0.0);
    EXPECT_EQ(e.s_hi(), 1.0);
  }
}

TEST(NuWeights, Examples) {
  const auto d = decompose_unitary(UnitaryMatrix(diag({1.0, I})));
  for (double w : nu_weights(d, HermitianMatrix::zero(2))) EXPECT_EQ(w, 0.0);
  const auto w = nu_weights(d, HermitianMatrix(diag({0.3, -0.7})));
  EXPECT_NEAR(w[0], 0.3, 1e-15);
  EXPECT_NEAR(w[1], -0.7, 1e-15);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = random_hermitian(7, 3, 1.0, seed);
    const auto dr = decompose_unitary(random_haar_unitary(7, seed));
    double sum = 0.0;
    for (double x : nu_weights(dr, a)) sum += x;
    EXPECT_NEAR(sum, a.matrix().trace().real(), 1e-10);
  }
}

TEST(Ssf, ZeroGeneratorIsZero) {
  const auto xi = build_ssf(track_eigenphases(random_haar_unitary(4, 3), HermitianMatrix::zero(4)));
  const auto arcs = xi.arcs();
  ASSERT_EQ(arcs.size(), 1u);
  EXPECT_EQ(arcs[0].value, 0.0);
  EXPECT_EQ(arcs[0].start, 0.0);
  EXPECT_EQ(arcs[0].end, two_pi);
}

TEST(Ssf, CommutingExampleValues) {
  Commuting c;
  const auto xi = build_ssf(track_eigenphases(c.u, c.a));
  ASSERT_EQ(xi.breakpoints.size(), 2u);
  EXPECT_NEAR(xi(pi / 4), 0.25 - 1.0, 1e-12);
  EXPECT_NEAR(xi(pi), 0.25, 1e-12);
  EXPECT_NEAR(xi(-0.1), 0.25, 1e-12);
  EXPECT_NEAR(xi.normalization_shift, -0.25, 1e-12);
  const cplx rhs = krein_rhs(xi, monomial(1));
  EXPECT_NEAR(std::abs(rhs - cplx(1.0, -1.0)), 0.0, 1e-14);
  const cplx direct = (c.u.matrix() - path_point(c.u, c.a, 1.0).matrix()).trace();
  EXPECT_NEAR(std::abs(rhs - direct), 0.0, 1e-14);
}

TEST(Ssf, ZeroMeanAndIntegerSteps) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 12);
    const auto xi = build_ssf(track_eigenphases(random_haar_unitary(n, seed),
                                                random_hermitian(n, 1 + static_cast<Index>(seed % 3) % n, 4.0, seed)));
    EXPECT_NEAR(xi.integral(), 0.0, 1e-10);
    for (double v : xi.values) {
      const double count = v + xi.normalization_shift;
      EXPECT_NEAR(count, std::round(count), 1e-9);
    }
    for (std::size_t k = 1; k < xi.breakpoints.size(); ++k) EXPECT_GT(xi.breakpoints[k], xi.breakpoints[k - 1]);
  }
}

TEST(Ssf, LargeGeneratorWindsAroundTheCircle) {
  // A = diag(3 pi, 0): the phase sweeps 1.5 turns, so xi takes two levels.
  const auto xi = build_ssf(track_eigenphases(UnitaryMatrix::identity(2), HermitianMatrix(diag({3 * pi, 0.0}))));
  EXPECT_NEAR(xi(0.5) - xi(4.0), -1.0, 1e-9);
  const auto f = CircleFunction(random_trig_poly(4, 2));
  const auto v = path_point(UnitaryMatrix::identity(2), HermitianMatrix(diag({3 * pi, 0.0})), 1.0);
  EXPECT_LE(std::abs(krein_rhs(xi, f) - direct_trace_difference(f, UnitaryMatrix::identity(2), v)), 1e-10);
}

TEST(KreinRhs, GaugeAndTrivialCases) {
  SpectralShiftFunction zero;
  zero.values = {0.0};
  EXPECT_EQ(krein_rhs(zero, CircleFunction(random_trig_poly(3, 1))), cplx(0.0));
  SpectralShiftFunction constant;
  constant.values = {2.5};
  EXPECT_LE(std::abs(krein_rhs(constant, CircleFunction(random_trig_poly(3, 1)))), 1e-15);
  const auto u = random_haar_unitary(6, 8);
  const auto xi = build_ssf(track_eigenphases(u, random_hermitian(6, 2, 1.0, 8)));
  const CircleFunction f(random_trig_poly(6, 8));
  for (double c : {-1.0, 0.5, 10.0}) EXPECT_LE(std::abs(krein_rhs(xi.shifted(c), f) - krein_rhs(xi, f)), 1e-12);
}

TEST(VerifyTraceFormula, Examples) {
  const auto u = random_haar_unitary(5, 4);
  const auto zero = verify_trace_formula(monomial(3), u, HermitianMatrix::zero(5));
  EXPECT_LE(std::abs(zero.lhs), 1e-14);
  EXPECT_LE(std::abs(zero.rhs), 1e-14);
  Commuting c;
  const auto sq = verify_trace_formula(monomial(2), c.u, c.a);
  EXPECT_LE(std::abs(sq.lhs - cplx(2.0, 0.0)), 1e-14);  // trace(I - diag(-1, 1)) = 2
  EXPECT_LE(sq.abs_error, 1e-10);
}

TEST(VerifyTraceFormula, RankOneDegreeSix) {
  const auto u = random_haar_unitary(6, 14);
  const auto a = random_hermitian(6, 1, 1.0, 14);
  const auto r = verify_trace_formula(CircleFunction(random_trig_poly(6, 14)), u, a);
  EXPECT_LE(r.abs_error, 1e-8);
}

TEST(VerifyTraceFormula, RandomInstances) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 15);
    const auto r = verify_trace_formula(CircleFunction(random_trig_poly(1 + seed % 8, seed)),
                                        random_haar_unitary(n, seed),
                                        random_hermitian(n, 1 + static_cast<Index>(seed % 3) % n, 2.0, seed));
    EXPECT_LE(r.rel_error, 1e-7) << "seed " << seed;
  }
}

TEST(VerifyTraceFormula, NamedFunctions) {
  const auto u = random_haar_unitary(6, 77);
  const auto a = random_hermitian(6, 2, 1.0, 77);
  for (const auto& f : {cosine(), sawtooth(), monomial(-3)}) EXPECT_LE(verify_trace_formula(f, u, a).rel_error, 1e-9);
}

TEST(Quadrature, LinearFunctionAt64Steps) {
  const auto u = random_haar_unitary(6, 5);
  const auto a = random_hermitian(6, 2, 1.0, 5);
  const cplx expected = (path_point(u, a, 1.0).matrix() - u.matrix()).trace();
  EXPECT_LE(std::abs(qs_trace_quadrature(monomial(1), u, a, 64) - expected), 1e-6);
  EXPECT_EQ(qs_trace_quadrature(monomial(2), u, HermitianMatrix::zero(6), 4), cplx(0.0));
}

TEST(Quadrature, ConvergenceOrder) {
  const auto u = random_haar_unitary(8, 9);
  const auto a = random_hermitian(8, 2, 1.0, 9);
  const CircleFunction f(random_trig_poly(4, 9));
  const cplx exact = -direct_trace_difference(f, u, path_point(u, a, 1.0));
  const double e16 = std::abs(qs_trace_quadrature(f, u, a, 16) - exact);
  const double e64 = std::abs(qs_trace_quadrature(f, u, a, 64) - exact);
  EXPECT_LE(e64, e16 / 10.0);
}

TEST(Quadrature, RejectsOddOrTooFewSteps) {
  const auto u = random_haar_unitary(3, 1);
  const auto a = random_hermitian(3, 1, 1.0, 1);
  EXPECT_THROW(qs_trace_quadrature(monomial(1), u, a, 3), validation_error);
  EXPECT_THROW(qs_trace_quadrature(monomial(1), u, a, 0), validation_error);
}

TEST(Twist, LinearFunctionIsLinearInZeta) {
  const auto u = random_haar_unitary(5, 3);
  const auto v = path_point(u, random_hermitian(5, 2, 1.0, 3), 1.0);
  const cplx base = (u.matrix() - v.matrix()).trace();
  const auto scan = twist_scan(monomial(1), u, v, 16);
  ASSERT_EQ(scan.samples.size(), 16u);
  for (const auto& s : scan.samples) EXPECT_LE(std::abs(s.value - unit(s.theta) * base), 1e-13);
}

TEST(Twist, EqualPairIsZero) {
  const auto u = random_haar_unitary(4, 3);
  const auto scan = twist_scan(CircleFunction(random_trig_poly(6, 1)), u, u, 32);
  for (const auto& s : scan.samples) EXPECT_LE(std::abs(s.value), 1e-13);
  EXPECT_LE(scan.max_jump, 1e-13);
  EXPECT_THROW(twist_scan(monomial(1), u, u, 4), validation_error);
}

TEST(Twist, DirectRouteMatchesRotatedFunctions) {
  const auto u = random_haar_unitary(7, 21);
  const auto a = random_hermitian(7, 3, 1.0, 21);
  const CircleFunction f(random_trig_poly(6, 21));
  const auto direct = twist_scan(f, u, path_point(u, a, 1.0), 256);
  const auto rotated = twist_scan(f, build_ssf(track_eigenphases(u, a)), 256);
  for (std::size_t k = 0; k < direct.samples.size(); ++k) {
    EXPECT_LE(std::abs(direct.samples[k].value - rotated.samples[k].value), 1e-7);
  }
  // Degree-6 modulus: |d/dtheta| <= 6 sum |c_k| |trace-class mass|; the scan is smooth on this grid.
  EXPECT_LT(direct.max_jump, 1.0);
}
