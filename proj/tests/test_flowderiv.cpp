#include <gtest/gtest.h>

#include "krein/flowderiv.hpp"

using namespace krein;

namespace {

const cplx I(0.0, 1.0);

}  // namespace

TEST(QsOperator, LinearFunctionOracle) {
  // d/ds e^{isA} U = i A V_s.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 9);
    const auto u = random_haar_unitary(n, seed);
    const auto a = random_hermitian(n, 1 + static_cast<Index>(seed % 3) % n, 1.5, seed);
    for (double s : {0.0, 0.37, 1.0}) {
      const ComplexMatrix vs = path_point(u, a, s).matrix();
      const ComplexMatrix expected = I * a.matrix() * vs;
      EXPECT_LE((qs_operator(monomial(1), u, a, s) - expected).norm(), 1e-12);
      const auto da = decompose_hermitian(a);
      EXPECT_LE(std::abs(qs_trace(monomial(1), u, da, a.matrix(), s) - I * (a.matrix() * vs).trace()), 1e-12);
    }
  }
}

TEST(QsOperator, SquareFunctionOracle) {
  // d/ds V_s^2 = i A V_s V_s + V_s i A V_s.
  const auto u = random_haar_unitary(6, 4);
  const auto a = random_hermitian(6, 2, 1.0, 4);
  const ComplexMatrix vs = path_point(u, a, 0.6).matrix();
  const ComplexMatrix expected = I * (a.matrix() * vs * vs + vs * a.matrix() * vs);
  EXPECT_LE((qs_operator(monomial(2), u, a, 0.6) - expected).norm(), 1e-12);
}

TEST(QsOperator, TraceMatchesFullOperator) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto u = random_haar_unitary(7, seed);
    const auto a = random_hermitian(7, 3, 1.0, seed);
    const CircleFunction f(random_trig_poly(6, seed));
    const auto da = decompose_hermitian(a);
    EXPECT_LE(std::abs(qs_trace(f, u, da, a.matrix(), 0.4) - qs_operator(f, u, a, 0.4).trace()), 1e-10);
  }
}

TEST(FdProbe, DegreeFourAtS037) {
  const auto u = random_haar_unitary(8, 17);
  const auto a = random_hermitian(8, 2, 1.0, 17);
  const CircleFunction f(random_trig_poly(4, 17));
  const auto r = fd_probe(f, u, a, 0.37, {1e-5});
  EXPECT_LE(r.fd_errors[0].error, 1e-4 * r.qs.norm());
  EXPECT_FALSE(r.cancellation_flag);
}

TEST(FdProbe, CentralDifferencesAreSecondOrder) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto u = random_haar_unitary(6, seed);
    const auto a = random_hermitian(6, 2, 1.0, seed);
    const CircleFunction f(random_trig_poly(5, seed));
    const auto r = fd_probe(f, u, a, 0.2 * seed, {1e-2, 5e-3, 2.5e-3, 1.25e-3});
    EXPECT_NEAR(r.fitted_order, 2.0, 0.1);
    EXPECT_LT(r.regression_residual, 0.05);
  }
}

TEST(FdProbe, FlagsCancellationAndValidatesSteps) {
  const auto u = random_haar_unitary(4, 2);
  const auto a = random_hermitian(4, 1, 1.0, 2);
  EXPECT_TRUE(fd_probe(monomial(2), u, a, 0.0, {1e-3, 1e-10}).cancellation_flag);
  EXPECT_THROW(fd_probe(monomial(2), u, a, 0.0, {}), validation_error);
  EXPECT_THROW(fd_probe(monomial(2), u, a, 0.0, {1e-3, 1e-2}), validation_error);
  EXPECT_THROW(fd_probe(monomial(2), u, a, 0.0, {0.0}), validation_error);
  EXPECT_THROW(fd_probe(monomial(2), u, random_hermitian(3, 1, 1.0, 2), 0.0, {1e-3}), validation_error);
}

TEST(FdProbe, ConstantPathHasNoFittedOrder) {
  // With A = 0 the path is constant and every error vanishes.
  const auto u = random_haar_unitary(4, 3);
  const auto r = fd_probe(monomial(3), u, HermitianMatrix::zero(4), 0.5, {1e-2, 1e-3});
  EXPECT_LE(r.qs.norm(), 1e-15);
  EXPECT_TRUE(std::isnan(r.fitted_order));
}

TEST(SaDerivative, CubeMatchesExpansion) {
  const auto a = random_hermitian(6, 6, 1.0, 31);
  const auto k = random_hermitian(6, 6, 1.0, 32);
  const ComplexMatrix am = a.matrix(), km = k.matrix();
  const ComplexMatrix expected = am * am * km + am * km * am + km * am * am;
  const ComplexMatrix got = sa_derivative(LineFunction::power(3), a, k);
  EXPECT_LE((got - expected).norm(), 1e-12 * expected.norm());
  // Central difference of (A + tK)^3 at t = 1e-5.
  const double t = 1e-5;
  const ComplexMatrix p = am + t * km, m = am - t * km;
  const ComplexMatrix fd = (p * p * p - m * m * m) / (2 * t);
  EXPECT_LE((got - fd).norm(), 1e-6 * expected.norm());
  EXPECT_THROW(sa_derivative(LineFunction::power(3), a, HermitianMatrix::zero(5)), validation_error);
}
