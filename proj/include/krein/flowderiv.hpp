#pragma once

// Derivatives of matrix functions along perturbation paths.
//
// Along V_s = e^{isA} U the derivative of f(V_s) is a double operator integral
// in the spectral measure E_s of V_s:
//   Q_s = d/dt f(e^{itA} U)|_{t=s} = i * DOI(tau * (Df)(zeta, tau); E_s, A, E_s).
// For self-adjoint A, K: d/dt f(A + tK)|_0 = DOI(Df; E_A, K, E_A).

#include <cmath>
#include <limits>
#include <vector>

#include "krein/circlefn.hpp"
#include "krein/doi.hpp"
#include "krein/error.hpp"
#include "krein/spectra.hpp"

namespace krein {

/// Kernel tau * (Df)(zeta, tau) on the spectrum of one decomposition.
inline KernelMatrix path_derivative_kernel(const CircleFunction& f, const SpectralDecomposition& d) {
  return sample_kernel(d, d, [&](cplx z, cplx t) { return t * f.divided_difference(z, t); });
}

/// Q_s given a precomputed decomposition of A.
inline ComplexMatrix qs_operator(const CircleFunction& f, const UnitaryMatrix& u, const SpectralDecomposition& a,
                                 const ComplexMatrix& a_matrix, double s) {
  const auto ds = decompose_unitary(path_point(u, a, s));
  return cplx(0.0, 1.0) * doi_compute(path_derivative_kernel(f, ds), ds, a_matrix, ds);
}

inline ComplexMatrix qs_operator(const CircleFunction& f, const UnitaryMatrix& u, const HermitianMatrix& a, double s) {
  if (a.size() != u.size()) throw validation_error("qs_operator: dimension mismatch");
  return qs_operator(f, u, decompose_hermitian(a), a.matrix(), s);
}

/// trace Q_s through the diagonal trace formula, without forming Q_s.
inline cplx qs_trace(const CircleFunction& f, const UnitaryMatrix& u, const SpectralDecomposition& a,
                     const ComplexMatrix& a_matrix, double s) {
  const auto ds = decompose_unitary(path_point(u, a, s));
  return cplx(0.0, 1.0) * doi_trace(path_derivative_kernel(f, ds), ds, a_matrix);
}

struct StepError {
  double step = 0.0;
  double error = 0.0;  // ||central difference - Q_s||_F
};

struct DerivativeReport {
  double s = 0.0;
  ComplexMatrix qs;
  std::vector<StepError> fd_errors;
  double fitted_order = std::numeric_limits<double>::quiet_NaN();  // log-log slope of error vs step
  double regression_residual = 0.0;                               // RMS residual of the fit
  bool cancellation_flag = false;                                  // some step below 1e-9
};

namespace detail {

// Least-squares slope of log(error) against log(step), over points whose error
// stands clear of roundoff.
inline void fit_order(DerivativeReport& r, double floor) {
  std::vector<double> xs, ys;
  for (const auto& e : r.fd_errors) {
    if (e.error > floor) {
      xs.push_back(std::log(e.step));
      ys.push_back(std::log(e.error));
    }
  }
  if (xs.size() < 2) return;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) return;
  r.fitted_order = sxy / sxx;
  double rss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double res = ys[k] - (my + r.fitted_order * (xs[k] - mx));
    rss += res * res;
  }
  r.regression_residual = std::sqrt(rss / n);
}

}  // namespace detail

/// Compares Q_s with central differences (f(V_{s+t}) - f(V_{s-t})) / 2t.
inline DerivativeReport fd_probe(const CircleFunction& f, const UnitaryMatrix& u, const HermitianMatrix& a, double s,
                                 const std::vector<double>& steps) {
  if (a.size() != u.size()) throw validation_error("fd_probe: dimension mismatch");
  if (steps.empty()) throw validation_error("fd_probe: no steps given");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!(steps[k] > 0.0)) throw validation_error("fd_probe: steps must be positive");
    if (k > 0 && !(steps[k] < steps[k - 1])) throw validation_error("fd_probe: steps must be decreasing");
  }
  const auto da = decompose_hermitian(a);
  DerivativeReport r;
  r.s = s;
  r.qs = qs_operator(f, u, da, a.matrix(), s);
  auto f_at = [&](double x) { return matrix_function(decompose_unitary(path_point(u, da, x)), f); };
  double scale = r.qs.norm();
  for (double t : steps) {
    if (t < 1e-9) r.cancellation_flag = true;
    const ComplexMatrix fd = (f_at(s + t) - f_at(s - t)) / (2.0 * t);
    r.fd_errors.push_back({t, (fd - r.qs).norm()});
    scale = std::max(scale, fd.norm());
  }
  // Differences of f(V) carry ~1e-15 relative roundoff, amplified by 1/t.
  detail::fit_order(r, 1e-13 * (1.0 + scale) / steps.back());
  return r;
}

/// d/dt f(A + tK) at t = 0.
inline ComplexMatrix sa_derivative(const LineFunction& f, const HermitianMatrix& a, const HermitianMatrix& k) {
  if (a.size() != k.size()) throw validation_error("sa_derivative: dimension mismatch");
  const auto d = decompose_hermitian(a);
  const auto phi = divided_difference_kernel(f, d.points(), d.points());
  return doi_compute(phi, d, k.matrix(), d);
}

}  // namespace krein
