#pragma once

// Function models on the unit circle and on the real line, with derivatives
// and divided differences that stay accurate at near-coincident arguments.
//
// Circle functions are described either in z (a trigonometric polynomial
// f(z) = sum c_k z^k, k = -d..d) or in angle coordinates g(theta) = f(e^{i theta}).
// The two derivatives are related by g'(theta) = i e^{i theta} f'(e^{i theta}).

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "krein/error.hpp"

namespace krein {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Unimodularity tolerance for points handed to circle functions.
inline constexpr double unit_circle_tol = 1e-9;

/// Reduce an angle to (-pi, pi].
inline double wrap_angle(double theta) {
  double r = std::remainder(theta, two_pi);  // [-pi, pi]
  if (r <= -pi) r += two_pi;
  return r;
}

/// Reduce an angle to [0, 2pi).
inline double fold_angle(double theta) {
  double r = std::fmod(theta, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r;
}

inline cplx unit(double theta) { return std::polar(1.0, theta); }

namespace detail {

inline void require_unimodular(cplx z, const char* where) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
      std::abs(std::abs(z) - 1.0) > unit_circle_tol) {
    throw validation_error(std::string(where) + ": point is not on the unit circle (|z| = " +
                           std::to_string(std::abs(z)) + ")");
  }
}

// h_m(z, t) = (z^m - t^m) / (z - t) = sum_{j<m} z^j t^{m-1-j}, summed in mirrored
// pairs so that h_m(z, t) == h_m(t, z) bit for bit.
template <class T>
T complete_homogeneous(const std::vector<T>& zp, const std::vector<T>& tp, int m) {
  T sum{};
  for (int j = 0; 2 * j <= m - 1; ++j) {
    const int k = m - 1 - j;
    if (j == k) {
      sum += zp[j] * tp[j];
    } else {
      sum += zp[j] * tp[k] + zp[k] * tp[j];
    }
  }
  return sum;
}

template <class T>
std::vector<T> powers(T z, int count) {
  std::vector<T> p(static_cast<std::size_t>(std::max(count, 1)));
  p[0] = T(1.0);
  for (int j = 1; j < count; ++j) p[j] = p[j - 1] * z;
  return p;
}

}  // namespace detail

/// Trigonometric polynomial f(z) = sum_{k=-d}^{d} c_k z^k on the unit circle.
class TrigPoly {
 public:
  /// `coeffs` are ordered k = -degree, ..., degree.
  TrigPoly(int degree, std::vector<cplx> coeffs) : degree_(degree), coeffs_(std::move(coeffs)) {
    if (degree_ < 0) throw validation_error("TrigPoly: negative degree");
    if (coeffs_.size() != static_cast<std::size_t>(2 * degree_ + 1)) {
      throw validation_error("TrigPoly: expected 2*degree+1 coefficients");
    }
    for (const cplx& c : coeffs_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw validation_error("TrigPoly: non-finite coefficient");
      }
    }
  }

  /// z^n for any integer n.
  static TrigPoly monomial(int n, cplx scale = 1.0) {
    const int d = std::abs(n);
    std::vector<cplx> c(static_cast<std::size_t>(2 * d + 1), 0.0);
    c[static_cast<std::size_t>(n + d)] = scale;
    return TrigPoly(d, std::move(c));
  }

  int degree() const { return degree_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx coeff(int k) const {
    if (k < -degree_ || k > degree_) return 0.0;
    return coeffs_[static_cast<std::size_t>(k + degree_)];
  }

  cplx value(cplx z) const {
    // z^{-d} * sum_{m=0}^{2d} c_{m-d} z^m, Horner in z.
    cplx acc = 0.0;
    for (int m = 2 * degree_; m >= 0; --m) acc = acc * z + coeffs_[static_cast<std::size_t>(m)];
    return degree_ == 0 ? acc : acc * std::pow(z, -degree_);
  }

  cplx derivative(cplx z) const {
    cplx sum = 0.0;
    const cplx zi = 1.0 / z;
    for (int k = -degree_; k <= degree_; ++k) {
      if (k == 0) continue;
      sum += static_cast<double>(k) * coeff(k) * (k > 0 ? std::pow(z, k - 1) : std::pow(zi, 1 - k));
    }
    return sum;
  }

  /// (f(z) - f(t)) / (z - t) by exact polynomial division, f'(z) when z == t.
  /// Symmetric in (z, t) to the last bit.
  cplx divided_difference(cplx z, cplx t) const {
    if (degree_ == 0) return 0.0;
    const auto zp = detail::powers(z, degree_ + 1);
    const auto tp = detail::powers(t, degree_ + 1);
    const auto izp = detail::powers(1.0 / z, degree_ + 1);
    const auto itp = detail::powers(1.0 / t, degree_ + 1);
    cplx sum = 0.0;
    for (int m = 1; m <= degree_; ++m) {
      const cplx h = detail::complete_homogeneous(zp, tp, m);
      const cplx pos = coeff(m);
      const cplx neg = coeff(-m);
      if (pos != 0.0) sum += pos * h;
      // (z^-m - t^-m)/(z - t) = -(z t)^-m h_m(z, t)
      if (neg != 0.0) sum -= neg * (izp[m] * itp[m]) * h;
    }
    return sum;
  }

  /// f_zeta(t) = f(zeta t): coefficients c_k zeta^k.
  TrigPoly rotated(cplx zeta) const {
    std::vector<cplx> c(coeffs_);
    for (int k = -degree_; k <= degree_; ++k) c[static_cast<std::size_t>(k + degree_)] *= std::pow(zeta, k);
    return TrigPoly(degree_, std::move(c));
  }

 private:
  int degree_;
  std::vector<cplx> coeffs_;
};

/// Angle-coordinate model g(theta) = f(e^{i theta}) with its derivative g'.
/// Points listed in `kinks` have no derivative.
struct SampledCircle {
  std::function<cplx(double)> g;
  std::function<cplx(double)> dg;
  double lipschitz = 1.0;
  std::vector<double> kinks;
};

/// Below this chord length the raw quotient of a sampled model is replaced by
/// the derivative at the chord midpoint.
inline constexpr double divided_difference_switch = 1e-8;

/// A function on the unit circle.
class CircleFunction {
 public:
  CircleFunction(TrigPoly p, std::string name = "trigpoly")
      : model_(std::move(p)), name_(std::move(name)) {}

  /// Wraps an angle-coordinate pair after a finite-difference consistency
  /// check of `dg` against `g` on a probe grid.
  static CircleFunction sampled(SampledCircle s, std::string name) {
    validate(s);
    return CircleFunction(std::move(s), std::move(name));
  }

  const std::string& name() const { return name_; }
  bool is_trig_poly() const { return std::holds_alternative<TrigPoly>(model_); }
  const TrigPoly* trig_poly() const { return std::get_if<TrigPoly>(&model_); }

  cplx eval(cplx zeta) const {
    detail::require_unimodular(zeta, "CircleFunction::eval");
    if (const auto* p = trig_poly()) return p->value(zeta);
    return std::get<SampledCircle>(model_).g(std::arg(zeta));
  }

  /// g(theta) = f(e^{i theta}).
  cplx eval_angle(double theta) const {
    if (const auto* p = trig_poly()) return p->value(unit(theta));
    return std::get<SampledCircle>(model_).g(theta);
  }

  /// f'(zeta), the complex derivative along the circle.
  cplx derivative(cplx zeta) const {
    detail::require_unimodular(zeta, "CircleFunction::derivative");
    if (const auto* p = trig_poly()) return p->derivative(zeta);
    const double theta = std::arg(zeta);
    return sampled_dg(theta) / (cplx(0.0, 1.0) * zeta);
  }

  /// g'(theta) = i e^{i theta} f'(e^{i theta}).
  cplx derivative_angle(double theta) const {
    if (const auto* p = trig_poly()) {
      const cplx z = unit(theta);
      return cplx(0.0, 1.0) * z * p->derivative(z);
    }
    return sampled_dg(theta);
  }

  /// (f(zeta) - f(tau)) / (zeta - tau), extended by f' on the diagonal.
  cplx divided_difference(cplx zeta, cplx tau) const {
    detail::require_unimodular(zeta, "CircleFunction::divided_difference");
    detail::require_unimodular(tau, "CircleFunction::divided_difference");
    if (const auto* p = trig_poly()) return p->divided_difference(zeta, tau);
    const auto& s = std::get<SampledCircle>(model_);
    const cplx chord = zeta - tau;
    if (std::abs(chord) >= divided_difference_switch) {
      return (s.g(std::arg(zeta)) - s.g(std::arg(tau))) / chord;
    }
    const cplx mid = zeta + tau;
    return derivative(mid / std::abs(mid));
  }

  /// f_zeta(t) = f(zeta t).
  CircleFunction rotated(cplx zeta) const {
    detail::require_unimodular(zeta, "CircleFunction::rotated");
    if (const auto* p = trig_poly()) return CircleFunction(p->rotated(zeta), name_);
    const auto& s = std::get<SampledCircle>(model_);
    const double phi = std::arg(zeta);
    SampledCircle r;
    r.g = [g = s.g, phi](double t) { return g(t + phi); };
    r.dg = [dg = s.dg, phi](double t) { return dg(t + phi); };
    r.lipschitz = s.lipschitz;
    for (double k : s.kinks) r.kinks.push_back(wrap_angle(k - phi));
    return CircleFunction(std::move(r), name_);
  }

 private:
  explicit CircleFunction(SampledCircle s, std::string name) : model_(std::move(s)), name_(std::move(name)) {}

  cplx sampled_dg(double theta) const {
    const auto& s = std::get<SampledCircle>(model_);
    for (double k : s.kinks) {
      if (std::abs(wrap_angle(theta - k)) < 1e-12) {
        throw non_differentiable_error(name_ + ": no derivative at theta = " + std::to_string(theta), theta);
      }
    }
    return s.dg(theta);
  }

  static void validate(const SampledCircle& s) {
    if (!s.g || !s.dg) throw validation_error("sampled circle function: missing g or g'");
    constexpr int probes = 64;
    constexpr double h = 1e-6;
    const double tol = 1e-3 * (1.0 + s.lipschitz);
    for (int k = 0; k < probes; ++k) {
      const double theta = -pi + two_pi * (k + 0.3183) / probes;
      bool near_kink = false;
      for (double kink : s.kinks) near_kink |= std::abs(wrap_angle(theta - kink)) < 10 * h;
      if (near_kink) continue;
      const cplx fd = (s.g(theta + h) - s.g(theta)) / h;
      if (std::abs(fd - s.dg(theta)) > tol) {
        throw validation_error("sampled circle function: derivative inconsistent with values at theta = " +
                               std::to_string(theta));
      }
    }
  }

  std::variant<TrigPoly, SampledCircle> model_;
  std::string name_;
};

// Built-in circle functions.

inline CircleFunction monomial(int n) { return CircleFunction(TrigPoly::monomial(n), "z^" + std::to_string(n)); }

/// cos(theta) = (z + 1/z) / 2.
inline CircleFunction cosine() { return CircleFunction(TrigPoly(1, {0.5, 0.0, 0.5}), "cos"); }

/// Partial Fourier sum of the sawtooth wave theta on (-pi, pi):
/// sum_{k=1}^{d} 2 (-1)^{k+1} sin(k theta) / k.
inline CircleFunction sawtooth(int degree = 8) {
  if (degree < 1) throw validation_error("sawtooth: degree must be >= 1");
  std::vector<cplx> c(static_cast<std::size_t>(2 * degree + 1), 0.0);
  for (int k = 1; k <= degree; ++k) {
    // 2 sin(k t)/k = (z^k - z^-k) / (i k)
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const cplx a = sign / (cplx(0.0, 1.0) * static_cast<double>(k));
    c[static_cast<std::size_t>(degree + k)] = a;
    c[static_cast<std::size_t>(degree - k)] = -a;
  }
  return CircleFunction(TrigPoly(degree, std::move(c)), "sawtooth");
}

/// f(e^{i theta}) = |theta| for theta in (-pi, pi]. Lipschitz but not
/// operator Lipschitz; kinks at 0 and pi.
inline CircleFunction abs_theta() {
  SampledCircle s;
  s.g = [](double t) { return cplx(std::abs(wrap_angle(t)), 0.0); };
  s.dg = [](double t) { return cplx(wrap_angle(t) > 0.0 ? 1.0 : -1.0, 0.0); };
  s.lipschitz = 1.0;
  s.kinks = {0.0, pi};
  return CircleFunction::sampled(std::move(s), "abs-theta");
}

// ---------------------------------------------------------------------------
// Real line.

/// Polynomial p(x) = sum_k c_k x^k, coefficients in ascending order.
class LinePoly {
 public:
  explicit LinePoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }

  cplx value(double x) const {
    cplx acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
  cplx derivative(double x) const {
    cplx acc = 0.0;
    for (int k = degree(); k >= 1; --k) acc = acc * x + static_cast<double>(k) * coeffs_[static_cast<std::size_t>(k)];
    return acc;
  }
  cplx divided_difference(double x, double y) const {
    const int d = degree();
    if (d == 0) return 0.0;
    const auto xp = detail::powers(x, d + 1);
    const auto yp = detail::powers(y, d + 1);
    cplx sum = 0.0;
    for (int m = 1; m <= d; ++m) sum += coeffs_[static_cast<std::size_t>(m)] * detail::complete_homogeneous(xp, yp, m);
    return sum;
  }

 private:
  std::vector<cplx> coeffs_;
};

struct SampledLine {
  std::function<cplx(double)> f;
  std::function<cplx(double)> df;
  std::vector<double> kinks;
};

/// A function on the real line.
class LineFunction {
 public:
  LineFunction(LinePoly p, std::string name = "poly") : model_(std::move(p)), name_(std::move(name)) {}
  LineFunction(SampledLine s, std::string name) : model_(std::move(s)), name_(std::move(name)) {
    const auto& m = std::get<SampledLine>(model_);
    if (!m.f || !m.df) throw validation_error("sampled line function: missing f or f'");
  }

  static LineFunction power(int k) {
    if (k < 0) throw validation_error("LineFunction::power: negative exponent");
    std::vector<cplx> c(static_cast<std::size_t>(k + 1), 0.0);
    c.back() = 1.0;
    return LineFunction(LinePoly(std::move(c)), "x^" + std::to_string(k));
  }

  const std::string& name() const { return name_; }

  cplx eval(double x) const {
    if (const auto* p = std::get_if<LinePoly>(&model_)) return p->value(x);
    return std::get<SampledLine>(model_).f(x);
  }

  cplx derivative(double x) const {
    if (const auto* p = std::get_if<LinePoly>(&model_)) return p->derivative(x);
    const auto& s = std::get<SampledLine>(model_);
    for (double k : s.kinks) {
      if (std::abs(x - k) < 1e-12) throw non_differentiable_error(name_ + ": no derivative at x", x);
    }
    return s.df(x);
  }

  cplx divided_difference(double x, double y) const {
    if (const auto* p = std::get_if<LinePoly>(&model_)) return p->divided_difference(x, y);
    const auto& s = std::get<SampledLine>(model_);
    const double gap = x - y;
    if (std::abs(gap) >= divided_difference_switch * (1.0 + std::abs(x))) return (s.f(x) - s.f(y)) / gap;
    return derivative(0.5 * (x + y));
  }

 private:
  std::variant<LinePoly, SampledLine> model_;
  std::string name_;
};

}  // namespace krein
