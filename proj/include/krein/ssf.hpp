#pragma once

// Spectral shift function of a unitary pair (U, V = e^{iA} U) from the flow of
// eigenphases along V_s = e^{isA} U, and both sides of the trace formula
//   trace(f(U) - f(V)) = int_0^{2pi} g'(theta) xi(theta) dtheta,   g(theta) = f(e^{i theta}).
//
// Every branch theta_j(s) contributes trace f(V_1) - trace f(V_0) = sum_j [g(theta_j(1)) - g(theta_j(0))],
// so xi(theta) = -sum_j sum_k sign_j 1[theta + 2 pi k lies between theta_j(0) and theta_j(1)],
// shifted to zero mean. The sign convention is fixed by f(z) = z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "krein/assignment.hpp"
#include "krein/circlefn.hpp"
#include "krein/doi.hpp"
#include "krein/error.hpp"
#include "krein/flowderiv.hpp"
#include "krein/spectra.hpp"

namespace krein {

struct TrackingPolicy {
  int initial_steps = 64;
  double min_overlap = 0.9;    // in (0.5, 1)
  double max_increment = 0.5;  // radians per step, <= pi/2
  double cluster_gap = 1e-9;   // eigenphases closer than this are interchangeable
  int max_depth = 20;
};

/// Eigenphase branches theta_j(s_k), unwrapped.
struct PhaseBraid {
  std::vector<double> s_grid;
  std::vector<std::vector<double>> branches;  // [branch][grid index]
  std::vector<double> overlaps;               // matching confidence of each step

  std::size_t branch_count() const { return branches.size(); }
  double start(std::size_t j) const { return branches[j].front(); }
  double end(std::size_t j) const { return branches[j].back(); }
};

/// Raised when grid refinement cannot resolve a step; carries the s-interval.
class tracking_error : public numerical_error {
 public:
  tracking_error(const std::string& what, double s_lo, double s_hi) : numerical_error(what), lo_(s_lo), hi_(s_hi) {}
  double s_lo() const noexcept { return lo_; }
  double s_hi() const noexcept { return hi_; }

 private:
  double lo_, hi_;
};

namespace detail {

inline std::vector<Index> cluster_index(const SpectralDecomposition& d) {
  std::vector<Index> c(static_cast<std::size_t>(d.size()));
  for (std::size_t k = 0; k < d.clusters.size(); ++k)
    for (Index i : d.clusters[k]) c[i] = static_cast<Index>(k);
  return c;
}

struct StepMatch {
  bool ok = false;
  double confidence = 0.0;
  std::vector<Index> target;  // old eigen-index -> new eigen-index
};

// Matches eigenpairs of two nearby path points. Squared overlaps are pooled
// over clusters so that bases inside a degenerate eigenspace do not matter.
inline StepMatch match_step(const SpectralDecomposition& from, const SpectralDecomposition& to,
                            const TrackingPolicy& policy) {
  const Index n = from.size();
  const Eigen::MatrixXd overlap = (from.vectors.adjoint() * to.vectors).cwiseAbs2();
  const auto cf = cluster_index(from);
  const auto ct = cluster_index(to);
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(static_cast<Index>(from.clusters.size()),
                                                 static_cast<Index>(to.clusters.size()));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) pooled(cf[i], ct[j]) += overlap(i, j);

  Eigen::MatrixXd score(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double size = static_cast<double>(from.clusters[cf[i]].size() * to.clusters[ct[j]].size());
      score(i, j) = pooled(cf[i], ct[j]) / size;
    }
  StepMatch m;
  m.target = max_weight_assignment(score);

  // Confidence of a source cluster: mass it keeps inside the target clusters it is sent to.
  m.confidence = 1.0;
  for (const auto& cluster : from.clusters) {
    std::vector<char> hit(to.clusters.size(), 0);
    for (Index i : cluster) hit[ct[m.target[i]]] = 1;
    double kept = 0.0;
    for (std::size_t k = 0; k < to.clusters.size(); ++k)
      if (hit[k]) kept += pooled(cf[cluster.front()], static_cast<Index>(k));
    m.confidence = std::min(m.confidence, std::sqrt(kept / static_cast<double>(cluster.size())));
  }
  double worst_increment = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double inc = wrap_angle(std::arg(to.values[m.target[i]]) - std::arg(from.values[i]));
    worst_increment = std::max(worst_increment, std::abs(inc));
  }
  m.ok = m.confidence >= policy.min_overlap && worst_increment <= policy.max_increment;
  return m;
}

}  // namespace detail

/// Tracks the eigenphases of e^{isA} U for s in [0, 1], halving steps wherever
/// the eigenvector match is weak or a phase moves too far.
inline PhaseBraid track_eigenphases(const UnitaryMatrix& u, const HermitianMatrix& a,
                                    const TrackingPolicy& policy = {}) {
  if (a.size() != u.size()) throw validation_error("track_eigenphases: dimension mismatch");
  if (!(policy.min_overlap > 0.5 && policy.min_overlap < 1.0))
    throw validation_error("track_eigenphases: min_overlap must lie in (0.5, 1)");
  if (!(policy.max_increment > 0.0 && policy.max_increment <= pi / 2))
    throw validation_error("track_eigenphases: max_increment must lie in (0, pi/2]");
  if (policy.initial_steps < 1) throw validation_error("track_eigenphases: initial_steps must be >= 1");
  if (!(policy.cluster_gap > 0.0)) throw validation_error("track_eigenphases: cluster_gap must be positive");
  if (policy.max_depth < 0) throw validation_error("track_eigenphases: max_depth must be >= 0");

  const auto da = decompose_hermitian(a);
  const Index n = u.size();
  auto state = [&](double s) { return decompose_unitary(path_point(u, da, s), policy.cluster_gap); };

  PhaseBraid braid;
  SpectralDecomposition current = state(0.0);
  std::vector<Index> where(static_cast<std::size_t>(n));  // branch -> current eigen-index
  braid.branches.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    where[j] = j;
    braid.branches[j].push_back(fold_angle(std::arg(current.values[j])));
  }
  braid.s_grid.push_back(0.0);

  auto advance = [&](auto&& self, double lo, double hi, int depth) -> void {
    SpectralDecomposition next = state(hi);
    const detail::StepMatch m = detail::match_step(current, next, policy);
    if (!m.ok) {
      if (depth >= policy.max_depth) {
        std::ostringstream os;
        os << "track_eigenphases: refinement depth " << policy.max_depth << " exhausted on s in [" << lo << ", "
           << hi << "] (match confidence " << m.confidence << ")";
        throw tracking_error(os.str(), lo, hi);
      }
      const double mid = 0.5 * (lo + hi);
      self(self, lo, mid, depth + 1);
      self(self, mid, hi, depth + 1);
      return;
    }
    for (Index j = 0; j < n; ++j) {
      auto& br = braid.branches[j];
      where[j] = m.target[where[j]];
      const double prev = br.back();
      br.push_back(prev + wrap_angle(std::arg(next.values[where[j]]) - prev));
    }
    braid.s_grid.push_back(hi);
    braid.overlaps.push_back(m.confidence);
    current = std::move(next);
  };

  for (int k = 1; k <= policy.initial_steps; ++k) {
    const double lo = static_cast<double>(k - 1) / policy.initial_steps;
    const double hi = k == policy.initial_steps ? 1.0 : static_cast<double>(k) / policy.initial_steps;
    advance(advance, lo, hi, 0);
  }
  return braid;
}

/// nu_s(cluster) = trace(P_cluster A), one real weight per cluster of `d`.
inline std::vector<double> nu_weights(const SpectralDecomposition& d, const HermitianMatrix& a) {
  if (a.size() != d.size()) throw validation_error("nu_weights: dimension mismatch");
  std::vector<double> w;
  w.reserve(d.clusters.size());
  for (const auto& cluster : d.clusters) {
    double s = 0.0;
    for (Index i : cluster) s += d.vectors.col(i).dot(a.matrix() * d.vectors.col(i)).real();
    w.push_back(s);
  }
  return w;
}

/// Piecewise-constant, zero-mean function of the angle.
/// Arc k runs from breakpoints[k] to breakpoints[k+1]; the last arc wraps to
/// breakpoints[0] + 2pi. With no breakpoints there is one arc [0, 2pi).
struct SpectralShiftFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;
  double normalization_shift = 0.0;  // mean of the integer-valued flow count, subtracted from it

  struct Arc {
    double start, end, value;
  };

  std::vector<Arc> arcs() const {
    std::vector<Arc> out;
    if (breakpoints.empty()) {
      out.push_back({0.0, two_pi, values.empty() ? 0.0 : values.front()});
      return out;
    }
    const std::size_t m = breakpoints.size();
    for (std::size_t k = 0; k < m; ++k) {
      const double end = k + 1 < m ? breakpoints[k + 1] : breakpoints.front() + two_pi;
      out.push_back({breakpoints[k], end, values[k]});
    }
    return out;
  }

  /// Value at an arbitrary angle.
  double operator()(double theta) const {
    if (breakpoints.empty()) return values.empty() ? 0.0 : values.front();
    const double t = fold_angle(theta);
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    if (it == breakpoints.begin()) return values.back();
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
  }

  /// int xi dtheta over the circle.
  double integral() const {
    double s = 0.0;
    for (const auto& arc : arcs()) s += arc.value * (arc.end - arc.start);
    return s;
  }

  SpectralShiftFunction shifted(double c) const {
    SpectralShiftFunction r = *this;
    for (double& v : r.values) v += c;
    r.normalization_shift -= c;
    return r;
  }
};

/// Folds the branch sweeps of a braid into xi on [0, 2pi), zero mean.
inline SpectralShiftFunction build_ssf(const PhaseBraid& braid) {
  struct Sweep {
    double lo, hi, sign;
  };
  std::vector<Sweep> sweeps;
  std::vector<double> points;
  for (std::size_t j = 0; j < braid.branch_count(); ++j) {
    const double a = braid.start(j);
    const double b = braid.end(j);
    if (a == b) continue;
    sweeps.push_back({std::min(a, b), std::max(a, b), b > a ? 1.0 : -1.0});
    points.push_back(fold_angle(a));
    points.push_back(fold_angle(b));
  }
  std::sort(points.begin(), points.end());
  SpectralShiftFunction xi;
  for (double p : points) {
    if (xi.breakpoints.empty() || p - xi.breakpoints.back() > 1e-13) xi.breakpoints.push_back(p);
  }
  if (xi.breakpoints.size() > 1 && xi.breakpoints.front() + two_pi - xi.breakpoints.back() <= 1e-13) {
    xi.breakpoints.pop_back();
  }

  // Number of k with lo <= theta + 2 pi k < hi.
  auto windings = [](double theta, double lo, double hi) {
    return std::ceil((hi - theta) / two_pi) - std::ceil((lo - theta) / two_pi);
  };
  auto flow_count = [&](double theta) {
    double eta = 0.0;
    for (const auto& s : sweeps) eta += s.sign * windings(theta, s.lo, s.hi);
    return -eta;
  };

  if (xi.breakpoints.empty()) {
    xi.values = {0.0};
    return xi;
  }
  const std::size_t m = xi.breakpoints.size();
  std::vector<double> raw(m);
  double mean = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double start = xi.breakpoints[k];
    const double end = k + 1 < m ? xi.breakpoints[k + 1] : xi.breakpoints.front() + two_pi;
    raw[k] = flow_count(0.5 * (start + end));
    mean += raw[k] * (end - start);
  }
  mean /= two_pi;
  xi.normalization_shift = mean;
  xi.values.resize(m);
  for (std::size_t k = 0; k < m; ++k) xi.values[k] = raw[k] - mean;
  return xi;
}

/// int_0^{2pi} g'(theta) xi(theta) dtheta, summed arc by arc as value * (g(end) - g(start)).
inline cplx krein_rhs(const SpectralShiftFunction& xi, const CircleFunction& f) {
  cplx total = 0.0;
  for (const auto& arc : xi.arcs()) {
    if (arc.value == 0.0) continue;
    total += arc.value * (f.eval_angle(arc.end) - f.eval_angle(arc.start));
  }
  return total;
}

struct TraceReport {
  cplx lhs;
  cplx rhs;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / (1 + |lhs|)
};

inline TraceReport make_trace_report(cplx lhs, cplx rhs) {
  TraceReport r{lhs, rhs, std::abs(lhs - rhs), 0.0};
  r.rel_error = r.abs_error / (1.0 + std::abs(lhs));
  return r;
}

/// trace(f(U) - f(V)) computed directly.
inline cplx direct_trace_difference(const CircleFunction& f, const UnitaryMatrix& u, const UnitaryMatrix& v) {
  const auto du = decompose_unitary(u);
  const auto dv = decompose_unitary(v);
  cplx s = 0.0;
  for (Index i = 0; i < du.size(); ++i) s += f.eval(du.values[i]);
  for (Index i = 0; i < dv.size(); ++i) s -= f.eval(dv.values[i]);
  return s;
}

/// Both sides of the trace formula for U and V = e^{iA} U.
inline TraceReport verify_trace_formula(const CircleFunction& f, const UnitaryMatrix& u, const HermitianMatrix& a,
                                        const TrackingPolicy& policy = {}) {
  const UnitaryMatrix v = path_point(u, a, 1.0);
  const cplx lhs = (matrix_function(u, f) - matrix_function(v, f)).trace();
  const cplx rhs = krein_rhs(build_ssf(track_eigenphases(u, a, policy)), f);
  return make_trace_report(lhs, rhs);
}

/// Composite Simpson rule for int_0^1 trace Q_s ds, which equals trace(f(V) - f(U)).
inline cplx qs_trace_quadrature(const CircleFunction& f, const UnitaryMatrix& u, const HermitianMatrix& a, int steps) {
  if (steps < 2 || steps % 2 != 0) throw validation_error("qs_trace_quadrature: steps must be even and >= 2");
  if (a.size() != u.size()) throw validation_error("qs_trace_quadrature: dimension mismatch");
  const auto da = decompose_hermitian(a);
  const double h = 1.0 / steps;
  cplx sum = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * qs_trace(f, u, da, a.matrix(), k * h);
  }
  return sum * (h / 3.0);
}

struct TwistSample {
  double theta = 0.0;  // zeta = e^{i theta}
  cplx value;          // trace(f(zeta U) - f(zeta V))
};

struct TwistScan {
  std::vector<TwistSample> samples;
  double max_jump = 0.0;  // largest |value_{k+1} - value_k|, cyclically
};

namespace detail {
inline void finish_scan(TwistScan& scan) {
  const std::size_t m = scan.samples.size();
  for (std::size_t k = 0; k < m; ++k) {
    const auto& next = scan.samples[(k + 1) % m];
    scan.max_jump = std::max(scan.max_jump, std::abs(next.value - scan.samples[k].value));
  }
}
inline void check_grid(int grid) {
  if (grid < 8) throw validation_error("twist_scan: grid must be >= 8");
}
}  // namespace detail

/// zeta -> trace(f(zeta U) - f(zeta V)) at zeta_k = e^{2 pi i k / grid}.
inline TwistScan twist_scan(const CircleFunction& f, const UnitaryMatrix& u, const UnitaryMatrix& v, int grid) {
  detail::check_grid(grid);
  if (u.size() != v.size()) throw validation_error("twist_scan: dimension mismatch");
  const auto du = decompose_unitary(u);
  const auto dv = decompose_unitary(v);
  TwistScan scan;
  for (int k = 0; k < grid; ++k) {
    const double theta = two_pi * k / grid;
    const cplx zeta = unit(theta);
    cplx s = 0.0;
    for (Index i = 0; i < du.size(); ++i) s += f.eval(zeta * du.values[i]);
    for (Index i = 0; i < dv.size(); ++i) s -= f.eval(zeta * dv.values[i]);
    scan.samples.push_back({theta, s});
  }
  detail::finish_scan(scan);
  return scan;
}

/// The same scan through the rotated functions f_zeta(t) = f(zeta t):
/// int f_zeta' xi for the pair's spectral shift function.
inline TwistScan twist_scan(const CircleFunction& f, const SpectralShiftFunction& xi, int grid) {
  detail::check_grid(grid);
  TwistScan scan;
  for (int k = 0; k < grid; ++k) {
    const double theta = two_pi * k / grid;
    scan.samples.push_back({theta, krein_rhs(xi, f.rotated(unit(theta)))});
  }
  detail::finish_scan(scan);
  return scan;
}

}  // namespace krein
