#pragma once

// The acceptance battery: each criterion runs a fixed, seeded set of instances
// and compares its worst measurement against a tolerance. Shared by the
// `kreinctl suite` command and the acceptance test binary.

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "krein/krein.hpp"

namespace krein::acceptance {

struct Instance {
  UnitaryMatrix u;
  HermitianMatrix a;
  UnitaryMatrix v;
  CircleFunction f;
};

/// Seeded random pair: n in {2..16} cycling with the seed, rank <= 3,
/// V = e^{iA} U, and a TrigPoly of degree <= max_degree.
inline Instance make_instance(std::uint64_t seed, Index n, int degree, double norm_bound = 1.0) {
  const Index rank = std::min<Index>(n, 1 + static_cast<Index>(seed % 3));
  UnitaryMatrix u = random_haar_unitary(n, seed);
  HermitianMatrix a = random_hermitian(n, rank, norm_bound, seed);
  UnitaryMatrix v = path_point(u, a, 1.0);
  return {u, a, v, CircleFunction(random_trig_poly(degree, seed), "random:" + std::to_string(degree) + ":" + std::to_string(seed))};
}

inline Index battery_size(std::uint64_t seed) { return 2 + static_cast<Index>((seed - 1) % 15); }
inline int battery_degree(std::uint64_t seed, int max_degree) { return 1 + static_cast<int>((seed - 1) % max_degree); }

struct Outcome {
  double measured = 0.0;  // worst value of the criterion's metric
  int instances = 0;
  bool side_conditions = true;  // secondary checks folded into the verdict
  std::string detail;
};

enum class Sense { at_most, at_least };

struct Criterion {
  std::string key;
  std::string title;
  double tolerance;
  Sense sense;
  double runtime_limit;  // seconds; 0 means none
  std::function<Outcome(double tolerance)> run;
};

struct Result {
  std::string key;
  std::string title;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  Sense sense = Sense::at_most;
  double seconds = 0.0;
  double runtime_limit = 0.0;
  int instances = 0;
  bool side_conditions = true;
  std::string detail;
  std::string error;  // set if the run threw
};

namespace detail {

inline Outcome dkbs(double) {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto in = make_instance(seed, battery_size(seed), battery_degree(seed, 8));
    const ComplexMatrix fu = matrix_function(in.u, in.f);
    const ComplexMatrix direct = fu - matrix_function(in.v, in.f);
    const double err = (dkbs_difference(in.f, in.u, in.v) - direct).norm() / (1.0 + fu.norm());
    o.measured = std::max(o.measured, err);
    ++o.instances;
  }
  o.detail = "max ||DOI - (f(U)-f(V))||_F / (1 + ||f(U)||_F)";
  return o;
}

inline Outcome diagonal_trace_formula(double) {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto in = make_instance(seed, battery_size(seed), battery_degree(seed, 8));
    const auto du = decompose_unitary(in.u);
    const auto phi = divided_difference_kernel(in.f, du.points());
    for (const ComplexMatrix& t : {ComplexMatrix(in.u.matrix() - in.v.matrix()), in.a.matrix()}) {
      const cplx full = doi_compute(phi, du, t, du).trace();
      o.measured = std::max(o.measured, std::abs(doi_trace(phi, du, t) - full) / (1.0 + std::abs(full)));
    }
    ++o.instances;
  }
  o.detail = "max |doi_trace - trace(doi_compute)| / (1 + |trace|), T in {U-V, A}";
  return o;
}

inline Outcome trace_norm_bound(double) {
  Outcome o;
  o.measured = -1.0;
  std::mt19937_64 rng(2024);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Index n = 2 + static_cast<Index>((seed - 1) % 11);
    const auto in = make_instance(seed, n, battery_degree(seed, 6));
    const auto du = decompose_unitary(in.u);
    const auto dv = decompose_unitary(in.v);
    const auto phi = divided_difference_kernel(in.f, du.points(), dv.points());
    const ComplexMatrix t = random_gaussian(n, n, rng);
    const double lhs = trace_norm(doi_compute(phi, du, t, dv));
    const double bound = schur_norm(phi).value * trace_norm(t);
    // Slack actually used, as a fraction of the bound.
    o.measured = std::max(o.measured, lhs / bound - 1.0);
    ++o.instances;
  }
  o.detail = "max trace_norm(DOI) / (schur_norm * trace_norm(T)) - 1";
  return o;
}

inline Outcome derivative(double) {
  Outcome o;
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < 20; ++k) {
    const double s = k == 0 ? 0.0 : k == 1 ? 0.37 : k == 2 ? 1.0 : 0.05 * k;
    const std::uint64_t seed = 200 + static_cast<std::uint64_t>(k);
    const Index n = 2 + static_cast<Index>(k % 11);
    const auto in = make_instance(seed, n, 1 + k % 6);
    const auto fit = fd_probe(in.f, in.u, in.a, s, {4e-3, 2e-3, 1e-3, 5e-4});
    const auto at = fd_probe(in.f, in.u, in.a, s, {1e-5});
    lo = std::min(lo, fit.fitted_order);
    hi = std::max(hi, fit.fitted_order);
    if (!(fit.fitted_order >= 1.8 && fit.fitted_order <= 2.2)) o.side_conditions = false;
    o.measured = std::max(o.measured, at.fd_errors[0].error / std::max(at.qs.norm(), 1e-300));
    ++o.instances;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max ||fd(1e-5) - Q_s||_F / ||Q_s||_F; fitted orders in [%.4f, %.4f] (band [1.8, 2.2])",
                lo, hi);
  o.detail = buf;
  return o;
}

inline Outcome krein_formula(double) {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto in = make_instance(300 + seed, battery_size(seed * 7 % 15 + 1), battery_degree(seed, 8), 2.0);
    o.measured = std::max(o.measured, verify_trace_formula(in.f, in.u, in.a).rel_error);
    ++o.instances;
  }
  // U = I, A = diag(pi/2, 0), f(z) = z: both sides equal 1 - i exactly.
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = pi / 2;
  const auto r = verify_trace_formula(monomial(1), UnitaryMatrix::identity(2), HermitianMatrix(a));
  const cplx expected(1.0, -1.0);
  o.measured = std::max({o.measured, std::abs(r.lhs - expected), std::abs(r.rhs - expected)});
  ++o.instances;
  o.detail = "max rel_error over 20 random pairs and |side - (1-i)| on the 2x2 case";
  return o;
}

inline Outcome route_agreement(double) {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto in = make_instance(400 + seed, 2 + static_cast<Index>((seed * 5) % 15), battery_degree(seed, 6));
    const cplx quad = qs_trace_quadrature(in.f, in.u, in.a, 128);
    const cplx direct = -direct_trace_difference(in.f, in.u, in.v);
    o.measured = std::max(o.measured, std::abs(quad - direct));
    ++o.instances;
  }
  o.detail = "max |Simpson(128) of trace Q_s - trace(f(V)-f(U))|";
  return o;
}

inline Outcome gauge(double) {
  Outcome o;
  const double shifts[] = {-3.0, -0.5, 0.25, 1.0, 7.5};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto in = make_instance(500 + seed, battery_size(seed * 3), battery_degree(seed, 8));
    const auto xi = build_ssf(track_eigenphases(in.u, in.a));
    const cplx base = krein_rhs(xi, in.f);
    for (double c : shifts) {
      o.measured = std::max(o.measured, std::abs(krein_rhs(xi.shifted(c), in.f) - base));
      ++o.instances;
    }
  }
  o.detail = "max |krein_rhs(xi + c) - krein_rhs(xi)|";
  return o;
}

inline Outcome multiplier_soundness(double) {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst_probe_excess = -1.0;  // max over probes of ratio / upper - 1
  double worst_bracket = -1.0;       // max of lower / upper - 1
  for (std::uint64_t k = 1; k <= 30; ++k) {
    KernelMatrix kernel;
    if (k % 2 == 1) {
      const Index r = 2 + static_cast<Index>(k % 6), c = 2 + static_cast<Index>((k / 2) % 6);
      kernel.values = random_gaussian(r, c, rng);
    } else {
      const auto in = make_instance(600 + k, 2 + static_cast<Index>(k % 9), 1 + static_cast<int>(k % 6));
      kernel = divided_difference_kernel(in.f, decompose_unitary(in.u).points(), decompose_unitary(in.v).points());
    }
    const auto res = schur_norm(kernel);
    worst_bracket = std::max(worst_bracket, res.lower_bound / res.value - 1.0);
    for (int p = 0; p < 100; ++p) {
      const ComplexMatrix t = random_gaussian(kernel.values.rows(), kernel.values.cols(), rng);
      worst_probe_excess = std::max(worst_probe_excess, probe_ratio(kernel.values, t) / res.value - 1.0);
    }
    ++o.instances;
  }
  KernelMatrix ones{{}, {}, ComplexMatrix::Ones(4, 4)};
  KernelMatrix rank_one{{}, {}, ComplexMatrix::Constant(2, 2, 2.0)};
  const double e1 = std::abs(schur_norm(ones).value - 1.0);
  const double e2 = std::abs(schur_norm(rank_one).value - 2.0);
  o.instances += 2;
  o.measured = std::max(e1, e2);
  o.side_conditions = worst_probe_excess <= 1e-9 && worst_bracket <= 1e-9;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "closed-form error (ones 4x4: %.3g, [[2,2],[2,2]]: %.3g); max probe/upper - 1 = %.3g; "
                "max lower/upper - 1 = %.3g",
                e1, e2, worst_probe_excess, worst_bracket);
  o.detail = buf;
  return o;
}

inline Outcome ol_growth(double) {
  Outcome o;
  const auto bounds = ol_lower_bound(abs_theta(), {16, 256});
  o.measured = bounds[1].bound / bounds[0].bound;
  o.instances = 2;
  char buf[120];
  std::snprintf(buf, sizeof buf, "bound(256) / bound(16) with bound(16) = %.6f, bound(256) = %.6f", bounds[0].bound,
                bounds[1].bound);
  o.detail = buf;
  return o;
}

inline Outcome twist(double) {
  Outcome o;
  for (std::uint64_t k = 1; k <= 5; ++k) {
    const std::uint64_t seed = 700 + k;
    const auto in = make_instance(seed, 3 + static_cast<Index>(2 * k), 6);
    const auto direct = twist_scan(in.f, in.u, in.v, 256);
    const auto rotated = twist_scan(in.f, build_ssf(track_eigenphases(in.u, in.a)), 256);
    for (std::size_t j = 0; j < direct.samples.size(); ++j) {
      o.measured = std::max(o.measured, std::abs(direct.samples[j].value - rotated.samples[j].value));
    }
    ++o.instances;
  }
  o.detail = "max over samples of |direct trace - int f_zeta' xi|";
  return o;
}

}  // namespace detail

inline std::vector<Criterion> criteria() {
  return {
      {"dkbs", "DKBS difference identity", 1e-9, Sense::at_most, 10.0, detail::dkbs},
      {"diagonal-trace", "Diagonal trace formula", 1e-10, Sense::at_most, 5.0, detail::diagonal_trace_formula},
      {"trace-norm", "Trace-norm transformer bound", 1e-4, Sense::at_most, 60.0, detail::trace_norm_bound},
      {"derivative", "Derivative along the unitary path", 1e-4, Sense::at_most, 20.0, detail::derivative},
      {"krein", "Krein trace formula", 1e-7, Sense::at_most, 60.0, detail::krein_formula},
      {"route", "Quadrature route agreement", 1e-6, Sense::at_most, 30.0, detail::route_agreement},
      {"gauge", "Gauge freedom of xi", 1e-12, Sense::at_most, 0.0, detail::gauge},
      {"multiplier", "Multiplier norm soundness", 1e-6, Sense::at_most, 0.0, detail::multiplier_soundness},
      {"ol-growth", "Non-OL witness growth (abs-theta)", 1.5, Sense::at_least, 120.0, detail::ol_growth},
      {"twist", "Twist scan against rotated functions", 1e-7, Sense::at_most, 0.0, detail::twist},
  };
}

/// Runs the selected criteria (all if `only` is empty). `overrides` replaces
/// tolerances by key.
inline std::vector<Result> run(const std::vector<std::string>& only = {},
                               const std::map<std::string, double>& overrides = {}) {
  const auto all = criteria();
  for (const auto& [key, value] : overrides) {
    if (std::none_of(all.begin(), all.end(), [&](const Criterion& c) { return c.key == key; })) {
      throw validation_error("unknown criterion '" + key + "' in tolerance override");
    }
    if (!(value > 0.0) || !std::isfinite(value)) throw validation_error("tolerance for '" + key + "' must be positive");
  }
  for (const auto& key : only) {
    if (std::none_of(all.begin(), all.end(), [&](const Criterion& c) { return c.key == key; })) {
      throw validation_error("unknown criterion '" + key + "'");
    }
  }
  std::vector<Result> out;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.key) == only.end()) continue;
    Result r;
    r.key = c.key;
    r.title = c.title;
    r.sense = c.sense;
    r.runtime_limit = c.runtime_limit;
    r.tolerance = overrides.count(c.key) ? overrides.at(c.key) : c.tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.run(r.tolerance);
      r.measured = o.measured;
      r.instances = o.instances;
      r.side_conditions = o.side_conditions;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool within = c.sense == Sense::at_most ? r.measured <= r.tolerance : r.measured >= r.tolerance;
    const bool in_time = r.runtime_limit <= 0.0 || r.seconds <= r.runtime_limit;
    r.passed = r.error.empty() && within && in_time && r.side_conditions;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string summary_line(const Result& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "[%s] %-14s measured %.6g %s %.3g  (%d instances, %.2f s%s)%s%s%s",
                r.passed ? "PASS" : "FAIL", r.key.c_str(), r.measured, r.sense == Sense::at_most ? "<=" : ">=",
                r.tolerance, r.instances, r.seconds,
                r.runtime_limit > 0.0 ? (r.seconds <= r.runtime_limit ? ", in time" : ", over time limit") : "",
                r.side_conditions ? "" : "  side condition failed",
                r.error.empty() ? "" : "  error: ", r.error.c_str());
  return buf;
}

}  // namespace krein::acceptance
