#pragma once

// Schur-multiplier norms of finite kernels.
//
// ||Phi||_M <= c  iff  some Hermitian completion [[S, Phi], [Phi*, R]] is PSD
// with diag(S) <= c and diag(R) <= c. Upper bounds come from factorizations
// Phi(i, j) = sum_n a_i(n) b_j(n) read off a PSD completion (with an explicit
// correction for the residual, so every reported upper bound is a genuine
// factorization). At desk scale the completion is found by a log-det barrier
// method; larger kernels fall back to bisection with alternating projections.
// Lower bounds use the dual form
//   ||Phi||_M = max_{|x| = |y| = 1} || diag(x) Phi diag(y) ||_{S1},
// maximized by coordinate ascent.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "krein/circlefn.hpp"
#include "krein/doi.hpp"
#include "krein/error.hpp"
#include "krein/spectra.hpp"

namespace krein {

/// Phi(i, j) = sum_n a(i, n) b(j, n), bilinear (no conjugation).
struct Factorization {
  ComplexMatrix a;
  ComplexMatrix b;

  ComplexMatrix product() const { return a * b.transpose(); }
  double max_left_norm() const { return a.rowwise().norm().maxCoeff(); }
  double max_right_norm() const { return b.rowwise().norm().maxCoeff(); }
  double norm_bound() const { return max_left_norm() * max_right_norm(); }
};

struct SchurCertificate {
  double min_eigenvalue = 0.0;           // of the last projected completion, before PSD clipping
  double max_diag_excess = 0.0;          // of the last PSD completion above the probe level
  double reconstruction_residual = 0.0;  // ||Phi - A B^T||_max of the returned factorization
};

struct SchurNormResult {
  double value = 0.0;        // certified upper bound; equals the factorization norm
  double lower_bound = 0.0;  // certified lower bound
  std::optional<Factorization> factorization;
  SchurCertificate certificate;
  int iterations = 0;  // Newton steps (barrier) or projection sweeps summed over probes
  int probes = 0;
  bool bounds_only = false;  // gap between certificates exceeds the tolerance
};

struct SchurNormOptions {
  double tol = 1e-6;
  int max_iterations = 10000;  // per feasibility probe; total Newton steps for the barrier
  int max_probes = 40;
  int restarts = 4;            // random starts for the lower-bound ascent
  int ascent_iterations = 200;
  std::uint64_t seed = 1;
};

struct LowerBound {
  double value = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// ||Phi o T|| / ||T|| in operator norm; any probe T gives a lower bound.
inline double probe_ratio(const ComplexMatrix& phi, const ComplexMatrix& t) {
  const double nt = operator_norm(t);
  if (nt == 0.0) return 0.0;
  return operator_norm(phi.cwiseProduct(t)) / nt;
}

namespace detail {

inline double weighted_trace_norm(const ComplexMatrix& phi, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  ComplexMatrix* polar) {
  const ComplexMatrix m = x.asDiagonal() * phi * y.asDiagonal();
  Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (polar) *polar = svd.matrixV() * svd.matrixU().adjoint();  // Re tr(W M) = ||M||_1
  return svd.singularValues().sum();
}

inline LowerBound ascend(const ComplexMatrix& phi, Eigen::VectorXd x, Eigen::VectorXd y, int iterations) {
  ComplexMatrix w;
  double best = weighted_trace_norm(phi, x, y, &w);
  LowerBound out{best, x, y};
  for (int it = 0; it < iterations; ++it) {
    // y_j <- |sum_i W_ji x_i Phi_ij|, normalized
    const ComplexMatrix xphi = x.asDiagonal() * phi;
    Eigen::VectorXd cy = xphi.cwiseProduct(w.transpose()).colwise().sum().cwiseAbs().transpose();
    if (cy.norm() == 0.0) break;
    y = cy / cy.norm();
    weighted_trace_norm(phi, x, y, &w);
    const ComplexMatrix phiy = phi * y.asDiagonal();
    Eigen::VectorXd cx = phiy.cwiseProduct(w.transpose()).rowwise().sum().cwiseAbs();
    if (cx.norm() == 0.0) break;
    x = cx / cx.norm();
    const double val = weighted_trace_norm(phi, x, y, &w);
    const double gain = val - best;
    if (val > best) out = {val, x, y};
    best = std::max(best, val);
    if (gain <= 1e-13 * best) break;
  }
  return out;
}

}  // namespace detail

/// Certified lower bound max ||diag(x) Phi diag(y)||_{S1} over unit x, y, by
/// coordinate ascent from the uniform start, the best point mass and random starts.
inline LowerBound schur_lower_bound(const ComplexMatrix& phi, int restarts = 4, int iterations = 200,
                                    std::uint64_t seed = 1) {
  const Index m = phi.rows();
  const Index p = phi.cols();
  LowerBound best;
  best.x = Eigen::VectorXd::Zero(m);
  best.y = Eigen::VectorXd::Zero(p);
  Index bi = 0, bj = 0;
  best.value = phi.cwiseAbs().maxCoeff(&bi, &bj);
  best.x[bi] = 1.0;
  best.y[bj] = 1.0;

  auto consider = [&](LowerBound lb) {
    if (lb.value > best.value) best = std::move(lb);
  };
  consider(detail::ascend(phi, Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m))),
                          Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(double(p))), iterations));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x(m), y(p);
    for (Index i = 0; i < m; ++i) x[i] = uni(rng);
    for (Index j = 0; j < p; ++j) y[j] = uni(rng);
    consider(detail::ascend(phi, x / x.norm(), y / y.norm(), iterations));
  }
  return best;
}

namespace detail {

// Rescale so that max_i |a_i| == max_j |b_j|.
inline void balance(Factorization& f) {
  const double la = f.max_left_norm();
  const double lb = f.max_right_norm();
  if (la > 0.0 && lb > 0.0) {
    const double beta = std::sqrt(lb / la);
    f.a *= beta;
    f.b /= beta;
  }
}

// Exact factorization of Phi from an approximate one (product Phi'), absorbing
// E = Phi - Phi' either as E * I (extra left columns) or I * E (extra right columns).
inline Factorization repair(const ComplexMatrix& phi, Factorization f) {
  const ComplexMatrix e = phi - f.product();
  const Index m = phi.rows();
  const Index p = phi.cols();
  const Index r = f.a.cols();
  const Eigen::VectorXd sa = f.a.rowwise().squaredNorm();
  const Eigen::VectorXd sb = f.b.rowwise().squaredNorm();
  const double emax_row = e.rowwise().squaredNorm().maxCoeff();
  const double emax_col = e.colwise().squaredNorm().maxCoeff();
  if (emax_row == 0.0 || emax_col == 0.0) {
    balance(f);
    return f;
  }

  // Score of a candidate alpha: product of the two largest squared row norms.
  auto score_rows = [&](double alpha2) {
    const double ma = (sa + alpha2 * e.rowwise().squaredNorm()).maxCoeff();
    const double mb = sb.maxCoeff() + 1.0 / alpha2;
    return ma * mb;
  };
  auto score_cols = [&](double alpha2) {
    const double ma = sa.maxCoeff() + 1.0 / alpha2;
    const double mb = (sb + alpha2 * e.colwise().squaredNorm().transpose()).maxCoeff();
    return ma * mb;
  };
  auto best_alpha = [](auto score, double guess) {
    double best_a = guess, best_s = score(guess);
    for (double k : {0.25, 0.5, 0.7, 0.85, 1.2, 1.4, 2.0, 4.0}) {
      const double s = score(guess * k);
      if (s < best_s) best_s = s, best_a = guess * k;
    }
    return std::pair{best_a, best_s};
  };
  const double sa_max = std::max(sa.maxCoeff(), 1e-300);
  const double sb_max = std::max(sb.maxCoeff(), 1e-300);
  const auto [ar, sr] = best_alpha(score_rows, std::sqrt(sa_max / (emax_row * sb_max)));
  const auto [ac, sc] = best_alpha(score_cols, std::sqrt(sb_max / (emax_col * sa_max)));

  Factorization out;
  if (sr <= sc) {
    const double alpha = std::sqrt(ar);
    out.a.resize(m, r + p);
    out.b.resize(p, r + p);
    out.a << f.a, alpha * e;
    out.b << f.b, ComplexMatrix::Identity(p, p) / alpha;
  } else {
    const double alpha = std::sqrt(ac);
    out.a.resize(m, r + m);
    out.b.resize(p, r + m);
    out.a << f.a, ComplexMatrix::Identity(m, m) / alpha;
    out.b << f.b, alpha * e.transpose();
  }
  balance(out);
  return out;
}

// Factorization read off a PSD completion M = X X*: a = X_top, b = conj(X_bottom).
inline Factorization from_completion(const Eigen::SelfAdjointEigenSolver<ComplexMatrix>& es, Index m, Index p) {
  const Eigen::VectorXd& lam = es.eigenvalues();
  Index first = 0;
  while (first < lam.size() && lam[first] <= 0.0) ++first;
  const Index r = std::max<Index>(lam.size() - first, 1);
  ComplexMatrix x = ComplexMatrix::Zero(m + p, r);
  for (Index k = first; k < lam.size(); ++k) x.col(k - first) = es.eigenvectors().col(k) * std::sqrt(lam[k]);
  return {x.topRows(m), x.bottomRows(p).conjugate()};
}

inline Factorization trivial_factorization(const ComplexMatrix& phi) {
  // Phi = Phi * I or I * Phi, whichever has the smaller norm bound.
  const double row = phi.rowwise().norm().maxCoeff();
  const double col = phi.colwise().norm().maxCoeff();
  Factorization f;
  if (row <= col) {
    f = {phi, ComplexMatrix::Identity(phi.cols(), phi.cols())};
  } else {
    f = {ComplexMatrix::Identity(phi.rows(), phi.rows()), phi.transpose()};
  }
  balance(f);
  return f;
}

struct ProbeOutcome {
  bool feasible = false;
  int iterations = 0;
  std::optional<Factorization> best;
  double best_norm = std::numeric_limits<double>::infinity();
  double min_eigenvalue = 0.0;
  double max_diag_excess = 0.0;
};

// Alternating projections between the PSD cone and
// {off-diagonal block = Phi, diagonal <= c}; `m` is warm-started and updated.
inline ProbeOutcome feasibility_probe(const ComplexMatrix& phi, double c, ComplexMatrix& m, int max_iterations,
                                      double accept) {
  const Index rows = phi.rows();
  const Index cols = phi.cols();
  const Index n = rows + cols;
  ProbeOutcome out;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    // Project onto the affine/box set.
    m.topRightCorner(rows, cols) = phi;
    m.bottomLeftCorner(cols, rows) = phi.adjoint();
    for (Index i = 0; i < n; ++i) m(i, i) = std::min(m(i, i).real(), c);
    // Project onto the PSD cone.
    es.compute(m);
    out.min_eigenvalue = es.eigenvalues()[0];
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    ComplexMatrix next = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    const double step = (next - m).norm();
    m = std::move(next);
    out.iterations = it;

    const bool check = (it % 5 == 0) || it == max_iterations || step < 1e-14 * (1.0 + c);
    if (check) {
      double excess = 0.0;
      for (Index i = 0; i < n; ++i) excess = std::max(excess, m(i, i).real() - c);
      out.max_diag_excess = excess;
      Factorization f = repair(phi, from_completion(es, rows, cols));
      const double norm = f.norm_bound();
      if (norm < out.best_norm) {
        out.best_norm = norm;
        out.best = std::move(f);
      }
      if (out.best_norm <= accept) {
        out.feasible = true;
        return out;
      }
      // Stalled: the sets are (numerically) disjoint at this level.
      if (step < 1e-14 * (1.0 + c) || (it > 200 && step > 0.999999 * last_step && step < 1e-9)) return out;
    }
    last_step = step;
  }
  return out;
}

}  // namespace detail

namespace detail {

// Interior-point route: minimize t*c - log det M over the strictly feasible
// completions M = [[S, Phi], [Phi*, R]] with diag(M) = c, following the central
// path. Variables are c and the real/imaginary parts of the strictly upper
// entries of S and R; the Phi block never moves, so every iterate is an exact
// completion and yields an exact factorization with norm c.
class CompletionBarrier {
 public:
  explicit CompletionBarrier(const ComplexMatrix& phi) : phi_(phi), rows_(phi.rows()), n_(phi.rows() + phi.cols()) {
    for (Index a = 0; a < n_; ++a)
      for (Index b = a + 1; b < n_; ++b)
        if ((a < rows_) == (b < rows_)) pairs_.push_back({a, b});
    vars_ = 1 + 2 * static_cast<Index>(pairs_.size());
  }

  Index variable_count() const { return vars_; }

  struct Outcome {
    double c = 0.0;
    ComplexMatrix completion;
    Eigen::VectorXd dual_diagonal;  // diag of M^{-1} at the last center
    int newton_steps = 0;
    bool converged = false;
  };

  Outcome solve(double c0, double target_gap, int max_newton) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(vars_);
    v[0] = c0;
    double t = static_cast<double>(n_) / c0;
    Outcome out;
    ComplexMatrix g;
    while (true) {
      bool centered = false;
      for (int step = 0; step < 60 && out.newton_steps < max_newton; ++step) {
        ++out.newton_steps;
        const ComplexMatrix m = assemble(v);
        Eigen::LLT<ComplexMatrix> llt(m);
        g = llt.solve(ComplexMatrix::Identity(n_, n_));
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        derivatives(g, t, grad, hess);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        const Eigen::VectorXd dv = -ldlt.solve(grad);
        const double decrement = -grad.dot(dv);
        if (!(decrement >= 0.0) || !dv.allFinite()) break;
        if (decrement < 1e-10) {
          centered = true;
          break;
        }
        const double f0 = objective(llt, v, t);
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
          const Eigen::VectorXd trial = v + alpha * dv;
          Eigen::LLT<ComplexMatrix> tl(assemble(trial));
          if (tl.info() != Eigen::Success || !positive_diagonal(tl)) continue;
          if (objective(tl, trial, t) <= f0 - 0.25 * alpha * decrement) {
            v = trial;
            moved = true;
            break;
          }
        }
        if (!moved) {
          centered = true;  // no further progress at this precision
          break;
        }
      }
      out.c = v[0];
      out.completion = assemble(v);
      out.dual_diagonal = g.diagonal().real();
      if (static_cast<double>(n_) / t <= target_gap) {
        out.converged = centered;
        return out;
      }
      if (out.newton_steps >= max_newton) return out;
      t *= 8.0;
    }
  }

 private:
  ComplexMatrix assemble(const Eigen::VectorXd& v) const {
    ComplexMatrix m = ComplexMatrix::Zero(n_, n_);
    m.topRightCorner(rows_, n_ - rows_) = phi_;
    m.bottomLeftCorner(n_ - rows_, rows_) = phi_.adjoint();
    m.diagonal().setConstant(v[0]);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [a, b] = pairs_[k];
      const cplx z(v[1 + 2 * k], v[2 + 2 * k]);
      m(a, b) = z;
      m(b, a) = std::conj(z);
    }
    return m;
  }

  static bool positive_diagonal(const Eigen::LLT<ComplexMatrix>& llt) {
    const auto l = llt.matrixLLT().diagonal().real();
    return (l.array() > 0.0).all() && l.allFinite();
  }

  double objective(const Eigen::LLT<ComplexMatrix>& llt, const Eigen::VectorXd& v, double t) const {
    const auto l = llt.matrixLLT().diagonal().real();
    return t * v[0] - 2.0 * l.array().log().sum();
  }

  // Gradient and Hessian of t*c - log det M. With G = M^{-1}:
  //   d/dv_k = t*[k = c] - tr(G E_k),   d2/dv_k dv_l = tr(G E_k G E_l).
  void derivatives(const ComplexMatrix& g, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const ComplexMatrix g2 = g * g;
    grad.resize(vars_);
    hess.resize(vars_, vars_);
    grad[0] = t - g.trace().real();
    hess(0, 0) = g.squaredNorm();
    const std::size_t np = pairs_.size();
    for (std::size_t k = 0; k < np; ++k) {
      const auto [a, b] = pairs_[k];
      // E_re = e_a e_b^T + e_b e_a^T,  E_im = i e_a e_b^T - i e_b e_a^T
      grad[1 + 2 * k] = -2.0 * g(a, b).real();
      grad[2 + 2 * k] = -2.0 * g(a, b).imag();
      hess(0, 1 + 2 * k) = hess(1 + 2 * k, 0) = 2.0 * g2(a, b).real();
      hess(0, 2 + 2 * k) = hess(2 + 2 * k, 0) = 2.0 * g2(a, b).imag();
    }
    const cplx i1(0.0, 1.0);
    for (std::size_t k = 0; k < np; ++k) {
      const auto [a, b] = pairs_[k];
      for (std::size_t l = k; l < np; ++l) {
        const auto [c, d] = pairs_[l];
        // tr(G e_p e_q^T G e_r e_s^T) = G_sp G_qr
        const cplx ab_cd = g(d, a) * g(b, c);  // (p,q)=(a,b), (r,s)=(c,d)
        const cplx ab_dc = g(c, a) * g(b, d);
        const cplx ba_cd = g(d, b) * g(a, c);
        const cplx ba_dc = g(c, b) * g(a, d);
        const double rr = (ab_cd + ab_dc + ba_cd + ba_dc).real();
        const double ri = (i1 * (ab_cd - ab_dc + ba_cd - ba_dc)).real();
        const double ir = (i1 * (ab_cd + ab_dc - ba_cd - ba_dc)).real();
        const double ii = -(ab_cd - ab_dc - ba_cd + ba_dc).real();
        const Index kr = 1 + 2 * static_cast<Index>(k), ki = kr + 1;
        const Index lr = 1 + 2 * static_cast<Index>(l), li = lr + 1;
        hess(kr, lr) = hess(lr, kr) = rr;
        hess(kr, li) = hess(li, kr) = ri;
        hess(ki, lr) = hess(lr, ki) = ir;
        hess(ki, li) = hess(li, ki) = ii;
      }
    }
  }

  const ComplexMatrix& phi_;
  Index rows_;
  Index n_;
  std::vector<std::pair<Index, Index>> pairs_;
  Index vars_ = 1;
};

inline Factorization factor_completion(const ComplexMatrix& m, Index rows, Index cols) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  return from_completion(es, rows, cols);
}

}  // namespace detail

enum class SchurMethod { automatic, barrier, alternating_projections };

/// Completions up to this order go to the barrier solver under `automatic`.
inline constexpr Index barrier_order_limit = 40;

/// Schur-multiplier norm, bracketed by certified lower and upper bounds.
/// The upper bound is always the norm of the returned factorization.
inline SchurNormResult schur_norm(const KernelMatrix& kernel, const SchurNormOptions& opt = {},
                                  SchurMethod method = SchurMethod::automatic) {
  const ComplexMatrix& phi = kernel.values;
  if (phi.size() == 0) throw validation_error("schur_norm: empty kernel");
  if (!all_finite(phi)) throw validation_error("schur_norm: non-finite kernel entry");
  if (!(opt.tol > 1e-8 && opt.tol < 1e-2)) throw validation_error("schur_norm: tol must lie in (1e-8, 1e-2)");

  SchurNormResult res;
  const Index rows = phi.rows();
  const Index cols = phi.cols();
  const Index n = rows + cols;
  LowerBound lb = schur_lower_bound(phi, opt.restarts, opt.ascent_iterations, opt.seed);
  res.lower_bound = lb.value;
  if (res.lower_bound == 0.0) {  // zero kernel
    res.factorization = Factorization{ComplexMatrix::Zero(rows, 1), ComplexMatrix::Zero(cols, 1)};
    return res;
  }

  Factorization best = detail::trivial_factorization(phi);
  double hi = best.norm_bound();
  const double op = operator_norm(phi);

  if (method == SchurMethod::automatic) {
    method = n <= barrier_order_limit ? SchurMethod::barrier : SchurMethod::alternating_projections;
  }

  if (method == SchurMethod::barrier && hi > res.lower_bound * (1.0 + opt.tol)) {
    detail::CompletionBarrier barrier(phi);
    const auto out = barrier.solve(op * 1.01 + 1e-12, 0.5 * opt.tol * res.lower_bound, opt.max_iterations);
    res.iterations = out.newton_steps;
    res.probes = 1;
    Factorization f = detail::repair(phi, detail::factor_completion(out.completion, rows, cols));
    if (f.norm_bound() < hi) {
      hi = f.norm_bound();
      best = std::move(f);
    }
    // The central dual point suggests the weights of a near-optimal lower bound.
    if (hi > res.lower_bound * (1.0 + opt.tol)) {
      const Eigen::VectorXd w = out.dual_diagonal.cwiseMax(0.0).cwiseSqrt();
      Eigen::VectorXd x = w.head(rows), y = w.tail(cols);
      if (x.norm() > 0.0 && y.norm() > 0.0) {
        const LowerBound seeded = detail::ascend(phi, x / x.norm(), y / y.norm(), opt.ascent_iterations);
        if (seeded.value > res.lower_bound) res.lower_bound = seeded.value;
      }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(out.completion, Eigen::EigenvaluesOnly);
    res.certificate.min_eigenvalue = es.eigenvalues()[0];
    res.certificate.max_diag_excess = 0.0;
  } else if (method == SchurMethod::alternating_projections) {
    double bracket_lo = std::max(res.lower_bound, phi.cwiseAbs().maxCoeff());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m.topLeftCorner(rows, rows).diagonal().setConstant(op);
    m.bottomRightCorner(cols, cols).diagonal().setConstant(op);
    auto converged = [&] { return hi <= res.lower_bound * (1.0 + opt.tol) || hi <= bracket_lo * (1.0 + opt.tol); };
    while (!converged() && res.probes < opt.max_probes) {
      // Bias probes toward the lower bound, which the ascent usually attains.
      const double c = std::max(bracket_lo * (1.0 + 0.25 * opt.tol), bracket_lo + 0.25 * (hi - bracket_lo));
      const double accept = std::min(hi, c * (1.0 + 0.5 * opt.tol));
      detail::ProbeOutcome probe = detail::feasibility_probe(phi, c, m, opt.max_iterations, accept);
      ++res.probes;
      res.iterations += probe.iterations;
      res.certificate.min_eigenvalue = probe.min_eigenvalue;
      res.certificate.max_diag_excess = probe.max_diag_excess;
      if (probe.best && probe.best_norm < hi) {
        hi = probe.best_norm;
        best = std::move(*probe.best);
      }
      if (!probe.feasible) bracket_lo = c;
    }
  }

  res.value = best.norm_bound();
  res.certificate.reconstruction_residual = (phi - best.product()).cwiseAbs().maxCoeff();
  res.factorization = std::move(best);
  res.bounds_only = res.value > res.lower_bound * (1.0 + opt.tol);
  return res;
}

/// (T Phi)(x_i) = sum_n a_i(n) b_i(n) for a square kernel on one grid.
struct DiagonalTrace {
  ComplexVector points;
  ComplexVector values;
};

inline DiagonalTrace diagonal_trace(const Factorization& f, const ComplexVector& points) {
  if (f.a.rows() != f.b.rows() || f.a.cols() != f.b.cols() || f.a.rows() != points.size()) {
    throw validation_error("diagonal_trace: factorization does not match the point grid");
  }
  return {points, f.a.cwiseProduct(f.b).rowwise().sum()};
}

inline DiagonalTrace diagonal_trace(const SchurNormResult& result, const ComplexVector& points) {
  if (!result.factorization) throw validation_error("diagonal_trace: result carries no factorization");
  return diagonal_trace(*result.factorization, points);
}

/// n equispaced points on the circle rotated by half a step.
inline ComplexVector half_step_grid(Index n) {
  ComplexVector z(n);
  for (Index k = 0; k < n; ++k) z[k] = unit(two_pi * static_cast<double>(k) / n + pi / n);
  return z;
}

struct GridBound {
  Index n = 0;
  double bound = 0.0;  // running maximum over the grids so far
  double raw = 0.0;    // bound from this grid alone
};

/// Lower bounds on ||f||_OL from divided-difference kernels on half-step grids.
inline std::vector<GridBound> ol_lower_bound(const CircleFunction& f, const std::vector<Index>& grid_sizes,
                                             int restarts = 1, int iterations = 100, std::uint64_t seed = 1) {
  std::vector<GridBound> out;
  double running = 0.0;
  for (Index n : grid_sizes) {
    if (n < 2) throw validation_error("ol_lower_bound: grid sizes must be >= 2");
    const auto kernel = divided_difference_kernel(f, half_step_grid(n));
    const double raw = schur_lower_bound(kernel.values, restarts, iterations, seed).value;
    running = std::max(running, raw);
    out.push_back({n, running, raw});
  }
  return out;
}

}  // namespace krein
