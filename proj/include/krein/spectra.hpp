#pragma once

// Validated unitary/Hermitian matrices, their spectral decompositions
// (finite atomic spectral measures), functional calculus, the path
// V_s = e^{isA} U, and seeded random generators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "krein/circlefn.hpp"
#include "krein/error.hpp"

namespace krein {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Default arc/absolute distance below which eigenvalues share a cluster.
inline constexpr double default_gap_tol = 1e-10;

inline bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw validation_error(std::string(what) + ": expected a non-empty square matrix, got " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

/// Square matrix with ||U*U - I||_F <= 1e-10 n, checked on construction.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "UnitaryMatrix");
    if (!all_finite(m_)) throw validation_error("UnitaryMatrix: non-finite entry");
    const double defect = unitarity_defect(m_);
    const double bound = 1e-10 * static_cast<double>(m_.rows());
    if (defect > bound) {
      std::ostringstream os;
      os << "UnitaryMatrix: unitarity violated, ||U*U - I||_F = " << defect << " exceeds " << bound;
      throw validation_error(os.str());
    }
  }

  static UnitaryMatrix identity(Index n) { return UnitaryMatrix(ComplexMatrix::Identity(n, n)); }

  static double unitarity_defect(const ComplexMatrix& m) {
    return (m.adjoint() * m - ComplexMatrix::Identity(m.cols(), m.cols())).norm();
  }

  const ComplexMatrix& matrix() const { return m_; }
  Index size() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

/// Square matrix with ||A - A*||_F <= 1e-12 ||A||_F + 1e-14, checked on construction.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "HermitianMatrix");
    if (!all_finite(m_)) throw validation_error("HermitianMatrix: non-finite entry");
    const double asym = (m_ - m_.adjoint()).norm();
    const double bound = 1e-12 * m_.norm() + 1e-14;
    if (asym > bound) {
      std::ostringstream os;
      os << "HermitianMatrix: self-adjointness violated, ||A - A*||_F = " << asym << " exceeds " << bound;
      throw validation_error(os.str());
    }
  }

  static HermitianMatrix zero(Index n) { return HermitianMatrix(ComplexMatrix::Zero(n, n)); }

  const ComplexMatrix& matrix() const { return m_; }
  Index size() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

enum class SpectrumKind { unitary, hermitian };

/// Eigenvalues, orthonormal eigenvectors (columns) and multiplicity clusters.
/// Unitary eigenvalues are sorted by angle in [0, 2pi), Hermitian ones ascending.
struct SpectralDecomposition {
  SpectrumKind kind = SpectrumKind::unitary;
  ComplexVector values;
  ComplexMatrix vectors;
  std::vector<std::vector<Index>> clusters;
  double gap_tol = default_gap_tol;

  Index size() const { return values.size(); }

  /// Projection onto the span of a cluster's eigenvectors.
  ComplexMatrix cluster_projection(std::size_t c) const {
    const Index n = size();
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    for (Index i : clusters[c]) p += vectors.col(i) * vectors.col(i).adjoint();
    return p;
  }

  /// Cluster representative: mean angle (unitary) or mean value (Hermitian).
  cplx representative(std::size_t c) const {
    const auto& idx = clusters[c];
    if (kind == SpectrumKind::hermitian) {
      double s = 0.0;
      for (Index i : idx) s += values[i].real();
      return s / static_cast<double>(idx.size());
    }
    const double base = std::arg(values[idx.front()]);
    double s = 0.0;
    for (Index i : idx) s += wrap_angle(std::arg(values[i]) - base);
    return unit(base + s / static_cast<double>(idx.size()));
  }

  /// Per-eigenvalue representative points, the grid on which kernels are sampled.
  ComplexVector points() const {
    ComplexVector p(size());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const cplx r = representative(c);
      for (Index i : clusters[c]) p[i] = r;
    }
    return p;
  }

  ComplexMatrix reconstruct() const { return vectors * values.asDiagonal() * vectors.adjoint(); }
};

namespace detail {

// Single-linkage clustering of sorted eigenvalues; `dist` measures neighbours.
template <class Dist>
std::vector<std::vector<Index>> chain_clusters(Index n, double gap_tol, bool periodic, Dist dist) {
  std::vector<std::vector<Index>> clusters;
  for (Index i = 0; i < n; ++i) {
    if (i > 0 && dist(i - 1, i) < gap_tol) {
      clusters.back().push_back(i);
    } else {
      clusters.push_back({i});
    }
  }
  if (periodic && clusters.size() > 1 && dist(n - 1, 0) < gap_tol) {
    auto& last = clusters.back();
    last.insert(last.end(), clusters.front().begin(), clusters.front().end());
    clusters.erase(clusters.begin());
  }
  return clusters;
}

inline void check_decomposition(const SpectralDecomposition& d, const ComplexMatrix& m, const char* what,
                                 double condition) {
  const Index n = m.rows();
  const double scale = std::max(m.norm(), 1e-300);
  const double recon = (m - d.reconstruct()).norm();
  const double ortho = (d.vectors.adjoint() * d.vectors - ComplexMatrix::Identity(n, n)).norm();
  if (recon > 1e-9 * scale || ortho > 1e-10 * static_cast<double>(n)) {
    std::ostringstream os;
    os << what << ": decomposition postconditions violated (reconstruction " << recon << ", orthonormality "
       << ortho << ", non-normality " << condition << ")";
    throw numerical_error(os.str());
  }
}

}  // namespace detail

/// Spectral decomposition of a unitary matrix through its complex Schur form,
/// which is diagonal for normal input and always has unitary Schur vectors.
inline SpectralDecomposition decompose_unitary(const UnitaryMatrix& u, double gap_tol = default_gap_tol) {
  if (!(gap_tol > 0.0)) throw validation_error("decompose_unitary: gap_tol must be positive");
  const Index n = u.size();
  Eigen::ComplexSchur<ComplexMatrix> schur(u.matrix());
  if (schur.info() != Eigen::Success) {
    throw numerical_error("decompose_unitary: Schur iteration did not converge (||U||_F = " +
                          std::to_string(u.matrix().norm()) + ")");
  }
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& z = schur.matrixU();
  const double off = t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> angle(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) angle[i] = fold_angle(std::arg(t(i, i)));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return angle[a] < angle[b]; });

  SpectralDecomposition d;
  d.kind = SpectrumKind::unitary;
  d.gap_tol = gap_tol;
  d.values.resize(n);
  d.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index i = order[k];
    d.values[k] = unit(angle[i]);
    d.vectors.col(k) = z.col(i);
  }
  d.clusters = detail::chain_clusters(n, gap_tol, true, [&](Index a, Index b) {
    return std::abs(wrap_angle(std::arg(d.values[b]) - std::arg(d.values[a])));
  });
  detail::check_decomposition(d, u.matrix(), "decompose_unitary", off);
  return d;
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
inline SpectralDecomposition decompose_hermitian(const HermitianMatrix& a, double gap_tol = default_gap_tol) {
  if (!(gap_tol > 0.0)) throw validation_error("decompose_hermitian: gap_tol must be positive");
  const Index n = a.size();
  // Symmetrize exactly so the solver sees a Hermitian input.
  const ComplexMatrix sym = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw numerical_error("decompose_hermitian: eigen-solver did not converge (||A||_F = " +
                          std::to_string(a.matrix().norm()) + ")");
  }
  SpectralDecomposition d;
  d.kind = SpectrumKind::hermitian;
  d.gap_tol = gap_tol;
  d.values = es.eigenvalues().cast<cplx>();
  d.vectors = es.eigenvectors();
  d.clusters = detail::chain_clusters(
      n, gap_tol, false, [&](Index i, Index j) { return std::abs(d.values[j].real() - d.values[i].real()); });
  detail::check_decomposition(d, a.matrix(), "decompose_hermitian", 0.0);
  return d;
}

/// Q diag(g(values)) Q* for an arbitrary per-eigenvalue map.
template <class Fn>
ComplexMatrix apply_spectral(const SpectralDecomposition& d, Fn&& fn) {
  ComplexVector fv(d.size());
  for (Index i = 0; i < d.size(); ++i) fv[i] = fn(d.values[i]);
  return d.vectors * fv.asDiagonal() * d.vectors.adjoint();
}

/// f(U) for the unitary whose decomposition is `d`.
inline ComplexMatrix matrix_function(const SpectralDecomposition& d, const CircleFunction& f) {
  if (d.kind != SpectrumKind::unitary) throw validation_error("matrix_function: circle function needs a unitary spectrum");
  return apply_spectral(d, [&](cplx z) { return f.eval(z); });
}

/// f(A) for the Hermitian matrix whose decomposition is `d`.
inline ComplexMatrix matrix_function(const SpectralDecomposition& d, const LineFunction& f) {
  if (d.kind != SpectrumKind::hermitian) throw validation_error("matrix_function: line function needs a real spectrum");
  return apply_spectral(d, [&](cplx x) { return f.eval(x.real()); });
}

inline ComplexMatrix matrix_function(const UnitaryMatrix& u, const CircleFunction& f) {
  return matrix_function(decompose_unitary(u), f);
}

/// e^{isA} from a decomposition of A.
inline ComplexMatrix exp_i(const SpectralDecomposition& a, double s) {
  return apply_spectral(a, [s](cplx x) { return unit(s * x.real()); });
}

/// V_s = e^{isA} U.
inline UnitaryMatrix path_point(const UnitaryMatrix& u, const SpectralDecomposition& a, double s) {
  if (a.size() != u.size()) throw validation_error("path_point: dimension mismatch");
  return UnitaryMatrix(exp_i(a, s) * u.matrix());
}

inline UnitaryMatrix path_point(const UnitaryMatrix& u, const HermitianMatrix& a, double s) {
  if (a.size() != u.size()) throw validation_error("path_point: dimension mismatch");
  return path_point(u, decompose_hermitian(a), s);
}

// ---------------------------------------------------------------------------
// Random instances. All generators are deterministic per seed.

inline ComplexMatrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return z;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of diag(R) moved into Q.
inline UnitaryMatrix random_haar_unitary(Index n, std::uint64_t seed) {
  if (n < 1) throw validation_error("random_haar_unitary: n must be >= 1");
  std::mt19937_64 rng(seed);
  const ComplexMatrix z = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    const double m = std::abs(d);
    q.col(j) *= (m > 0.0 ? d / m : cplx(1.0));
  }
  return UnitaryMatrix(std::move(q));
}

/// A = sum_{i<rank} a_i v_i v_i* with orthonormal v_i and
/// 0.2 norm_bound <= |a_i| <= norm_bound, random signs.
inline HermitianMatrix random_hermitian(Index n, Index rank, double norm_bound, std::uint64_t seed) {
  if (n < 1 || rank < 1 || rank > n) {
    throw validation_error("random_hermitian: need 1 <= rank <= n (got n=" + std::to_string(n) +
                           ", rank=" + std::to_string(rank) + ")");
  }
  if (!(norm_bound > 0.0)) throw validation_error("random_hermitian: norm_bound must be positive");
  const UnitaryMatrix basis = random_haar_unitary(n, seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.2, 1.0);
  std::bernoulli_distribution sign(0.5);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < rank; ++i) {
    const double ai = norm_bound * mag(rng) * (sign(rng) ? 1.0 : -1.0);
    a += ai * basis.matrix().col(i) * basis.matrix().col(i).adjoint();
  }
  return HermitianMatrix(0.5 * (a + a.adjoint()));
}

/// Random trigonometric polynomial of the given degree, coefficients scaled by
/// 1/(1+|k|) so that high frequencies do not dominate.
inline TrigPoly random_trig_poly(int degree, std::uint64_t seed) {
  if (degree < 0) throw validation_error("random_trig_poly: negative degree");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> c(static_cast<std::size_t>(2 * degree + 1));
  for (int k = -degree; k <= degree; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    c[static_cast<std::size_t>(k + degree)] = cplx(re, im) / (1.0 + std::abs(k));
  }
  return TrigPoly(degree, std::move(c));
}

}  // namespace krein
