#pragma once

// Double operator integrals over finite atomic spectral measures.
//
// For E1 = sum_i delta_{lambda_i} P_i and E2 = sum_j delta_{mu_j} Q_j the integral
// of a kernel Phi against T is sum_{i,j} Phi(lambda_i, mu_j) P_i T Q_j, which in
// eigenvector coordinates is a single entrywise (Schur) product.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "krein/circlefn.hpp"
#include "krein/error.hpp"
#include "krein/spectra.hpp"

namespace krein {

/// Phi(left_points[i], right_points[j]) on two spectral grids.
struct KernelMatrix {
  ComplexVector left_points;
  ComplexVector right_points;
  ComplexMatrix values;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Samples `phi(x, y)` on the given point lists.
template <class Fn>
KernelMatrix sample_kernel(const ComplexVector& left, const ComplexVector& right, Fn&& phi) {
  KernelMatrix k{left, right, ComplexMatrix(left.size(), right.size())};
  for (Index j = 0; j < right.size(); ++j)
    for (Index i = 0; i < left.size(); ++i) k.values(i, j) = phi(left[i], right[j]);
  if (!all_finite(k.values)) throw numerical_error("sample_kernel: non-finite kernel value");
  return k;
}

/// Samples `phi` on the representative points of two decompositions.
template <class Fn>
KernelMatrix sample_kernel(const SpectralDecomposition& d1, const SpectralDecomposition& d2, Fn&& phi) {
  return sample_kernel(d1.points(), d2.points(), std::forward<Fn>(phi));
}

/// Divided difference (Df)(zeta, tau) on two grids of unit-modulus points.
inline KernelMatrix divided_difference_kernel(const CircleFunction& f, const ComplexVector& left,
                                              const ComplexVector& right) {
  return sample_kernel(left, right, [&](cplx z, cplx t) { return f.divided_difference(z, t); });
}

inline KernelMatrix divided_difference_kernel(const CircleFunction& f, const ComplexVector& points) {
  return divided_difference_kernel(f, points, points);
}

/// Real-line divided difference on two grids of (real) points.
inline KernelMatrix divided_difference_kernel(const LineFunction& f, const ComplexVector& left,
                                              const ComplexVector& right) {
  return sample_kernel(left, right, [&](cplx x, cplx y) { return f.divided_difference(x.real(), y.real()); });
}

namespace detail {

inline void require_grid(const ComplexVector& pts, const SpectralDecomposition& d, const char* side) {
  if (pts.size() != d.size()) {
    throw validation_error(std::string("doi: ") + side + " grid has " + std::to_string(pts.size()) +
                           " points, decomposition has " + std::to_string(d.size()));
  }
  const double tol = 1e-9 + d.gap_tol;
  for (Index i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i] - d.values[i]) > tol) {
      throw validation_error(std::string("doi: ") + side + " grid point " + std::to_string(i) +
                             " does not match the decomposition's eigenvalue");
    }
  }
}

}  // namespace detail

/// sum_{i,j} Phi(lambda_i, mu_j) P_i T Q_j = Q1 (Phi o (Q1* T Q2)) Q2*.
inline ComplexMatrix doi_compute(const KernelMatrix& phi, const SpectralDecomposition& d1, const ComplexMatrix& t,
                                 const SpectralDecomposition& d2) {
  detail::require_grid(phi.left_points, d1, "left");
  detail::require_grid(phi.right_points, d2, "right");
  if (t.rows() != d1.size() || t.cols() != d2.size()) throw validation_error("doi_compute: T has incompatible shape");
  const ComplexMatrix inner = d1.vectors.adjoint() * t * d2.vectors;
  return d1.vectors * phi.values.cwiseProduct(inner) * d2.vectors.adjoint();
}

/// f(U) - f(V) as the double operator integral of Df against U - V.
inline ComplexMatrix dkbs_difference(const CircleFunction& f, const UnitaryMatrix& u, const UnitaryMatrix& v) {
  if (u.size() != v.size()) throw validation_error("dkbs_difference: dimension mismatch");
  const auto du = decompose_unitary(u);
  const auto dv = decompose_unitary(v);
  const auto phi = divided_difference_kernel(f, du.points(), dv.points());
  return doi_compute(phi, du, u.matrix() - v.matrix(), dv);
}

/// trace of the double operator integral when both measures are E = `d`:
/// sum over clusters of Phi(lambda, lambda) trace(T P_cluster).
inline cplx doi_trace(const KernelMatrix& phi, const SpectralDecomposition& d, const ComplexMatrix& t) {
  detail::require_grid(phi.left_points, d, "left");
  detail::require_grid(phi.right_points, d, "right");
  if (t.rows() != d.size() || t.cols() != d.size()) throw validation_error("doi_trace: T has incompatible shape");
  cplx total = 0.0;
  for (const auto& cluster : d.clusters) {
    cplx weight = 0.0;
    for (Index i : cluster) weight += d.vectors.col(i).dot(t * d.vectors.col(i));
    const Index r = cluster.front();
    total += phi.values(r, r) * weight;
  }
  return total;
}

/// Sum of singular values.
inline double trace_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

/// Largest singular value.
inline double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace krein
