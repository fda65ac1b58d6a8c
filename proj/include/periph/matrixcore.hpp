#pragma once

// Dense complex matrix substrate shared by every other module.
//
// Vectorization is column-stacking throughout: entry (i, j) of a d x d
// matrix lands at index j * d + i, so vec(A X B) = (B^T (x) A) vec(X).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "periph/errors.hpp"

namespace periph {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Absolute floor applied to every relative rank cut.
inline constexpr double kRankFloor = 1e-12;

inline bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ShapeError(std::string(what) + ": expected a non-empty square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline CVector vec(const CMatrix& m) {
  require_square(m, "vec");
  const auto d = m.rows();
  CVector v(d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) v(j * d + i) = m(i, j);
  return v;
}

inline CMatrix unvec(const CVector& v) {
  const auto n = v.size();
  auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (n == 0 || d * d != n)
    throw ShapeError("unvec: length " + std::to_string(n) + " is not a perfect square");
  CMatrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = v(j * d + i);
  return m;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

inline RVector singular_values(const CMatrix& m) {
  if (m.size() == 0) return RVector();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues();
}

// Largest singular value.
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

inline double hs_norm(const CMatrix& m) { return m.norm(); }

inline Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace();
}

// Orthonormal basis (as columns) of the right null space: right singular
// vectors with singular value <= max(tol * sigma_max, 1e-12).
inline CMatrix null_space(const CMatrix& m, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("null_space: tol must be positive");
  const auto n = m.cols();
  if (m.rows() == 0) return identity(n);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cut = std::max(tol * smax, kRankFloor);
  Eigen::Index first = 0;
  while (first < s.size() && s(first) > cut) ++first;
  return svd.matrixV().rightCols(n - first);
}

// Orthonormal basis (as columns) of the column space, with the same
// relative rank rule as null_space.
inline CMatrix range_basis(const CMatrix& m, double tol = 1e-10) {
  if (m.cols() == 0 || m.rows() == 0) return CMatrix(m.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double cut = std::max(tol * s(0), kRankFloor);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

// Orthogonal projector onto the span of orthonormal columns.
inline CMatrix projector(const CMatrix& orthonormal_columns, Eigen::Index ambient) {
  if (orthonormal_columns.cols() == 0) return CMatrix::Zero(ambient, ambient);
  return orthonormal_columns * orthonormal_columns.adjoint();
}

// Operator-norm distance between the orthogonal projectors onto two spans.
inline double subspace_gap(const CMatrix& basis_a, const CMatrix& basis_b, double tol = 1e-10) {
  const auto n = std::max(basis_a.rows(), basis_b.rows());
  CMatrix qa = projector(range_basis(basis_a, tol), n);
  CMatrix qb = projector(range_basis(basis_b, tol), n);
  return op_norm(qa - qb);
}

// Distance from v to the span of orthonormal columns of q.
inline double distance_to_span(const CMatrix& q, const CVector& v) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.adjoint() * v)).norm();
}

struct EigenDecomposition {
  CVector eigenvalues;
  CMatrix right_vectors;  // unit-norm columns
  CMatrix left_vectors;   // biorthogonal to right_vectors per cluster where possible
  double reconstruction_residual = 0.0;
};

namespace detail {

// Groups indices whose eigenvalues lie within `radius` (single linkage).
inline std::vector<std::vector<Eigen::Index>> cluster_indices(const CVector& values,
                                                              double radius) {
  const auto n = values.size();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(values(i) - values(j)) <= radius) parent[find(i)] = find(j);
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> slot(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

}  // namespace detail

// Full eigendecomposition of a square matrix. Left vectors come from the
// adjoint's eigenproblem, matched to the right eigenvalues and
// biorthogonalized within each cluster (radius `cluster_radius`) whenever the
// cluster Gram matrix is invertible.
inline EigenDecomposition eig(const CMatrix& m, double cluster_radius = 1e-7) {
  require_square(m, "eig");
  const auto n = m.rows();
  Eigen::ComplexEigenSolver<CMatrix> right(m, true);
  if (right.info() != Eigen::Success)
    throw ConvergenceError("eig: complex Schur iteration did not converge (n=" +
                           std::to_string(n) + ")");
  Eigen::ComplexEigenSolver<CMatrix> left(m.adjoint(), true);
  if (left.info() != Eigen::Success)
    throw ConvergenceError("eig: adjoint Schur iteration did not converge (n=" +
                           std::to_string(n) + ")");

  EigenDecomposition out;
  out.eigenvalues = right.eigenvalues();
  out.right_vectors = right.eigenvectors();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nrm = out.right_vectors.col(i).norm();
    if (nrm > 0) out.right_vectors.col(i) /= nrm;
  }

  // Greedy matching of conj(left eigenvalue) to right eigenvalues.
  out.left_vectors = CMatrix::Zero(n, n);
  std::vector<bool> used(n, false);
  const CVector lvals = left.eigenvalues().conjugate();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    double best_dist = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dist = std::abs(lvals(j) - out.eigenvalues(i));
      if (best < 0 || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    used[best] = true;
    out.left_vectors.col(i) = left.eigenvectors().col(best);
  }

  for (const auto& group : detail::cluster_indices(out.eigenvalues, cluster_radius)) {
    const auto k = static_cast<Eigen::Index>(group.size());
    CMatrix r(n, k), l(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      r.col(c) = out.right_vectors.col(group[c]);
      l.col(c) = out.left_vectors.col(group[c]);
    }
    CMatrix gram = l.adjoint() * r;
    Eigen::JacobiSVD<CMatrix> svd(gram);
    const RVector& s = svd.singularValues();
    if (s(k - 1) <= 1e-10 * std::max(1.0, s(0))) continue;
    CMatrix fixed = l * gram.inverse().adjoint();
    for (Eigen::Index c = 0; c < k; ++c) out.left_vectors.col(group[c]) = fixed.col(c);
  }

  double residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    residual = std::max(residual, (m * out.right_vectors.col(i) -
                                   out.eigenvalues(i) * out.right_vectors.col(i))
                                      .norm());
  out.reconstruction_residual = residual;
  return out;
}

// Oblique projector R (L^H R)^{-1} L^H onto the eigenspace of `s` at
// `lambda` along the complementary invariant subspace. Right and left
// eigenvectors come from the null spaces of s - lambda and its adjoint.
// Returns an empty matrix when lambda is not an eigenvalue at `tol`; throws
// DefectiveEigenvalue when the two null spaces cannot be paired.
inline CMatrix biorthogonal_projector(const CMatrix& s, Complex lambda, double tol) {
  require_square(s, "biorthogonal_projector");
  const auto n = s.rows();
  const CMatrix shifted = s - lambda * identity(n);
  const CMatrix r = null_space(shifted, tol);
  const CMatrix l = null_space(shifted.adjoint(), tol);
  if (r.cols() == 0 && l.cols() == 0) return CMatrix();
  if (r.cols() != l.cols())
    throw DefectiveEigenvalue("defective peripheral eigenvalue: right/left null dimensions " +
                              std::to_string(r.cols()) + " vs " + std::to_string(l.cols()));
  const CMatrix gram = l.adjoint() * r;
  Eigen::JacobiSVD<CMatrix> svd(gram);
  const RVector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-8)
    throw DefectiveEigenvalue("defective peripheral eigenvalue: singular cluster Gram (sigma_min=" +
                              std::to_string(sv(sv.size() - 1)) + ")");
  return r * gram.inverse() * l.adjoint();
}

// Smallest eigenvalue of the Hermitian part of m.
inline double min_hermitian_eigenvalue(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double unit_argument(Complex z) {
  double a = std::arg(z);
  if (a < 0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace periph
