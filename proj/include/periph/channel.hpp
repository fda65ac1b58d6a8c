#pragma once

// Unital completely positive maps in Kraus form.
//
// Convention (Heisenberg picture): tau(X) = sum_i K_i^H X K_i, unital iff
// sum_i K_i^H K_i = I. The predual acts on density matrices as
// tau_*(rho) = sum_i K_i rho K_i^H.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "periph/matrixcore.hpp"

namespace periph {

inline constexpr double kUnitalityTol = 1e-10;
inline constexpr double kFaithfulTol = 1e-8;

class KrausChannel {
 public:
  KrausChannel(std::vector<CMatrix> kraus, std::string label = {})
      : kraus_(std::move(kraus)), label_(std::move(label)) {
    if (kraus_.empty()) throw ShapeError("KrausChannel: empty Kraus family");
    dim_ = kraus_.front().rows();
    for (const auto& k : kraus_) {
      if (k.rows() != dim_ || k.cols() != dim_ || dim_ == 0)
        throw ShapeError("KrausChannel: Kraus matrices must all be " + std::to_string(dim_) +
                         "x" + std::to_string(dim_) + ", got " + std::to_string(k.rows()) +
                         "x" + std::to_string(k.cols()));
      if (!all_finite(k)) throw ShapeError("KrausChannel: non-finite Kraus entry");
    }
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return kraus_.size(); }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const std::string& label() const { return label_; }

 private:
  std::vector<CMatrix> kraus_;
  std::string label_;
  Eigen::Index dim_ = 0;
};

enum class Picture { Heisenberg, Predual };

struct Superoperator {
  Eigen::Index dim = 0;
  CMatrix matrix;
  Picture picture = Picture::Heisenberg;
};

struct ValidationReport {
  double unitality_defect = 0.0;
  bool pass = false;
};

inline ValidationReport validate(const KrausChannel& c) {
  CMatrix sum = CMatrix::Zero(c.dim(), c.dim());
  for (const auto& k : c.kraus()) sum += k.adjoint() * k;
  ValidationReport r;
  r.unitality_defect = op_norm(sum - identity(c.dim()));
  r.pass = r.unitality_defect <= kUnitalityTol;
  return r;
}

inline void require_shape(const KrausChannel& c, const CMatrix& x, const char* what) {
  if (x.rows() != c.dim() || x.cols() != c.dim())
    throw ShapeError(std::string(what) + ": expected " + std::to_string(c.dim()) + "x" +
                     std::to_string(c.dim()) + " matrix, got " + std::to_string(x.rows()) +
                     "x" + std::to_string(x.cols()));
}

// tau(x)
inline CMatrix apply(const KrausChannel& c, const CMatrix& x) {
  require_shape(c, x, "apply");
  CMatrix out = CMatrix::Zero(c.dim(), c.dim());
  for (const auto& k : c.kraus()) out += k.adjoint() * x * k;
  return out;
}

// tau_*(rho)
inline CMatrix apply_predual(const KrausChannel& c, const CMatrix& rho) {
  require_shape(c, rho, "apply_predual");
  CMatrix out = CMatrix::Zero(c.dim(), c.dim());
  for (const auto& k : c.kraus()) out += k * rho * k.adjoint();
  return out;
}

// Heisenberg: S = sum_i K_i^T (x) K_i^H. Predual: S_* = sum_i conj(K_i) (x) K_i.
inline Superoperator superoperator(const KrausChannel& c, Picture picture = Picture::Heisenberg) {
  const auto d2 = c.dim() * c.dim();
  Superoperator s{c.dim(), CMatrix::Zero(d2, d2), picture};
  for (const auto& k : c.kraus()) {
    if (picture == Picture::Heisenberg)
      s.matrix += kron(k.transpose(), k.adjoint());
    else
      s.matrix += kron(k.conjugate(), k);
  }
  return s;
}

// tau^n(x) by repeated superoperator application.
inline CMatrix power_apply(const KrausChannel& c, const CMatrix& x, std::size_t n) {
  require_shape(c, x, "power_apply");
  if (n == 0) return x;
  const CMatrix s = superoperator(c).matrix;
  CVector v = vec(x);
  for (std::size_t i = 0; i < n; ++i) v = s * v;
  return unvec(v);
}

inline double spectral_radius(const CMatrix& m) {
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("spectral_radius: no convergence");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Kraus family {K_i (x) L_j}.
inline KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<CMatrix> ks;
  ks.reserve(a.size() * b.size());
  for (const auto& k : a.kraus())
    for (const auto& l : b.kraus()) ks.push_back(kron(k, l));
  return KrausChannel(std::move(ks), a.label() + " (x) " + b.label());
}

// Heisenberg composition x -> a(b(x)); Kraus family {L_j K_i} for
// a = {K_i}, b = {L_j}.
inline KrausChannel compose(const KrausChannel& a, const KrausChannel& b) {
  if (a.dim() != b.dim()) throw ShapeError("compose: dimension mismatch");
  std::vector<CMatrix> ks;
  ks.reserve(a.size() * b.size());
  for (const auto& k : a.kraus())
    for (const auto& l : b.kraus()) ks.push_back(l * k);
  return KrausChannel(std::move(ks), a.label() + " o " + b.label());
}

// tau^k as an explicit Kraus family (m^k operators).
inline KrausChannel power(const KrausChannel& c, std::size_t k) {
  if (k == 0) return KrausChannel({identity(c.dim())}, "id");
  KrausChannel out = c;
  for (std::size_t i = 1; i < k; ++i) out = compose(out, c);
  return KrausChannel(out.kraus(), c.label() + "^" + std::to_string(k));
}

struct InvariantStateReport {
  std::optional<CMatrix> state;
  double min_eigenvalue = 0.0;
  bool faithful = false;
  double residual = 0.0;
  std::string method;  // "projection", "search" or "none"
};

namespace detail {

inline double trace_real(const CMatrix& m) { return m.trace().real(); }

// Maximizes the smallest eigenvalue over trace-one Hermitian elements of the
// fixed space of the predual. `fixed` holds vectorized basis columns.
inline std::optional<CMatrix> search_psd_fixed_point(const CMatrix& fixed, Eigen::Index d) {
  // Real basis of the Hermitian slice.
  std::vector<CMatrix> herm;
  for (Eigen::Index k = 0; k < fixed.cols(); ++k) {
    CMatrix b = unvec(fixed.col(k));
    herm.push_back(0.5 * (b + b.adjoint()));
    herm.push_back((b - b.adjoint()) / Complex(0.0, 2.0));
  }
  // Orthonormalize as real vectors.
  Eigen::MatrixXd real_cols(2 * d * d, static_cast<Eigen::Index>(herm.size()));
  for (std::size_t k = 0; k < herm.size(); ++k) {
    CVector v = vec(herm[k]);
    real_cols.col(static_cast<Eigen::Index>(k)) << v.real(), v.imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(real_cols, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  const auto& s = svd.singularValues();
  while (rank < s.size() && s(rank) > std::max(1e-10 * s(0), kRankFloor)) ++rank;
  std::vector<CMatrix> basis;
  for (Eigen::Index k = 0; k < rank; ++k) {
    Eigen::VectorXd u = svd.matrixU().col(k);
    CVector v(d * d);
    for (Eigen::Index i = 0; i < d * d; ++i) v(i) = Complex(u(i), u(d * d + i));
    CMatrix h = unvec(v);
    basis.push_back(0.5 * (h + h.adjoint()));
  }
  if (basis.empty()) return std::nullopt;

  Eigen::VectorXd traces(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    traces(static_cast<Eigen::Index>(k)) = trace_real(basis[k]);
  if (traces.norm() < 1e-12) return std::nullopt;

  auto build = [&](const Eigen::VectorXd& t) {
    CMatrix m = CMatrix::Zero(d, d);
    for (std::size_t k = 0; k < basis.size(); ++k) m += t(static_cast<Eigen::Index>(k)) * basis[k];
    return m;
  };
  // Start at the minimum-norm trace-one point; ascend the smallest eigenvalue
  // along trace-preserving directions with a diminishing step.
  Eigen::VectorXd t = traces / traces.squaredNorm();
  const Eigen::VectorXd tdir = traces / traces.norm();
  Eigen::VectorXd best_t = t;
  double best = -1e300;
  for (int it = 0; it < 4000; ++it) {
    CMatrix rho = build(t);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()));
    const double lmin = es.eigenvalues()(0);
    if (lmin > best) {
      best = lmin;
      best_t = t;
    }
    const CVector v = es.eigenvectors().col(0);
    Eigen::VectorXd grad(t.size());
    for (std::size_t k = 0; k < basis.size(); ++k)
      grad(static_cast<Eigen::Index>(k)) = (v.adjoint() * basis[k] * v)(0, 0).real();
    grad -= tdir * tdir.dot(grad);
    const double gn = grad.norm();
    if (gn < 1e-14) break;
    t += (0.5 / std::sqrt(1.0 + it)) * grad / gn;
  }
  if (best < -1e-10) return std::nullopt;
  return build(best_t);
}

}  // namespace detail

// Invariant state of the predual with a faithfulness verdict. Tries the
// spectral projection of S_* at 1 applied to I/d first, then a search over
// the Hermitian slice of the fixed space.
inline InvariantStateReport invariant_state(const KrausChannel& c,
                                            double faithful_tol = kFaithfulTol,
                                            double null_tol = 1e-8) {
  const auto d = c.dim();
  const CMatrix s = superoperator(c, Picture::Predual).matrix;
  InvariantStateReport report;
  report.method = "none";

  auto finish = [&](CMatrix rho, const std::string& method) {
    rho = 0.5 * (rho + rho.adjoint());
    rho /= rho.trace().real();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = es.eigenvalues()(0);
    report.residual = op_norm(apply_predual(c, rho) - rho);
    report.faithful = report.min_eigenvalue > faithful_tol;
    report.state = std::move(rho);
    report.method = method;
  };

  const CMatrix proj = biorthogonal_projector(s, Complex(1.0, 0.0), null_tol);
  if (proj.size() != 0) {
    CMatrix candidate = unvec(proj * vec(identity(d) / static_cast<double>(d)));
    candidate = 0.5 * (candidate + candidate.adjoint());
    const double tr = candidate.trace().real();
    if (tr > 1e-10 && min_hermitian_eigenvalue(candidate / tr) >= -1e-10) {
      finish(candidate, "projection");
      return report;
    }
  }
  const CMatrix fixed = null_space(s - identity(d * d), null_tol);
  if (auto rho = detail::search_psd_fixed_point(fixed, d)) finish(*rho, "search");
  return report;
}

}  // namespace periph
