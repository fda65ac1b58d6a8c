#pragma once

// Peripheral point spectrum of a channel, its eigenspaces and spectral
// projectors, semisimplicity diagnostics, and the almost-period scan.

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "periph/channel.hpp"

namespace periph {

struct SpectralOptions {
  double tol_peripheral = 1e-7;  // on ||lambda| - 1|
  double cluster_radius = 1e-7;  // also the eigenvalue-equality knob
  double tol_null = 1e-8;        // relative rank cut for eigenspaces
};

struct PeripheralEigenvalue {
  Complex lambda;
  std::size_t geometric_multiplicity = 0;
  std::size_t algebraic_multiplicity = 0;
};

struct PeripheralSpectrum {
  std::vector<PeripheralEigenvalue> eigenvalues;  // sorted by argument in [0, 2pi)
  double tol_peripheral = 0.0;

  std::size_t size() const { return eigenvalues.size(); }

  // Indices of clusters within `radius` of z.
  std::vector<std::size_t> matches(Complex z, double radius) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
      if (std::abs(eigenvalues[i].lambda - z) <= radius) out.push_back(i);
    return out;
  }
};

struct Eigenspace {
  Complex lambda;
  std::vector<CMatrix> basis;  // Hilbert-Schmidt orthonormal
  double residual = 0.0;       // max ||tau(b) - lambda b||_HS

  std::size_t dim() const { return basis.size(); }

  // Basis as vectorized columns.
  CMatrix columns() const {
    if (basis.empty()) return CMatrix();
    const auto d = basis.front().rows();
    CMatrix out(d * d, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vec(basis[k]);
    return out;
  }
};

struct SpectralProjector {
  Complex lambda;
  CMatrix matrix;  // d^2 x d^2, zero when lambda is not an eigenvalue
  double idempotency_residual = 0.0;
  bool is_zero = false;

  CMatrix apply(const CMatrix& x) const { return unvec(matrix * vec(x)); }
};

inline PeripheralSpectrum peripheral_spectrum(const KrausChannel& c,
                                              const SpectralOptions& opts = {}) {
  if (!(opts.tol_peripheral > 0.0 && opts.tol_peripheral < 0.5))
    throw PreconditionError("peripheral_spectrum: tol_peripheral must lie in (0, 0.5)");
  const CMatrix s = superoperator(c).matrix;
  Eigen::ComplexEigenSolver<CMatrix> es(s, false);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("peripheral_spectrum: eigensolver did not converge");
  const CVector& all = es.eigenvalues();

  std::vector<Complex> on_circle;
  for (Eigen::Index i = 0; i < all.size(); ++i)
    if (std::abs(std::abs(all(i)) - 1.0) <= opts.tol_peripheral) on_circle.push_back(all(i));
  CVector values(static_cast<Eigen::Index>(on_circle.size()));
  for (std::size_t i = 0; i < on_circle.size(); ++i) values(static_cast<Eigen::Index>(i)) = on_circle[i];

  PeripheralSpectrum out;
  out.tol_peripheral = opts.tol_peripheral;
  const auto n = s.rows();
  for (const auto& group : detail::cluster_indices(values, opts.cluster_radius)) {
    Complex mean{0.0, 0.0};
    for (auto i : group) mean += values(i);
    mean /= static_cast<double>(group.size());
    PeripheralEigenvalue ev;
    ev.lambda = mean;
    ev.algebraic_multiplicity = group.size();
    ev.geometric_multiplicity =
        static_cast<std::size_t>(null_space(s - mean * identity(n), opts.tol_null).cols());
    out.eigenvalues.push_back(ev);
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const auto& a, const auto& b) { return unit_argument(a.lambda) < unit_argument(b.lambda); });
  return out;
}

inline Eigenspace eigenspace_of(const CMatrix& s, const KrausChannel& c, Complex lambda,
                                double tol) {
  const auto n = s.rows();
  const CMatrix basis = null_space(s - lambda * identity(n), tol);
  Eigenspace e;
  e.lambda = lambda;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    CMatrix b = unvec(basis.col(k));
    e.residual = std::max(e.residual, hs_norm(periph::apply(c, b) - lambda * b));
    e.basis.push_back(std::move(b));
  }
  return e;
}

// E_lambda(tau): empty when lambda is not an eigenvalue at `tol`.
inline Eigenspace eigenspace(const KrausChannel& c, Complex lambda, double tol = 1e-8) {
  return eigenspace_of(superoperator(c).matrix, c, lambda, tol);
}

inline SpectralProjector projector_of(const CMatrix& s, Complex lambda, double tol) {
  SpectralProjector p;
  p.lambda = lambda;
  p.matrix = biorthogonal_projector(s, lambda, tol);
  const auto n = s.rows();
  if (p.matrix.size() == 0) {
    p.matrix = CMatrix::Zero(n, n);
    p.is_zero = true;
    return p;
  }
  p.idempotency_residual = op_norm(p.matrix * p.matrix - p.matrix);
  return p;
}

// Throws DefectiveEigenvalue when the cluster cannot be biorthogonally paired.
inline SpectralProjector spectral_projection(const KrausChannel& c, Complex lambda,
                                             const SpectralOptions& opts = {}) {
  return projector_of(superoperator(c).matrix, lambda, opts.tol_null);
}

struct SemisimplicityEntry {
  Complex lambda;
  std::size_t geometric_multiplicity = 0;
  std::size_t algebraic_multiplicity = 0;
  bool semisimple = false;
};

struct SemisimplicityReport {
  std::vector<SemisimplicityEntry> entries;
  bool all_semisimple = true;
};

inline SemisimplicityReport semisimplicity_report(const KrausChannel& c,
                                                  const SpectralOptions& opts = {}) {
  SemisimplicityReport r;
  for (const auto& ev : peripheral_spectrum(c, opts).eigenvalues) {
    SemisimplicityEntry e{ev.lambda, ev.geometric_multiplicity, ev.algebraic_multiplicity,
                          ev.geometric_multiplicity == ev.algebraic_multiplicity};
    r.all_semisimple = r.all_semisimple && e.semisimple;
    r.entries.push_back(e);
  }
  return r;
}

inline constexpr std::size_t kDefaultAlmostPeriodMax = 1'000'000;

// Smallest n in [1, n_max] with max_j |lambda_j^n - 1| < epsilon.
inline std::size_t almost_period(std::span<const Complex> lambdas, double epsilon,
                                 std::size_t n_max = kDefaultAlmostPeriodMax) {
  if (!(epsilon > 0.0)) throw PreconditionError("almost_period: epsilon must be positive");
  std::vector<double> angles;
  for (const auto& l : lambdas) {
    if (std::abs(std::abs(l) - 1.0) > 1e-8)
      throw PreconditionError("almost_period: |lambda| differs from 1 by " +
                              std::to_string(std::abs(std::abs(l) - 1.0)));
    angles.push_back(std::arg(l));
  }
  std::size_t best_n = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= n_max; ++n) {
    double worst = 0.0;
    for (double a : angles) {
      const double phase = std::fmod(a * static_cast<double>(n), 2.0 * kPi);
      worst = std::max(worst, std::abs(std::polar(1.0, phase) - 1.0));
      if (worst >= best && worst >= epsilon) break;
    }
    if (worst < epsilon) return n;
    if (worst < best) {
      best = worst;
      best_n = n;
    }
  }
  throw AlmostPeriodExhausted(n_max, best_n, best);
}

}  // namespace periph
