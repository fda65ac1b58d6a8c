#pragma once

// The peripheral boundary product and its verifiers.
//
// For x in E_lambda and y in E_mu the product x o y is the component of x y
// in E_{lambda mu}, i.e. P_{lambda mu}(x y) where P is the spectral projector
// of the Heisenberg superoperator; it vanishes when lambda mu is not a
// peripheral eigenvalue. The Cesaro average and the raw limit
// (lambda mu)^{-n} tau^n(x y) are kept as independent oracles.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "periph/random.hpp"
#include "periph/report.hpp"
#include "periph/spectral.hpp"

namespace periph {

struct BoundaryOptions {
  SpectralOptions spectral;
  double input_residual_tol = 1e-6;  // eigenspace membership of product inputs
  double span_tol = 1e-6;            // reconstruction defect for decompositions
};

class PeripheralBoundary {
 public:
  explicit PeripheralBoundary(KrausChannel channel, BoundaryOptions opts = {})
      : channel_(std::move(channel)), opts_(opts) {
    superop_ = superoperator(channel_).matrix;
    spectrum_ = peripheral_spectrum(channel_, opts_.spectral);
    for (const auto& ev : spectrum_.eigenvalues) {
      spaces_.push_back(eigenspace_of(superop_, channel_, ev.lambda, opts_.spectral.tol_null));
      projectors_.push_back(projector_of(superop_, ev.lambda, opts_.spectral.tol_null));
    }
    for (std::size_t i = 0; i < spaces_.size(); ++i)
      for (const auto& b : spaces_[i].basis) {
        combined_.push_back(b);
        combined_cluster_.push_back(i);
      }
    if (!combined_.empty()) {
      CMatrix cols(dim2(), static_cast<Eigen::Index>(combined_.size()));
      for (std::size_t k = 0; k < combined_.size(); ++k)
        cols.col(static_cast<Eigen::Index>(k)) = vec(combined_[k]);
      CMatrix gram = cols.adjoint() * cols;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
      gram_min_eigenvalue_ = es.eigenvalues()(0);
    }
  }

  const KrausChannel& channel() const { return channel_; }
  const BoundaryOptions& options() const { return opts_; }
  const CMatrix& superop() const { return superop_; }
  const PeripheralSpectrum& spectrum() const { return spectrum_; }
  const std::vector<Eigenspace>& spaces() const { return spaces_; }
  const std::vector<SpectralProjector>& projectors() const { return projectors_; }
  const std::vector<CMatrix>& combined_basis() const { return combined_; }
  const std::vector<std::size_t>& combined_cluster() const { return combined_cluster_; }
  double gram_min_eigenvalue() const { return gram_min_eigenvalue_; }

  Eigen::Index d() const { return channel_.dim(); }
  Eigen::Index dim2() const { return channel_.dim() * channel_.dim(); }
  std::size_t clusters() const { return spaces_.size(); }
  std::size_t dim() const { return combined_.size(); }
  Complex lambda(std::size_t cluster) const { return spectrum_.eigenvalues[cluster].lambda; }

  // Cluster whose eigenvalue equals z within the clustering radius; throws
  // ToleranceConflict when z is ambiguous between two clusters.
  std::optional<std::size_t> cluster_of(Complex z) const {
    const auto hits = spectrum_.matches(z, opts_.spectral.cluster_radius);
    if (hits.size() > 1)
      throw ToleranceConflict("eigenvalue (" + std::to_string(z.real()) + ", " +
                              std::to_string(z.imag()) + ") is within the clustering radius of " +
                              std::to_string(hits.size()) + " peripheral clusters");
    if (hits.empty()) return std::nullopt;
    return hits.front();
  }

  std::optional<std::size_t> fixed_cluster() const { return cluster_of(Complex(1.0, 0.0)); }

 private:
  KrausChannel channel_;
  BoundaryOptions opts_;
  CMatrix superop_;
  PeripheralSpectrum spectrum_;
  std::vector<Eigenspace> spaces_;
  std::vector<SpectralProjector> projectors_;
  std::vector<CMatrix> combined_;
  std::vector<std::size_t> combined_cluster_;
  double gram_min_eigenvalue_ = 0.0;
};

// Element of the peripheral span stored with its eigen-components; the
// components (indexed by cluster) are authoritative for products.
struct BoundaryElement {
  CMatrix matrix;
  std::vector<CMatrix> components;
};

inline double relative_residual(const KrausChannel& c, const CMatrix& x, Complex lambda) {
  const double scale = std::max(hs_norm(x), 1.0);
  return hs_norm(periph::apply(c, x) - lambda * x) / scale;
}

namespace detail {

inline CMatrix product_by_cluster(const PeripheralBoundary& b, const CMatrix& x, Complex lambda,
                                  const CMatrix& y, Complex mu) {
  const auto target = b.cluster_of(lambda * mu);
  if (!target) return CMatrix::Zero(b.d(), b.d());
  return b.projectors()[*target].apply(x * y);
}

}  // namespace detail

// x o y for x in E_lambda, y in E_mu.
inline CMatrix peripheral_product(const PeripheralBoundary& b, const CMatrix& x, Complex lambda,
                                  const CMatrix& y, Complex mu) {
  require_shape(b.channel(), x, "peripheral_product");
  require_shape(b.channel(), y, "peripheral_product");
  const double tol = b.options().input_residual_tol;
  if (const double rx = relative_residual(b.channel(), x, lambda); rx > tol)
    throw PreconditionError("peripheral_product: x is not in E_lambda (residual " +
                            std::to_string(rx) + ")");
  if (const double ry = relative_residual(b.channel(), y, mu); ry > tol)
    throw PreconditionError("peripheral_product: y is not in E_mu (residual " +
                            std::to_string(ry) + ")");
  return detail::product_by_cluster(b, x, lambda, y, mu);
}

// (1/N) sum_{n<N} (S / nu)^n, accumulated by binary doubling.
inline CMatrix cesaro_operator(const CMatrix& s, Complex nu, std::size_t n_terms) {
  if (n_terms == 0) throw PreconditionError("cesaro: n_terms must be >= 1");
  const auto n = s.rows();
  const CMatrix a = s / nu;
  CMatrix sum = CMatrix::Zero(n, n);
  CMatrix pw = identity(n);
  int top = 63;
  while (top >= 0 && ((n_terms >> top) & 1u) == 0) --top;
  for (int bit = top; bit >= 0; --bit) {
    sum += pw * sum;
    pw = pw * pw;
    if ((n_terms >> bit) & 1u) {
      sum += pw;
      pw = pw * a;
    }
  }
  return sum / static_cast<double>(n_terms);
}

// (1/N) sum_{n<N} (lambda mu)^{-n} tau^n(x y)
inline CMatrix cesaro_product(const KrausChannel& c, const CMatrix& x, Complex lambda,
                              const CMatrix& y, Complex mu, std::size_t n_terms) {
  require_shape(c, x, "cesaro_product");
  require_shape(c, y, "cesaro_product");
  const CMatrix avg = cesaro_operator(superoperator(c).matrix, lambda * mu, n_terms);
  return unvec(avg * vec(x * y));
}

struct LimitTrace {
  std::vector<CMatrix> terms;       // a_n = (lambda mu)^{-n} tau^n(x y), n = 0..n_max
  std::vector<double> distances;    // ||a_n - x o y||
  double decay_rate = 0.0;          // geometric fit over nonzero distances
  double subperipheral_radius = 0.0;
};

inline LimitTrace limit_diagnostic(const PeripheralBoundary& b, const CMatrix& x, Complex lambda,
                                   const CMatrix& y, Complex mu, std::size_t n_max) {
  const CMatrix target = peripheral_product(b, x, lambda, y, mu);
  LimitTrace t;
  const Complex nu = lambda * mu;
  CVector v = vec(x * y);
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (n > 0) v = b.superop() * v / nu;
    CMatrix a = unvec(v);
    t.distances.push_back(op_norm(a - target));
    t.terms.push_back(std::move(a));
  }
  std::optional<std::size_t> first, last;
  for (std::size_t n = 1; n < t.distances.size(); ++n)
    if (t.distances[n] > 1e-13) {
      if (!first) first = n;
      last = n;
    }
  if (first && last && *last > *first)
    t.decay_rate = std::pow(t.distances[*last] / t.distances[*first],
                            1.0 / static_cast<double>(*last - *first));

  Eigen::ComplexEigenSolver<CMatrix> es(b.superop(), false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double m = std::abs(es.eigenvalues()(i));
    if (std::abs(m - 1.0) > b.options().spectral.tol_peripheral)
      t.subperipheral_radius = std::max(t.subperipheral_radius, m);
  }
  return t;
}

// Components x_lambda = P_lambda(x); throws NotInPeripheralSpan when they do
// not reconstruct x.
inline BoundaryElement decompose_peripheral(const PeripheralBoundary& b, const CMatrix& x) {
  require_shape(b.channel(), x, "decompose_peripheral");
  BoundaryElement e{x, {}};
  CMatrix total = CMatrix::Zero(b.d(), b.d());
  for (const auto& p : b.projectors()) {
    e.components.push_back(p.apply(x));
    total += e.components.back();
  }
  const double defect = hs_norm(total - x);
  if (defect > b.options().span_tol * std::max(hs_norm(x), 1e-300) && defect > 1e-14)
    throw NotInPeripheralSpan("not in peripheral span (reconstruction defect " +
                              std::to_string(defect) + ")");
  return e;
}

inline BoundaryElement element_from_components(std::vector<CMatrix> components, Eigen::Index d) {
  BoundaryElement e{CMatrix::Zero(d, d), std::move(components)};
  for (const auto& c : e.components) e.matrix += c;
  return e;
}

inline BoundaryElement product_general(const PeripheralBoundary& b, const BoundaryElement& x,
                                       const BoundaryElement& y) {
  std::vector<CMatrix> out(b.clusters(), CMatrix::Zero(b.d(), b.d()));
  for (std::size_t i = 0; i < b.clusters(); ++i) {
    if (x.components[i].isZero(0.0)) continue;
    for (std::size_t j = 0; j < b.clusters(); ++j) {
      if (y.components[j].isZero(0.0)) continue;
      const auto target = b.cluster_of(b.lambda(i) * b.lambda(j));
      if (!target) continue;
      out[*target] += b.projectors()[*target].apply(x.components[i] * y.components[j]);
    }
  }
  return element_from_components(std::move(out), b.d());
}

inline BoundaryElement adjoint(const PeripheralBoundary& b, const BoundaryElement& x) {
  std::vector<CMatrix> out(b.clusters(), CMatrix::Zero(b.d(), b.d()));
  for (std::size_t i = 0; i < b.clusters(); ++i) {
    const auto conj_cluster = b.cluster_of(std::conj(b.lambda(i)));
    if (!conj_cluster)
      throw PreconditionError("adjoint: peripheral spectrum is not closed under conjugation");
    out[*conj_cluster] += x.components[i].adjoint();
  }
  return element_from_components(std::move(out), b.d());
}

// tau acting on an element through its components (x_lambda -> lambda x_lambda).
inline BoundaryElement evolve(const PeripheralBoundary& b, const BoundaryElement& x) {
  std::vector<CMatrix> out;
  for (std::size_t i = 0; i < b.clusters(); ++i) out.push_back(b.lambda(i) * x.components[i]);
  return element_from_components(std::move(out), b.d());
}

inline BoundaryElement unit_element(const PeripheralBoundary& b) {
  return decompose_peripheral(b, identity(b.d()));
}

// Complex Gaussian coefficients over the eigenspace bases.
inline BoundaryElement random_element(const PeripheralBoundary& b, GaussianSource& rng) {
  std::vector<CMatrix> comps(b.clusters(), CMatrix::Zero(b.d(), b.d()));
  for (std::size_t i = 0; i < b.clusters(); ++i)
    for (const auto& basis : b.spaces()[i].basis) comps[i] += rng.complex() * basis;
  return element_from_components(std::move(comps), b.d());
}

inline CMatrix random_in_space(const Eigenspace& e, Eigen::Index d, GaussianSource& rng) {
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& basis : e.basis) out += rng.complex() * basis;
  return out;
}

// x_j = (1/k) sum_{l<k} omega^{-l j} tau^l(x), omega = exp(2 pi i / k).
inline std::vector<CMatrix> fourier_components(const KrausChannel& c, const CMatrix& x,
                                               std::size_t k) {
  require_shape(c, x, "fourier_components");
  if (k == 0) throw PreconditionError("fourier_components: k must be >= 1");
  std::vector<CMatrix> orbit{x};
  for (std::size_t l = 1; l <= k; ++l) orbit.push_back(periph::apply(c, orbit.back()));
  const double defect = op_norm(orbit[k] - x);
  if (defect > 1e-8 * std::max(op_norm(x), 1e-300) && defect > 1e-14)
    throw PreconditionError("fourier_components: tau^k(x) != x (defect " + std::to_string(defect) +
                            ")");
  std::vector<CMatrix> out;
  for (std::size_t j = 0; j < k; ++j) {
    CMatrix xj = CMatrix::Zero(c.dim(), c.dim());
    for (std::size_t l = 0; l < k; ++l) {
      const double angle = -2.0 * kPi * static_cast<double>((l * j) % k) / static_cast<double>(k);
      xj += std::polar(1.0, angle) * orbit[l];
    }
    out.push_back(xj / static_cast<double>(k));
  }
  return out;
}

// Recovery y_i = [prod_{j != i} (tau - lambda_j)](y) / prod_{j != i} (lambda_i - lambda_j)
// for y in ker p(tau), p(t) = prod_j (t - lambda_j).
inline std::vector<CMatrix> poly_kernel_decompose(const KrausChannel& c, const CMatrix& y,
                                                  std::span<const Complex> roots) {
  require_shape(c, y, "poly_kernel_decompose");
  if (roots.empty()) throw PreconditionError("poly_kernel_decompose: no roots");
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) <= 1e-8)
        throw PreconditionError("poly_kernel_decompose: roots " + std::to_string(i) + " and " +
                                std::to_string(j) + " are not distinct");
  auto shifted = [&](const CMatrix& z, Complex root) { return CMatrix(periph::apply(c, z) - root * z); };
  CMatrix py = y;
  for (const auto& r : roots) py = shifted(py, r);
  const double ny = hs_norm(y);
  if (hs_norm(py) > 1e-8 * ny && hs_norm(py) > 1e-14)
    throw PreconditionError("poly_kernel_decompose: y is not in ker p(tau) (||p(tau) y|| = " +
                            std::to_string(hs_norm(py)) + ")");
  std::vector<CMatrix> out;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    CMatrix z = y;
    Complex denom{1.0, 0.0};
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i) continue;
      z = shifted(z, roots[j]);
      denom *= roots[i] - roots[j];
    }
    out.push_back(z / denom);
  }
  return out;
}

struct ProductTable {
  std::vector<std::string> labels;
  std::vector<std::size_t> cluster;    // cluster of each basis element
  std::vector<CVector> constants;      // constants[a * n + b](e) = c_{ab}^e
  CVector unit;                        // coordinates of the identity
  double grading_defect = 0.0;         // max |c_ab^e| off the lambda_a lambda_b grade

  std::size_t size() const { return labels.size(); }
  const CVector& at(std::size_t a, std::size_t b) const { return constants[a * size() + b]; }
};

// Coordinates of z in the combined (per-cluster orthonormal) basis.
inline CVector coordinates(const PeripheralBoundary& b, const CMatrix& z) {
  CVector out(static_cast<Eigen::Index>(b.dim()));
  std::size_t k = 0;
  for (std::size_t i = 0; i < b.clusters(); ++i) {
    const CMatrix part = b.projectors()[i].apply(z);
    for (const auto& basis : b.spaces()[i].basis) out(static_cast<Eigen::Index>(k++)) = hs_inner(basis, part);
  }
  return out;
}

inline ProductTable boundary_table(const PeripheralBoundary& b) {
  ProductTable t;
  const auto n = b.dim();
  const auto& basis = b.combined_basis();
  const auto& cl = b.combined_cluster();
  std::vector<std::size_t> index_in_cluster(n);
  {
    std::vector<std::size_t> count(b.clusters(), 0);
    for (std::size_t a = 0; a < n; ++a) index_in_cluster[a] = count[cl[a]]++;
  }
  for (std::size_t a = 0; a < n; ++a) {
    const Complex l = b.lambda(cl[a]);
    t.labels.push_back("E[" + std::to_string(l.real()) + (l.imag() < 0 ? "" : "+") +
                       std::to_string(l.imag()) + "i]#" + std::to_string(index_in_cluster[a]));
  }
  t.cluster = cl;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t bb = 0; bb < n; ++bb) {
      const Complex nu = b.lambda(cl[a]) * b.lambda(cl[bb]);
      const CMatrix prod = detail::product_by_cluster(b, basis[a], b.lambda(cl[a]), basis[bb],
                                                      b.lambda(cl[bb]));
      CVector coords = coordinates(b, prod);
      for (std::size_t e = 0; e < n; ++e)
        if (std::abs(b.lambda(cl[e]) - nu) > b.options().spectral.cluster_radius)
          t.grading_defect = std::max(t.grading_defect, std::abs(coords(static_cast<Eigen::Index>(e))));
      t.constants.push_back(std::move(coords));
    }
  t.unit = coordinates(b, identity(b.d()));
  return t;
}

// ---------------------------------------------------------------------------
// Verifiers

inline double safe_ratio(double num, double den) { return den > 1e-300 ? num / den : num; }

inline VerificationReport cstar_verify(const PeripheralBoundary& b, std::size_t trials,
                                       std::uint64_t seed) {
  VerificationReport r{"cstar", seed, {}};
  GaussianSource rng(seed);
  const BoundaryElement one = unit_element(b);
  MaxTracker assoc, invol, unit, cstar;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = random_element(b, rng);
    const auto y = random_element(b, rng);
    const auto z = random_element(b, rng);
    const double nx = op_norm(x.matrix), ny = op_norm(y.matrix), nz = op_norm(z.matrix);

    const auto xy = product_general(b, x, y);
    const auto lhs = product_general(b, xy, z);
    const auto rhs = product_general(b, x, product_general(b, y, z));
    assoc(safe_ratio(op_norm(lhs.matrix - rhs.matrix), nx * ny * nz));

    const auto yx_adj = product_general(b, adjoint(b, y), adjoint(b, x));
    invol(safe_ratio(op_norm(xy.matrix.adjoint() - yx_adj.matrix), nx * ny));

    unit(safe_ratio(std::max(op_norm(product_general(b, one, x).matrix - x.matrix),
                             op_norm(product_general(b, x, one).matrix - x.matrix)),
                    nx));

    const auto xx = product_general(b, adjoint(b, x), x);
    cstar(safe_ratio(std::abs(op_norm(xx.matrix) - nx * nx), nx * nx));
  }
  r.add(Check::at_most("associativity", "(x∘y)∘z = x∘(y∘z)", assoc.value, 1e-7));
  r.add(Check::at_most("involution", "(x∘y)* = y*∘x*", invol.value, 1e-8));
  r.add(Check::at_most("unit", "1∘x = x∘1 = x", unit.value, 1e-8));
  r.add(Check::at_most("cstar_identity", "‖x*∘x‖ = ‖x‖²", cstar.value, 1e-6));
  return r;
}

inline VerificationReport automorphism_check(const PeripheralBoundary& b, std::size_t trials,
                                             std::uint64_t seed) {
  VerificationReport r{"automorphism", seed, {}};
  GaussianSource rng(seed);
  MaxTracker hom, action, iso;
  const auto& c = b.channel();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = random_element(b, rng);
    const auto y = random_element(b, rng);
    const double nx = op_norm(x.matrix), ny = op_norm(y.matrix);
    const auto tx = evolve(b, x), ty = evolve(b, y);
    action(safe_ratio(op_norm(periph::apply(c, x.matrix) - tx.matrix), nx));
    const auto lhs = product_general(b, tx, ty);
    const CMatrix rhs = periph::apply(c, product_general(b, x, y).matrix);
    hom(safe_ratio(op_norm(lhs.matrix - rhs), nx * ny));
    iso(safe_ratio(std::abs(op_norm(periph::apply(c, x.matrix)) - nx), nx));
  }
  r.add(Check::at_most("homomorphism", "τ(x)∘τ(y) = τ(x∘y)", hom.value, 1e-8));
  r.add(Check::at_most("eigen_action", "τ(x_λ) = λ x_λ", action.value, 1e-8));
  r.add(Check::at_most("isometry", "‖τ(x)‖ = ‖x‖", iso.value, 1e-8));
  return r;
}

// Vectorized columns of a list of matrices.
inline CMatrix stack_columns(const std::vector<CMatrix>& ms, Eigen::Index d) {
  CMatrix out(d * d, static_cast<Eigen::Index>(ms.size()));
  for (std::size_t k = 0; k < ms.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vec(ms[k]);
  return out;
}

inline CMatrix peripheral_span_columns(const KrausChannel& c, const SpectralOptions& opts) {
  const CMatrix s = superoperator(c).matrix;
  std::vector<CMatrix> all;
  for (const auto& ev : peripheral_spectrum(c, opts).eigenvalues) {
    auto e = eigenspace_of(s, c, ev.lambda, opts.tol_null);
    all.insert(all.end(), e.basis.begin(), e.basis.end());
  }
  return stack_columns(all, c.dim());
}

inline VerificationReport stability_check(const KrausChannel& c, std::size_t k,
                                          std::size_t trials = 20, std::uint64_t seed = 0,
                                          const SpectralOptions& opts = {}) {
  if (k == 0) throw PreconditionError("stability_check: k must be >= 1");
  VerificationReport r{"stability", seed, {}};
  const auto d = c.dim();
  const KrausChannel ck = power(c, k);

  const CMatrix span_tau = peripheral_span_columns(c, opts);
  const CMatrix span_tauk = peripheral_span_columns(ck, opts);
  r.add(Check::at_most("peripheral_span_gap_k" + std::to_string(k), "P(τ^k) = P(τ)",
                       subspace_gap(span_tau, span_tauk), 1e-7));

  const CMatrix sk = superoperator(ck).matrix;
  const CMatrix fixed_k = null_space(sk - identity(d * d), opts.tol_null);
  const CMatrix s = superoperator(c).matrix;
  std::vector<CMatrix> roots_union;
  for (std::size_t j = 0; j < k; ++j) {
    const Complex w = std::polar(1.0, 2.0 * kPi * static_cast<double>(j) / static_cast<double>(k));
    auto e = eigenspace_of(s, c, w, opts.tol_null);
    roots_union.insert(roots_union.end(), e.basis.begin(), e.basis.end());
  }
  r.add(Check::at_most("fixed_space_gap_k" + std::to_string(k), "F(τ^k) = ⋁_j E_{ω^j}(τ)",
                       subspace_gap(fixed_k, stack_columns(roots_union, d)), 1e-7));

  GaussianSource rng(seed);
  MaxTracker sum_defect, member;
  for (std::size_t t = 0; t < trials && fixed_k.cols() > 0; ++t) {
    const CMatrix x = unvec(fixed_k * rng.vector(fixed_k.cols()));
    const auto parts = fourier_components(c, x, k);
    CMatrix total = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < k; ++j) {
      total += parts[j];
      const Complex w = std::polar(1.0, 2.0 * kPi * static_cast<double>(j) / static_cast<double>(k));
      member(op_norm(periph::apply(c, parts[j]) - w * parts[j]));
    }
    sum_defect(op_norm(total - x));
  }
  r.add(Check::at_most("fourier_reconstruction", "x = Σ_j x_j", sum_defect.value, 1e-10));
  r.add(Check::at_most("fourier_membership", "x_j = (1/k) Σ_l ω^{-lj} τ^l(x) ∈ E_{ω^j}",
                       member.value, 1e-8));
  return r;
}

inline VerificationReport module_structure_check(const PeripheralBoundary& b, Complex lambda,
                                                 std::size_t trials, std::uint64_t seed) {
  VerificationReport r{"module", seed, {}};
  const auto li = b.cluster_of(lambda);
  if (!li) throw PreconditionError("module_structure_check: E_lambda is empty");
  const auto fi = b.fixed_cluster();
  if (!fi) throw PreconditionError("module_structure_check: no fixed points (non-unital input?)");
  const auto& space = b.spaces()[*li];
  const auto& fixed = b.spaces()[*fi];
  const Complex lam = b.lambda(*li);
  const Complex lam_bar = std::conj(lam);
  const auto d = b.d();

  // I_lambda = span{a* o b : a, b in E_lambda}
  std::vector<CMatrix> gens;
  for (const auto& a : space.basis)
    for (const auto& bb : space.basis)
      gens.push_back(detail::product_by_cluster(b, a.adjoint(), lam_bar, bb, lam));
  const CMatrix ideal = range_basis(stack_columns(gens, d), 1e-10);

  GaussianSource rng(seed);
  MaxTracker in_ideal, left_ideal, right_ideal, positivity;
  for (std::size_t t = 0; t < trials; ++t) {
    const CMatrix x = random_in_space(space, d, rng);
    const CMatrix y = random_in_space(space, d, rng);
    const double nx = op_norm(x), ny = op_norm(y);
    const CMatrix xy = detail::product_by_cluster(b, x.adjoint(), lam_bar, y, lam);
    in_ideal(safe_ratio(distance_to_span(ideal, vec(xy)), nx * ny));

    const CMatrix f = random_in_space(fixed, d, rng);
    CMatrix g = CMatrix::Zero(d, d);
    if (ideal.cols() > 0) g = unvec(ideal * rng.vector(ideal.cols()));
    const double nf = op_norm(f), ng = op_norm(g);
    const Complex one{1.0, 0.0};
    left_ideal(safe_ratio(distance_to_span(ideal, vec(detail::product_by_cluster(b, f, one, g, one))),
                          nf * ng));
    right_ideal(safe_ratio(distance_to_span(ideal, vec(detail::product_by_cluster(b, g, one, f, one))),
                           nf * ng));

    const CMatrix xx = detail::product_by_cluster(b, x.adjoint(), lam_bar, x, lam);
    positivity(std::max(0.0, -min_hermitian_eigenvalue(xx) / std::max(nx * nx, 1e-300)));
  }
  r.add(Check::at_most("inner_product_in_ideal", "x*∘y ∈ I_λ", in_ideal.value, 1e-8));
  r.add(Check::at_most("left_ideal", "F∘I_λ ⊆ I_λ", left_ideal.value, 1e-8));
  r.add(Check::at_most("right_ideal", "I_λ∘F ⊆ I_λ", right_ideal.value, 1e-8));
  r.add(Check::at_most("inner_product_positive", "x*∘x ≥ 0", positivity.value, 1e-9));

  const auto ci = b.cluster_of(lam_bar);
  if (!ci) {
    r.add(Check::holds("conjugate_space", "E_λ* = E_λ̄", false, "conjugate eigenvalue missing"));
  } else {
    std::vector<CMatrix> adj;
    for (const auto& m : space.basis) adj.push_back(m.adjoint());
    r.add(Check::at_most("conjugate_space", "E_λ* = E_λ̄",
                         subspace_gap(stack_columns(adj, d), b.spaces()[*ci].columns()), 1e-8));
  }
  return r;
}

inline VerificationReport isometry_dim_check(const PeripheralBoundary& b, Complex lambda,
                                             const CMatrix& v1, const CMatrix& v2) {
  VerificationReport r{"isometry_dim", 0, {}};
  const auto li = b.cluster_of(lambda);
  if (!li) throw PreconditionError("isometry_dim_check: lambda is not peripheral");
  const Complex lam = b.lambda(*li);
  const double tol = b.options().input_residual_tol;
  if (relative_residual(b.channel(), v1, lam) > tol || relative_residual(b.channel(), v2, lam) > tol)
    throw PreconditionError("isometry_dim_check: v1, v2 must lie in E_lambda");
  const auto fi = b.fixed_cluster();
  const auto& space = b.spaces()[*li];
  const std::size_t dim_f = fi ? b.spaces()[*fi].dim() : 0;
  const auto d = b.d();
  const Complex lam_bar = std::conj(lam), one{1.0, 0.0};

  const double left = op_norm(detail::product_by_cluster(b, v1.adjoint(), lam_bar, v2, lam) - identity(d));
  const double right = op_norm(detail::product_by_cluster(b, v1, lam, v2.adjoint(), lam_bar) - identity(d));
  const bool left_unit = left <= 1e-7;
  const bool right_unit = right <= 1e-7;
  r.add(Check{"isometry_relation", "v1*∘v2 = 1 or v1∘v2* = 1", std::min(left, right), 1e-7, "<=",
              std::nullopt, "informational"});

  if (!left_unit && !right_unit) {
    r.add(Check::skipped("dim_equality", "dim E_λ = dim F", "no isometry relation between v1 and v2"));
  } else {
    r.add(Check::at_most("dim_equality", "dim E_λ = dim F",
                         std::abs(static_cast<double>(space.dim()) - static_cast<double>(dim_f)), 0.0));
    std::vector<CMatrix> via1, via2;
    if (fi) {
      for (const auto& x : b.spaces()[*fi].basis) {
        if (left_unit) {
          via1.push_back(detail::product_by_cluster(b, x, one, v1, lam));
          via2.push_back(detail::product_by_cluster(b, x, one, v2, lam));
        } else {
          via1.push_back(detail::product_by_cluster(b, v1, lam, x, one));
          via2.push_back(detail::product_by_cluster(b, v2, lam, x, one));
        }
      }
    }
    const CMatrix target = space.columns();
    r.add(Check::at_most("module_generated_by_v2", left_unit ? "E_λ = F∘v2" : "E_λ = v2∘F",
                         subspace_gap(stack_columns(via2, d), target), 1e-7));
    r.add(Check::at_most("module_generated_by_v1", left_unit ? "E_λ = F∘v1" : "E_λ = v1∘F",
                         subspace_gap(stack_columns(via1, d), target), 1e-7));
  }
  if (dim_f == 1 && space.dim() > 0)
    r.add(Check::at_most("one_dimensional", "dim F = 1 ⟹ dim E_λ = 1",
                         std::abs(static_cast<double>(space.dim()) - 1.0), 0.0));
  return r;
}

}  // namespace periph
