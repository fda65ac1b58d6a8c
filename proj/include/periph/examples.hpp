#pragma once

// Generators for the standard example families with their predicted
// peripheral structure: unitary conjugations, Weyl (clock/shift) mixtures on
// tensor powers, random walks on finite groups, and a truncated
// lambda-Toeplitz demonstration.

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "periph/channel.hpp"
#include "periph/random.hpp"
#include "periph/spectral.hpp"

namespace periph::examples {

// --- unitary conjugation ----------------------------------------------------

struct EigenvalueDimension {
  Complex lambda;
  std::size_t dim = 0;
};

struct UnitaryFixture {
  KrausChannel channel;
  std::size_t fixed_dim = 0;                      // sum over blocks of dim(H_mu)^2
  std::vector<EigenvalueDimension> predicted;     // dim E_lambda from the block structure
  std::size_t peripheral_total = 0;               // always d^2
};

// tau(X) = U^H X U. E_lambda consists of the X with X(H_mu) in H_{conj(lambda) mu},
// so each ordered pair of eigenspaces (H_mu, H_nu) contributes dim H_mu * dim H_nu
// to lambda = mu * conj(nu).
inline UnitaryFixture unitary_channel(const CMatrix& u, std::string label = "unitary") {
  require_square(u, "unitary_channel");
  const auto d = u.rows();
  if (op_norm(u.adjoint() * u - identity(d)) > 1e-10)
    throw PreconditionError("unitary_channel: input is not unitary");
  Eigen::ComplexEigenSolver<CMatrix> es(u, false);
  const auto groups = periph::detail::cluster_indices(es.eigenvalues(), 1e-7);
  std::vector<std::pair<Complex, std::size_t>> blocks;
  for (const auto& g : groups) {
    Complex mean{0.0, 0.0};
    for (auto i : g) mean += es.eigenvalues()(i);
    blocks.emplace_back(mean / static_cast<double>(g.size()), g.size());
  }
  UnitaryFixture f{KrausChannel({u}, std::move(label)), 0, {}, static_cast<std::size_t>(d * d)};
  for (const auto& [mu, nmu] : blocks) {
    f.fixed_dim += nmu * nmu;
    for (const auto& [nu, nnu] : blocks) {
      const Complex lambda = mu * std::conj(nu);
      bool merged = false;
      for (auto& p : f.predicted)
        if (std::abs(p.lambda - lambda) <= 1e-7) {
          p.dim += nmu * nnu;
          merged = true;
        }
      if (!merged) f.predicted.push_back({lambda, nmu * nnu});
    }
  }
  std::sort(f.predicted.begin(), f.predicted.end(), [](const auto& a, const auto& b) {
    return unit_argument(a.lambda) < unit_argument(b.lambda);
  });
  return f;
}

inline CMatrix diagonal(const std::vector<Complex>& entries) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                            static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i)
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = entries[i];
  return m;
}

inline KrausChannel identity_channel(Eigen::Index d) {
  return KrausChannel({identity(d)}, "identity-" + std::to_string(d));
}

// Kraus {I/sqrt2, Z/sqrt2}; fixed points are the diagonal matrices.
inline KrausChannel dephasing_channel() {
  const double s = 1.0 / std::sqrt(2.0);
  return KrausChannel({s * identity(2), s * diagonal({1.0, -1.0})}, "dephasing");
}

// --- Weyl -------------------------------------------------------------------

struct WeylFixture {
  KrausChannel channel;
  CMatrix u;            // shift-type unitary used in the Kraus family
  CMatrix v;            // clock-type unitary, VU = omega UV
  CMatrix v_tensor;     // V^{(x)n}, predicted in E_omega
  Complex omega;        // exp(2 pi i / d)
  double relation_defect = 0.0;
};

inline WeylFixture weyl_channel(Eigen::Index d, std::size_t n, const std::vector<double>& probs) {
  if (d < 2 || n == 0) throw PreconditionError("weyl_channel: need d >= 2 and n >= 1");
  if (probs.size() != n) throw PreconditionError("weyl_channel: need one probability per site");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw PreconditionError("weyl_channel: probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("weyl_channel: probabilities must sum to 1");

  const Complex omega = std::polar(1.0, 2.0 * kPi / static_cast<double>(d));
  CMatrix clock = CMatrix::Zero(d, d), shift = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    clock(k, k) = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(d));
    shift((k + 1) % d, k) = 1.0;
  }
  auto defect = [&](const CMatrix& v, const CMatrix& u) { return op_norm(v * u - omega * u * v); };
  // Orient the pair so that VU = omega UV holds.
  const std::vector<std::pair<CMatrix, CMatrix>> candidates{
      {clock, shift}, {shift, clock}, {clock.adjoint(), shift}, {clock, shift.adjoint()}};
  WeylFixture f{identity_channel(1), {}, {}, {}, omega, 1.0};
  for (const auto& [v, u] : candidates)
    if (defect(v, u) <= 1e-12) {
      f.v = v;
      f.u = u;
      break;
    }
  if (f.v.size() == 0) throw Error("weyl_channel: no orientation satisfies VU = omega UV");
  f.relation_defect = defect(f.v, f.u);

  std::vector<CMatrix> kraus;
  for (std::size_t j = 0; j < n; ++j) {
    CMatrix uj = identity(1);
    for (std::size_t s = 0; s < n; ++s) uj = kron(uj, s == j ? f.u : identity(d));
    kraus.push_back(std::sqrt(probs[j]) * uj);
  }
  f.v_tensor = identity(1);
  for (std::size_t s = 0; s < n; ++s) f.v_tensor = kron(f.v_tensor, f.v);
  f.channel = KrausChannel(std::move(kraus), "weyl-d" + std::to_string(d) + "-n" + std::to_string(n));
  return f;
}

// --- finite groups ----------------------------------------------------------

struct GroupSpec {
  std::size_t order = 0;
  std::vector<std::vector<std::size_t>> table;  // table[a][b] = a * b
  std::vector<std::string> labels;

  std::size_t mul(std::size_t a, std::size_t b) const { return table[a][b]; }

  std::size_t identity_element() const {
    for (std::size_t e = 0; e < order; ++e) {
      bool ok = true;
      for (std::size_t g = 0; g < order && ok; ++g) ok = table[e][g] == g && table[g][e] == g;
      if (ok) return e;
    }
    throw PreconditionError("GroupSpec: no identity element");
  }

  std::size_t inverse(std::size_t g) const {
    const auto e = identity_element();
    for (std::size_t h = 0; h < order; ++h)
      if (table[g][h] == e && table[h][g] == e) return h;
    throw PreconditionError("GroupSpec: element without inverse");
  }

  bool abelian() const {
    for (std::size_t a = 0; a < order; ++a)
      for (std::size_t b = 0; b < order; ++b)
        if (table[a][b] != table[b][a]) return false;
    return true;
  }

  // Throws unless the table is a group law.
  void validate() const {
    if (order == 0 || table.size() != order) throw PreconditionError("GroupSpec: bad table size");
    for (const auto& row : table) {
      if (row.size() != order) throw PreconditionError("GroupSpec: bad row size");
      for (auto v : row)
        if (v >= order) throw PreconditionError("GroupSpec: entry out of range");
    }
    for (std::size_t a = 0; a < order; ++a)
      for (std::size_t b = 0; b < order; ++b)
        for (std::size_t c = 0; c < order; ++c)
          if (mul(mul(a, b), c) != mul(a, mul(b, c)))
            throw PreconditionError("GroupSpec: table is not associative");
    for (std::size_t g = 0; g < order; ++g) (void)inverse(g);
  }

  static GroupSpec cyclic(std::size_t n) {
    GroupSpec g;
    g.order = n;
    g.table.assign(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a) {
      g.labels.push_back(std::to_string(a));
      for (std::size_t b = 0; b < n; ++b) g.table[a][b] = (a + b) % n;
    }
    return g;
  }

  static GroupSpec direct_product(const GroupSpec& x, const GroupSpec& y) {
    GroupSpec g;
    g.order = x.order * y.order;
    g.table.assign(g.order, std::vector<std::size_t>(g.order));
    for (std::size_t a = 0; a < g.order; ++a) {
      g.labels.push_back("(" + x.labels[a / y.order] + "," + y.labels[a % y.order] + ")");
      for (std::size_t b = 0; b < g.order; ++b)
        g.table[a][b] = x.mul(a / y.order, b / y.order) * y.order + y.mul(a % y.order, b % y.order);
    }
    return g;
  }

  // Symmetric group on three letters (non-abelian), permutations in
  // lexicographic order, composition (a * b)(i) = a(b(i)).
  static GroupSpec symmetric3() {
    std::vector<std::array<int, 3>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    GroupSpec g;
    g.order = 6;
    g.table.assign(6, std::vector<std::size_t>(6));
    for (std::size_t a = 0; a < 6; ++a) {
      g.labels.push_back(std::to_string(perms[a][0]) + std::to_string(perms[a][1]) +
                         std::to_string(perms[a][2]));
      for (std::size_t b = 0; b < 6; ++b) {
        std::array<int, 3> c{perms[a][perms[b][0]], perms[a][perms[b][1]], perms[a][perms[b][2]]};
        g.table[a][b] = static_cast<std::size_t>(std::find(perms.begin(), perms.end(), c) - perms.begin());
      }
    }
    return g;
  }
};

// R(g) delta_h = delta_{h g^{-1}}
inline CMatrix right_regular(const GroupSpec& g, std::size_t elem) {
  const auto n = static_cast<Eigen::Index>(g.order);
  CMatrix r = CMatrix::Zero(n, n);
  const auto ginv = g.inverse(elem);
  for (std::size_t h = 0; h < g.order; ++h)
    r(static_cast<Eigen::Index>(g.mul(h, ginv)), static_cast<Eigen::Index>(h)) = 1.0;
  return r;
}

// One-dimensional characters, obtained by diagonalizing a generic element of
// the regular representation of the abelianization G / [G, G].
inline std::vector<std::vector<Complex>> one_dimensional_characters(const GroupSpec& g) {
  g.validate();
  // Commutator subgroup as the closure of all commutators.
  std::set<std::size_t> comm;
  for (std::size_t a = 0; a < g.order; ++a)
    for (std::size_t b = 0; b < g.order; ++b)
      comm.insert(g.mul(g.mul(a, b), g.mul(g.inverse(a), g.inverse(b))));
  for (bool grew = true; grew;) {
    grew = false;
    const std::vector<std::size_t> cur(comm.begin(), comm.end());
    for (auto a : cur)
      for (auto b : cur) grew |= comm.insert(g.mul(a, b)).second;
  }
  // Cosets gN.
  std::vector<std::size_t> coset(g.order, g.order);
  std::vector<std::size_t> reps;
  for (std::size_t a = 0; a < g.order; ++a) {
    if (coset[a] != g.order) continue;
    for (auto n : comm) coset[g.mul(a, n)] = reps.size();
    reps.push_back(a);
  }
  const auto q = static_cast<Eigen::Index>(reps.size());
  std::vector<CMatrix> left(reps.size(), CMatrix::Zero(q, q));
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = 0; b < reps.size(); ++b)
      left[a](static_cast<Eigen::Index>(coset[g.mul(reps[a], reps[b])]), static_cast<Eigen::Index>(b)) = 1.0;
  GaussianSource rng(0xc0ffee);
  CMatrix generic = CMatrix::Zero(q, q);
  for (const auto& l : left) generic += rng.complex() * l;
  Eigen::ComplexEigenSolver<CMatrix> es(generic, true);
  std::vector<std::vector<Complex>> chars;
  for (Eigen::Index k = 0; k < q; ++k) {
    const CVector v = es.eigenvectors().col(k);
    std::vector<Complex> chi(g.order);
    for (std::size_t h = 0; h < g.order; ++h) {
      const auto& l = left[coset[h]];
      chi[h] = (v.adjoint() * l * v)(0, 0) / v.squaredNorm();
    }
    chars.push_back(std::move(chi));
  }
  return chars;
}

struct CharacterEigenvector {
  Complex lambda;
  std::vector<Complex> character;
  CMatrix v_chi;  // V_chi delta_h = chi(h) delta_h
};

struct GroupWalkFixture {
  KrausChannel channel;
  std::vector<CharacterEigenvector> predicted;  // characters constant on supp(mu)
};

inline GroupWalkFixture group_walk_channel(const GroupSpec& g, const std::vector<double>& mu) {
  g.validate();
  if (mu.size() != g.order) throw PreconditionError("group_walk_channel: mu has wrong length");
  double total = 0.0;
  for (double p : mu) {
    if (p < 0.0) throw PreconditionError("group_walk_channel: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("group_walk_channel: mu must sum to 1");

  // Heisenberg action sum_g mu(g) R(g) X R(g)^H, so K_g = sqrt(mu(g)) R(g)^H.
  std::vector<CMatrix> kraus;
  std::vector<std::size_t> support;
  for (std::size_t e = 0; e < g.order; ++e)
    if (mu[e] > 0.0) {
      kraus.push_back(std::sqrt(mu[e]) * right_regular(g, e).adjoint());
      support.push_back(e);
    }
  GroupWalkFixture f{KrausChannel(std::move(kraus), "group-walk-" + std::to_string(g.order)), {}};
  for (auto& chi : one_dimensional_characters(g)) {
    const Complex value = chi[support.front()];
    bool constant = true;
    for (auto s : support) constant = constant && std::abs(chi[s] - value) <= 1e-9;
    if (!constant) continue;
    f.predicted.push_back({value, chi, diagonal(chi)});
  }
  std::sort(f.predicted.begin(), f.predicted.end(), [](const auto& a, const auto& b) {
    return unit_argument(a.lambda) < unit_argument(b.lambda);
  });
  return f;
}

struct CharacterScan {
  std::vector<Complex> predicted;        // distinct lambda from characters constant on S
  std::vector<Complex> numerical;        // peripheral spectrum of the channel
  std::vector<Complex> missing;          // predicted but not found numerically
  std::vector<Complex> unexplained;      // found numerically without a character
  double max_eigvec_residual = 0.0;      // max ||tau(V_chi) - lambda V_chi||
  bool abelian = true;
  bool agreement = false;
};

// Gathers evidence comparing character predictions against numerics; makes
// no claim either way.
inline CharacterScan character_scan(const GroupSpec& g, const std::vector<double>& mu,
                                    const SpectralOptions& opts = {}) {
  const auto fixture = group_walk_channel(g, mu);
  CharacterScan s;
  s.abelian = g.abelian();
  for (const auto& p : fixture.predicted) {
    s.max_eigvec_residual =
        std::max(s.max_eigvec_residual, op_norm(periph::apply(fixture.channel, p.v_chi) - p.lambda * p.v_chi));
    bool seen = false;
    for (const auto& z : s.predicted) seen = seen || std::abs(z - p.lambda) <= opts.cluster_radius;
    if (!seen) s.predicted.push_back(p.lambda);
  }
  for (const auto& ev : peripheral_spectrum(fixture.channel, opts).eigenvalues)
    s.numerical.push_back(ev.lambda);
  auto contains = [&](const std::vector<Complex>& xs, Complex z) {
    for (const auto& x : xs)
      if (std::abs(x - z) <= 1e-6) return true;
    return false;
  };
  for (const auto& z : s.predicted)
    if (!contains(s.numerical, z)) s.missing.push_back(z);
  for (const auto& z : s.numerical)
    if (!contains(s.predicted, z)) s.unexplained.push_back(z);
  s.agreement = s.missing.empty() && s.unexplained.empty();
  return s;
}

// --- lambda-Toeplitz truncation ----------------------------------------------

struct SymbolSpec {
  std::map<int, Complex> coefficients;  // Fourier mode -> coefficient

  int support() const {
    int s = 0;
    for (const auto& [k, c] : coefficients) s = std::max(s, std::abs(k));
    return s;
  }

  Complex operator()(Complex z) const {
    Complex out{0.0, 0.0};
    for (const auto& [k, c] : coefficients) out += c * std::pow(z, k);
    return out;
  }

  // sup |f| over a uniform grid on the circle.
  double sup_norm(int grid = 4096) const {
    double best = 0.0;
    for (int t = 0; t < grid; ++t)
      best = std::max(best, std::abs((*this)(std::polar(1.0, 2.0 * kPi * t / grid))));
    return best;
  }
};

struct ToeplitzTerm {
  Complex coeff{1.0, 0.0};
  SymbolSpec symbol;
  Complex lambda{1.0, 0.0};
};

struct ToeplitzRow {
  int truncation = 0;
  double compressed_norm = 0.0;  // ||P A P||
  double full_norm = 0.0;        // ||A|| on modes -M..M
  double ratio = 0.0;            // r(M)
  double product_defect = 0.0;   // interior defect of the product symbol law
};

struct ToeplitzReport {
  std::vector<ToeplitzRow> rows;
  double symbol_sup_norm = 0.0;  // ||sum_j c_j f_j||_inf, meaningful for a single lambda
};

namespace detail {

inline Complex unit_power(Complex lambda, int k) {
  return std::polar(1.0, std::arg(lambda) * static_cast<double>(k));
}

// M_f on modes -M..M; row/col index i <-> mode i - M.
inline CMatrix multiplication_matrix(const SymbolSpec& f, int m) {
  const int n = 2 * m + 1;
  CMatrix out = CMatrix::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (const auto& [k, c] : f.coefficients) {
      const int col = r - k;
      if (col >= 0 && col < n) out(r, col) += c;
    }
  return out;
}

inline CMatrix rotation_matrix(Complex lambda, int m) {
  const int n = 2 * m + 1;
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) out(i, i) = unit_power(lambda, i - m);
  return out;
}

// f(.) g(lambda .)
inline SymbolSpec product_symbol(const SymbolSpec& f, const SymbolSpec& g, Complex lambda) {
  SymbolSpec h;
  for (const auto& [a, fa] : f.coefficients)
    for (const auto& [b, gb] : g.coefficients) h.coefficients[a + b] += fa * gb * unit_power(lambda, b);
  return h;
}

}  // namespace detail

inline ToeplitzReport toeplitz_demo(const std::vector<int>& truncations,
                                    const std::vector<ToeplitzTerm>& terms) {
  if (terms.empty()) throw PreconditionError("toeplitz_demo: no terms");
  int support = 0;
  for (const auto& t : terms) {
    if (std::abs(std::abs(t.lambda) - 1.0) > 1e-12)
      throw PreconditionError("toeplitz_demo: |lambda| must be 1");
    support = std::max(support, t.symbol.support());
  }
  ToeplitzReport rep;
  {
    SymbolSpec sum;
    for (const auto& t : terms)
      for (const auto& [k, c] : t.symbol.coefficients) sum.coefficients[k] += t.coeff * c;
    rep.symbol_sup_norm = sum.sup_norm();
  }
  const auto& first = terms.front();
  const auto& second = terms.back();
  const int pair_support = first.symbol.support() + second.symbol.support();
  for (int m : truncations) {
    if (m < support || m < pair_support)
      throw PreconditionError("toeplitz_demo: truncation " + std::to_string(m) +
                              " too small for symbol support " + std::to_string(std::max(support, pair_support)));
    const int n = 2 * m + 1;
    CMatrix a = CMatrix::Zero(n, n);
    for (const auto& t : terms)
      a += t.coeff * detail::multiplication_matrix(t.symbol, m) * detail::rotation_matrix(t.lambda, m);
    ToeplitzRow row;
    row.truncation = m;
    row.full_norm = op_norm(a);
    row.compressed_norm = op_norm(a.block(m, m, m + 1, m + 1));
    row.ratio = row.full_norm > 0 ? row.compressed_norm / row.full_norm : 1.0;

    const CMatrix lhs = detail::multiplication_matrix(first.symbol, m) *
                        detail::rotation_matrix(first.lambda, m) *
                        detail::multiplication_matrix(second.symbol, m) *
                        detail::rotation_matrix(second.lambda, m);
    const CMatrix rhs =
        detail::multiplication_matrix(detail::product_symbol(first.symbol, second.symbol, first.lambda), m) *
        detail::rotation_matrix(first.lambda * second.lambda, m);
    const int interior = m + 1 - pair_support;
    row.product_defect =
        interior > 0 ? op_norm(lhs.block(m, m, interior, interior) - rhs.block(m, m, interior, interior)) : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace periph::examples
