#pragma once

// Truncated minimal dilation of a channel as an N-step tensor tower.
//
// Level n lives on H (x) E^{(x)n} with dim d * m^n (m Kraus operators). The
// Stinespring isometry V h = sum_i (K_i h) (x) e_i embeds level n into level
// n+1 as V (x) id, with the new tensor factor adjacent to H. The flow at
// level n is j_n(x) = iota_{n->N} (x (x) I) iota_{n->N}^H, and the filtration
// q_n = j_n(I) increases to the identity at n = N.

#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "periph/channel.hpp"
#include "periph/random.hpp"
#include "periph/report.hpp"
#include "periph/spectral.hpp"

namespace periph {

inline constexpr std::size_t kDefaultAmbientCap = 4096;

// Cap from PERIPH_AMBIENT_CAP when set to a positive integer.
inline std::size_t ambient_cap_from_env() {
  if (const char* env = std::getenv("PERIPH_AMBIENT_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultAmbientCap;
}

inline CMatrix stinespring_isometry(const KrausChannel& c) {
  const auto d = c.dim();
  const auto m = static_cast<Eigen::Index>(c.size());
  CMatrix v = CMatrix::Zero(d * m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const CMatrix& k = c.kraus()[static_cast<std::size_t>(i)];
    for (Eigen::Index a = 0; a < d; ++a) v.row(a * m + i) = k.row(a);
  }
  return v;
}

struct FlowOperator {
  std::size_t level = 0;
  CMatrix matrix;
};

struct TowerBuildChecks {
  double isometry_defect = 0.0;      // ||V^H V - I||
  double stinespring_defect = 0.0;   // ||V^H (x (x) I) V - tau(x)|| on a random x
  double embedding_defect = 0.0;     // max_n ||iota_{n->N}^H iota_{n->N} - I||
  double chain_defect = 0.0;         // max_n ||iota_{0->N} - iota_{n->N} iota_{0->n}||
  double compression_defect = 0.0;   // max_n ||iota_{0->n}^H (x (x) I) iota_{0->n} - tau^n(x)||
};

class MarkovTower {
 public:
  MarkovTower(KrausChannel channel, std::size_t depth, std::size_t cap = ambient_cap_from_env())
      : channel_(std::move(channel)), depth_(depth) {
    const auto d = static_cast<std::size_t>(channel_.dim());
    const std::size_t m = channel_.size();
    level_dims_.push_back(d);
    for (std::size_t n = 1; n <= depth_; ++n) {
      const std::size_t next = level_dims_.back() * m;
      if (next / m != level_dims_.back() || next > cap) throw CapExceeded(required_dim(d, m, depth_), cap);
      level_dims_.push_back(next);
    }
    if (level_dims_.back() > cap) throw CapExceeded(level_dims_.back(), cap);

    stinespring_ = stinespring_isometry(channel_);
    // step[n] = iota_{n -> n+1} = V (x) I_{m^n}
    std::vector<CMatrix> step;
    for (std::size_t n = 0; n < depth_; ++n)
      step.push_back(kron(stinespring_, identity(static_cast<Eigen::Index>(level_dims_[n] / d))));
    to_top_.resize(depth_ + 1);
    to_top_[depth_] = identity(static_cast<Eigen::Index>(level_dims_[depth_]));
    for (std::size_t n = depth_; n-- > 0;) to_top_[n] = to_top_[n + 1] * step[n];
    run_build_checks(step);
  }

  static std::size_t required_dim(std::size_t d, std::size_t m, std::size_t depth) {
    std::size_t out = d;
    for (std::size_t n = 0; n < depth; ++n) {
      if (out > (static_cast<std::size_t>(-1) / std::max<std::size_t>(m, 1))) return static_cast<std::size_t>(-1);
      out *= m;
    }
    return out;
  }

  const KrausChannel& channel() const { return channel_; }
  std::size_t depth() const { return depth_; }
  std::size_t ambient_dim() const { return level_dims_.back(); }
  std::size_t level_dim(std::size_t n) const { return level_dims_.at(n); }
  const CMatrix& stinespring() const { return stinespring_; }
  const TowerBuildChecks& build_checks() const { return checks_; }

  // iota_{n -> N}
  const CMatrix& embedding(std::size_t n) const {
    check_level(n);
    return to_top_[n];
  }

  // iota_{m -> n} = iota_{n->N}^H iota_{m->N} for m <= n.
  CMatrix embedding(std::size_t from, std::size_t to) const {
    check_level(from);
    check_level(to);
    if (from > to) throw PreconditionError("embedding: from > to");
    return to_top_[to].adjoint() * to_top_[from];
  }

  // x (x) I on level n.
  CMatrix amplify(const CMatrix& x, std::size_t n) const {
    require_shape(channel_, x, "amplify");
    check_level(n);
    return kron(x, identity(static_cast<Eigen::Index>(level_dims_[n] / level_dims_[0])));
  }

  // Pull an ambient operator back to M_d through iota_{0->N}.
  CMatrix pull_back(const CMatrix& ambient_op) const {
    return to_top_[0].adjoint() * ambient_op * to_top_[0];
  }

  void check_level(std::size_t n) const {
    if (n > depth_)
      throw PreconditionError("level " + std::to_string(n) + " out of range [0, " +
                              std::to_string(depth_) + "]");
  }

 private:
  void run_build_checks(const std::vector<CMatrix>& step) {
    const auto d = channel_.dim();
    GaussianSource rng(0x5eed);
    const CMatrix x = rng.matrix(d, d);
    const auto m = static_cast<Eigen::Index>(channel_.size());
    checks_.isometry_defect = op_norm(stinespring_.adjoint() * stinespring_ - identity(d));
    checks_.stinespring_defect =
        op_norm(stinespring_.adjoint() * kron(x, identity(m)) * stinespring_ - periph::apply(channel_, x)) /
        op_norm(x);
    CMatrix up = identity(d);  // iota_{0->n}
    CMatrix tau_n = x;
    for (std::size_t n = 0; n <= depth_; ++n) {
      const auto& e = to_top_[n];
      checks_.embedding_defect = std::max(
          checks_.embedding_defect, op_norm(e.adjoint() * e - identity(e.cols())));
      checks_.chain_defect = std::max(checks_.chain_defect, op_norm(to_top_[0] - e * up));
      checks_.compression_defect =
          std::max(checks_.compression_defect,
                   op_norm(up.adjoint() * amplify(x, n) * up - tau_n) / op_norm(x));
      if (n < depth_) {
        up = step[n] * up;
        tau_n = periph::apply(channel_, tau_n);
      }
    }
  }

  KrausChannel channel_;
  std::size_t depth_;
  std::vector<std::size_t> level_dims_;
  CMatrix stinespring_;
  std::vector<CMatrix> to_top_;
  TowerBuildChecks checks_;
};

inline MarkovTower build_tower(const KrausChannel& c, std::size_t depth,
                               std::size_t cap = ambient_cap_from_env()) {
  return MarkovTower(c, depth, cap);
}

// j_n(x) = iota_{n->N} (x (x) I) iota_{n->N}^H
inline FlowOperator flow(const MarkovTower& t, const CMatrix& x, std::size_t n) {
  const CMatrix& e = t.embedding(n);
  return {n, e * t.amplify(x, n) * e.adjoint()};
}

inline CMatrix filtration(const MarkovTower& t, std::size_t n) {
  return flow(t, identity(t.channel().dim()), n).matrix;
}

// ||q_m j_n(x) q_m - j_m(tau^{n-m}(x))||
inline double markov_verify(const MarkovTower& t, const CMatrix& x, std::size_t m, std::size_t n) {
  if (m > n) throw PreconditionError("markov_verify: requires m <= n");
  t.check_level(n);
  const CMatrix q = filtration(t, m);
  const CMatrix lhs = q * flow(t, x, n).matrix * q;
  const CMatrix rhs = flow(t, power_apply(t.channel(), x, n - m), m).matrix;
  return op_norm(lhs - rhs);
}

inline void require_peripheral_input(const KrausChannel& c, const CMatrix& x, Complex lambda,
                                     const char* what) {
  if (std::abs(std::abs(lambda) - 1.0) > 1e-8)
    throw PreconditionError(std::string(what) + ": |lambda| must be 1");
  const double scale = std::max(hs_norm(x), 1.0);
  const double res = hs_norm(periph::apply(c, x) - lambda * x) / scale;
  if (res > 1e-6)
    throw PreconditionError(std::string(what) + ": input not in E_lambda (residual " +
                            std::to_string(res) + ")");
}

// x_n = lambda^{-n} j_n(x)
inline FlowOperator lift(const MarkovTower& t, const CMatrix& x, Complex lambda, std::size_t n) {
  require_peripheral_input(t.channel(), x, lambda, "lift");
  auto f = flow(t, x, n);
  f.matrix *= std::pow(lambda, -static_cast<double>(n));
  return f;
}

// max over m <= n of ||q_m x_n q_m - x_m|| for the lift of x.
inline double martingale_defect(const MarkovTower& t, const CMatrix& x, Complex lambda) {
  double worst = 0.0;
  std::vector<CMatrix> lifts;
  for (std::size_t n = 0; n <= t.depth(); ++n) lifts.push_back(lift(t, x, lambda, n).matrix);
  for (std::size_t m = 0; m <= t.depth(); ++m) {
    const CMatrix q = filtration(t, m);
    for (std::size_t n = m; n <= t.depth(); ++n)
      worst = std::max(worst, op_norm(q * lifts[n] * q - lifts[m]));
  }
  return worst;
}

// Pull-back of q_0 x_n y_n q_0; equals (lambda mu)^{-n} tau^n(x y).
inline CMatrix compressed_product(const MarkovTower& t, const CMatrix& x, Complex lambda,
                                  const CMatrix& y, Complex mu, std::size_t n) {
  const CMatrix xn = lift(t, x, lambda, n).matrix;
  const CMatrix yn = lift(t, y, mu, n).matrix;
  return t.pull_back(xn * yn);
}

struct LiftNormProbe {
  std::vector<double> lifted_norms;   // ||y_n||, n = 0..N
  std::vector<double> rotated_norms;  // ||sum_j lambda_j^{-n} x_j||
  double max_identity_defect = 0.0;
  std::optional<std::size_t> almost_period;
  double bound_value = 0.0;  // | ||y_{n*}|| - ||sum_j x_j|| |
  double bound = 0.0;        // epsilon * sum_j ||x_j||
  bool bound_holds = false;
  std::string note;
};

inline LiftNormProbe lift_norm_probe(const MarkovTower& t,
                                     std::span<const std::pair<CMatrix, Complex>> components,
                                     double epsilon) {
  LiftNormProbe p;
  const auto d = t.channel().dim();
  CMatrix total = CMatrix::Zero(d, d);
  double norm_sum = 0.0;
  std::vector<Complex> lambdas;
  for (const auto& [x, l] : components) {
    require_peripheral_input(t.channel(), x, l, "lift_norm_probe");
    total += x;
    norm_sum += op_norm(x);
    lambdas.push_back(l);
  }
  for (std::size_t n = 0; n <= t.depth(); ++n) {
    CMatrix y = CMatrix::Zero(static_cast<Eigen::Index>(t.ambient_dim()),
                              static_cast<Eigen::Index>(t.ambient_dim()));
    CMatrix rotated = CMatrix::Zero(d, d);
    for (const auto& [x, l] : components) {
      const Complex w = std::pow(l, -static_cast<double>(n));
      y += w * flow(t, x, n).matrix;
      rotated += w * x;
    }
    p.lifted_norms.push_back(op_norm(y));
    p.rotated_norms.push_back(op_norm(rotated));
    p.max_identity_defect =
        std::max(p.max_identity_defect, std::abs(p.lifted_norms.back() - p.rotated_norms.back()));
  }
  const double target = op_norm(total);
  p.bound = epsilon * norm_sum;
  try {
    p.almost_period = almost_period(lambdas, epsilon, t.depth());
    p.bound_value = std::abs(p.lifted_norms[*p.almost_period] - target);
    p.bound_holds = p.bound_value <= p.bound + 1e-10;
  } catch (const AlmostPeriodExhausted& e) {
    // Degrade to the best level available in the truncated tower.
    p.note = e.what();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= t.depth(); ++n)
      best = std::min(best, std::abs(p.lifted_norms[n] - target));
    p.bound_value = best;
    p.bound_holds = false;
  }
  return p;
}

// Rank of {j_n(E_ab) iota_{0->N} e_c}; reported only.
inline std::size_t minimality_rank(const MarkovTower& t) {
  const auto d = t.channel().dim();
  std::vector<CVector> vecs;
  const CMatrix& base = t.embedding(0);
  for (std::size_t n = 0; n <= t.depth(); ++n)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) {
        CMatrix e = CMatrix::Zero(d, d);
        e(a, b) = 1.0;
        const CMatrix img = flow(t, e, n).matrix * base;
        for (Eigen::Index c = 0; c < d; ++c) vecs.push_back(img.col(c));
      }
  CMatrix all(static_cast<Eigen::Index>(t.ambient_dim()), static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t k = 0; k < vecs.size(); ++k) all.col(static_cast<Eigen::Index>(k)) = vecs[k];
  return static_cast<std::size_t>(range_basis(all, 1e-10).cols());
}

// Build-time invariants, Markov property, filtration monotonicity,
// multiplicativity and martingale consistency of lifts.
inline VerificationReport dilation_verify(const MarkovTower& t, std::size_t trials,
                                          std::uint64_t seed,
                                          const std::vector<std::pair<CMatrix, Complex>>& eigvecs = {}) {
  VerificationReport r{"dilation", seed, {}};
  const auto& bc = t.build_checks();
  r.add(Check::at_most("stinespring_isometry", "V*V = 1", bc.isometry_defect, 1e-12));
  r.add(Check::at_most("stinespring_compression", "V*(x⊗1)V = τ(x)", bc.stinespring_defect, 1e-12));
  r.add(Check::at_most("embedding_isometry", "ι*ι = 1", bc.embedding_defect, 1e-12));
  r.add(Check::at_most("embedding_chain", "ι_{0→N} = ι_{n→N}ι_{0→n}", bc.chain_defect, 1e-12));
  r.add(Check::at_most("compression_identity", "ι*(x⊗1)ι = τ^n(x)", bc.compression_defect, 1e-11));

  const auto d = t.channel().dim();
  GaussianSource rng(seed);
  MaxTracker markov, mult, adj, norm_dev;
  for (std::size_t k = 0; k < trials; ++k) {
    const CMatrix x = rng.matrix(d, d);
    const CMatrix y = rng.matrix(d, d);
    const double nx = op_norm(x);
    for (std::size_t n = 0; n <= t.depth(); ++n) {
      for (std::size_t m = 0; m <= n; ++m) markov(markov_verify(t, x, m, n) / nx);
      const CMatrix jx = flow(t, x, n).matrix, jy = flow(t, y, n).matrix;
      mult(op_norm(jx * jy - flow(t, x * y, n).matrix) / (nx * op_norm(y)));
      adj(op_norm(flow(t, x.adjoint(), n).matrix - jx.adjoint()) / nx);
      norm_dev(std::abs(op_norm(jx) - nx) / nx);
    }
  }
  r.add(Check::at_most("markov_property", "q_m j_n(x) q_m = j_m(τ^{n-m}(x))", markov.value, 1e-10));
  r.add(Check::at_most("flow_multiplicative", "j_n(x)j_n(y) = j_n(xy)", mult.value, 1e-12));
  r.add(Check::at_most("flow_adjoint", "j_n(x*) = j_n(x)*", adj.value, 1e-12));
  r.add(Check::at_most("flow_isometric", "‖j_n(x)‖ = ‖x‖", norm_dev.value, 1e-10));

  double monotone = 0.0;
  for (std::size_t n = 0; n < t.depth(); ++n) {
    const CMatrix diff = filtration(t, n + 1) - filtration(t, n);
    monotone = std::max(monotone, -min_hermitian_eigenvalue(diff));
  }
  r.add(Check::at_most("filtration_monotone", "q_n ≤ q_{n+1}", std::max(monotone, 0.0), 1e-12));

  if (eigvecs.empty()) {
    r.add(Check::skipped("martingale_lifts", "q_m x_n q_m = x_m", "no peripheral eigenvectors supplied"));
  } else {
    double worst = 0.0;
    for (const auto& [x, l] : eigvecs)
      worst = std::max(worst, martingale_defect(t, x, l) / std::max(op_norm(x), 1e-300));
    r.add(Check::at_most("martingale_lifts", "q_m x_n q_m = x_m", worst, 1e-10));
  }
  const std::size_t rank = minimality_rank(t);
  r.add(Check{"minimality_span_rank", "span{j_n(x)ι h} = K", static_cast<double>(rank),
              static_cast<double>(t.ambient_dim()), "report", std::nullopt,
              "reported only; truncation alters minimality"});
  return r;
}

}  // namespace periph
