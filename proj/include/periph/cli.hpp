#pragma once

// Command-line driver. `run_cli` is the whole program; the executable in
// tools/ only forwards argv and the standard streams.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or usage,
// 3 ambient cap exceeded, 4 tolerance conflict, 5 input outside the
// peripheral span.

#include <chrono>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "periph/boundary.hpp"
#include "periph/dilation.hpp"
#include "periph/examples.hpp"
#include "periph/io.hpp"

namespace periph::cli {

using io::json;

enum ExitCode : int {
  kPass = 0,
  kCheckFailure = 1,
  kInputError = 2,
  kCapExceeded = 3,
  kToleranceConflict = 4,
  kNotInSpan = 5,
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw io::InputError("cannot parse number \"" + s + "\"");
  }
  if (used != s.size()) throw io::InputError("cannot parse number \"" + s + "\"");
  return v;
}

// Accepts "a", "bi", "a+bi", "a-bi", "i" and "-i".
inline Complex parse_complex(std::string s) {
  s = trim(s);
  if (s.empty()) throw io::InputError("empty complex number");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  auto imag_of = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t);
  };
  if (split_at == std::string::npos) return {0.0, imag_of(body)};
  return {parse_real(body.substr(0, split_at)), imag_of(body.substr(split_at))};
}

inline std::vector<Complex> parse_complex_list(const std::string& s) {
  std::vector<Complex> out;
  for (const auto& t : split(s, ',')) out.push_back(parse_complex(t));
  return out;
}

inline std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(parse_real(t));
  return out;
}

// "mode:coeff,mode:coeff"
inline examples::SymbolSpec parse_symbol(const std::string& s) {
  examples::SymbolSpec f;
  for (const auto& t : split(s, ',')) {
    const auto colon = t.find(':');
    if (colon == std::string::npos) throw io::InputError("symbol term \"" + t + "\" needs mode:coeff");
    const double mode = parse_real(trim(t.substr(0, colon)));
    if (mode != std::floor(mode)) throw io::InputError("symbol mode must be an integer");
    f.coefficients[static_cast<int>(mode)] += parse_complex(t.substr(colon + 1));
  }
  return f;
}

// "Z4", "Z2xZ3", "S3"
inline examples::GroupSpec parse_group(const std::string& s) {
  std::optional<examples::GroupSpec> g;
  for (const auto& factor : split(s, 'x')) {
    examples::GroupSpec f;
    if (factor == "S3") {
      f = examples::GroupSpec::symmetric3();
    } else if (factor.size() > 1 && factor[0] == 'Z') {
      const double n = parse_real(factor.substr(1));
      if (n < 1 || n != std::floor(n)) throw io::InputError("bad cyclic order in \"" + factor + "\"");
      f = examples::GroupSpec::cyclic(static_cast<std::size_t>(n));
    } else {
      throw io::InputError("unknown group \"" + factor + "\" (use Zn, S3 or products like Z2xZ3)");
    }
    g = g ? examples::GroupSpec::direct_product(*g, f) : f;
  }
  if (!g) throw io::InputError("empty group description");
  return *g;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline json tolerances_json(const BoundaryOptions& o) {
  return {{"tol_peripheral", o.spectral.tol_peripheral},
          {"cluster_radius", o.spectral.cluster_radius},
          {"tol_null", o.spectral.tol_null},
          {"input_residual_tol", o.input_residual_tol},
          {"span_tol", o.span_tol}};
}

inline json report_json(const std::string& command, const std::string& label, std::uint64_t seed,
                        json tolerances, const std::vector<Check>& checks, json timings) {
  json j;
  j["command"] = command;
  j["channel_label"] = label;
  j["seed"] = seed;
  j["tolerances"] = std::move(tolerances);
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back(io::check_to_json(c));
  j["timings"] = std::move(timings);
  return j;
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (c.pass && !*c.pass) return false;
  return true;
}

inline void prefix_checks(std::vector<Check>& dst, const VerificationReport& r, const std::string& prefix) {
  for (auto c : r.checks) {
    c.name = prefix + c.name;
    dst.push_back(std::move(c));
  }
}

inline std::string lambda_tag(Complex z) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag())
    << "i";
  return s.str();
}

}  // namespace detail

struct SpectrumArgs {
  std::string file;
  SpectralOptions spectral;
};

inline int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  detail::Stopwatch clock;
  const auto c = io::read_channel(a.file);
  const auto ss = semisimplicity_report(c, a.spectral);
  std::vector<Check> checks;
  json eigen = json::array();
  std::size_t total = 0;
  for (const auto& e : ss.entries) {
    eigen.push_back({{"lambda", io::complex_to_json(e.lambda)},
                     {"argument_over_2pi", unit_argument(e.lambda) / (2.0 * kPi)},
                     {"geometric_multiplicity", e.geometric_multiplicity},
                     {"algebraic_multiplicity", e.algebraic_multiplicity},
                     {"semisimple", e.semisimple}});
    total += e.geometric_multiplicity;
    checks.push_back(Check::holds("semisimple[" + detail::lambda_tag(e.lambda) + "]",
                                  "dim ker(τ-λ) = dim ker(τ-λ)^d", e.semisimple));
  }
  BoundaryOptions o;
  o.spectral = a.spectral;
  json rep = detail::report_json("spectrum", c.label(), 0, detail::tolerances_json(o), checks,
                                 {{"total_seconds", clock.seconds()}});
  rep["dim"] = c.dim();
  rep["eigenvalues"] = std::move(eigen);
  rep["peripheral_dimension"] = total;
  out << rep.dump(2) << "\n";
  return detail::all_pass(checks) ? kPass : kCheckFailure;
}

struct VerifyArgs {
  std::string file;
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::size_t trials = 20;
  std::size_t depth = 4;
  std::size_t k = 2;
  BoundaryOptions options;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const auto c = io::read_channel(a.file);
  const bool all = a.suite == "all";
  std::vector<Check> checks;
  json timings = json::object();
  detail::Stopwatch total;

  std::optional<PeripheralBoundary> boundary;
  auto get_boundary = [&]() -> const PeripheralBoundary& {
    if (!boundary) boundary.emplace(c, a.options);
    return *boundary;
  };

  if (all || a.suite == "cstar") {
    detail::Stopwatch t;
    detail::prefix_checks(checks, cstar_verify(get_boundary(), a.trials, a.seed), "cstar/");
    timings["cstar"] = t.seconds();
  }
  if (all || a.suite == "automorphism") {
    detail::Stopwatch t;
    detail::prefix_checks(checks, automorphism_check(get_boundary(), a.trials, a.seed), "automorphism/");
    timings["automorphism"] = t.seconds();
  }
  if (all || a.suite == "stability") {
    detail::Stopwatch t;
    detail::prefix_checks(checks, stability_check(c, a.k, a.trials, a.seed, a.options.spectral),
                          "stability/");
    timings["stability"] = t.seconds();
  }
  if (all || a.suite == "module") {
    detail::Stopwatch t;
    const auto& b = get_boundary();
    for (std::size_t i = 0; i < b.clusters(); ++i)
      detail::prefix_checks(checks, module_structure_check(b, b.lambda(i), a.trials, a.seed),
                            "module[" + detail::lambda_tag(b.lambda(i)) + "]/");
    timings["module"] = t.seconds();
  }
  if (all || a.suite == "dilation") {
    detail::Stopwatch t;
    const auto tower = build_tower(c, a.depth);
    std::vector<std::pair<CMatrix, Complex>> eigvecs;
    const auto& b = get_boundary();
    for (std::size_t i = 0; i < b.clusters(); ++i)
      for (const auto& x : b.spaces()[i].basis) eigvecs.emplace_back(x, b.lambda(i));
    detail::prefix_checks(checks, dilation_verify(tower, a.trials, a.seed, eigvecs), "dilation/");
    timings["dilation"] = t.seconds();
  }
  timings["total_seconds"] = total.seconds();

  json tol = detail::tolerances_json(a.options);
  tol["trials"] = a.trials;
  tol["depth"] = a.depth;
  tol["k"] = a.k;
  tol["ambient_cap"] = ambient_cap_from_env();
  json rep = detail::report_json("verify", c.label(), a.seed, std::move(tol), checks, std::move(timings));
  rep["suite"] = a.suite;
  rep["pass"] = detail::all_pass(checks);
  out << rep.dump(2) << "\n";
  return detail::all_pass(checks) ? kPass : kCheckFailure;
}

struct ProductArgs {
  std::string channel_file;
  std::string x_file;
  std::string y_file;
  std::string method = "spectral";
  std::size_t cesaro_terms = 10000;
  std::size_t limit_terms = 200;
  std::size_t depth = 4;
  BoundaryOptions options;
};

namespace detail {

// Sum over component pairs of a pairwise product rule.
template <typename Rule>
CMatrix pairwise_product(const PeripheralBoundary& b, const BoundaryElement& x,
                         const BoundaryElement& y, Rule rule) {
  CMatrix out = CMatrix::Zero(b.d(), b.d());
  for (std::size_t i = 0; i < b.clusters(); ++i) {
    if (x.components[i].isZero(0.0)) continue;
    for (std::size_t j = 0; j < b.clusters(); ++j) {
      if (y.components[j].isZero(0.0)) continue;
      out += rule(x.components[i], b.lambda(i), y.components[j], b.lambda(j));
    }
  }
  return out;
}

}  // namespace detail

inline int cmd_product(const ProductArgs& a, std::ostream& out) {
  detail::Stopwatch total;
  const auto c = io::read_channel(a.channel_file);
  const CMatrix xm = io::read_matrix(a.x_file);
  const CMatrix ym = io::read_matrix(a.y_file);
  if (xm.rows() != c.dim() || xm.cols() != c.dim() || ym.rows() != c.dim() || ym.cols() != c.dim())
    throw io::InputError("x and y must be " + std::to_string(c.dim()) + "x" + std::to_string(c.dim()));

  const PeripheralBoundary b(c, a.options);
  const auto x = decompose_peripheral(b, xm);
  const auto y = decompose_peripheral(b, ym);
  const double scale = std::max(op_norm(xm) * op_norm(ym), 1e-300);

  json timings = json::object();
  std::map<std::string, CMatrix> results;
  {
    detail::Stopwatch t;
    results["spectral"] = product_general(b, x, y).matrix;
    timings["spectral"] = t.seconds();
  }
  const bool want_all = a.method == "spectral";
  if (want_all || a.method == "cesaro") {
    detail::Stopwatch t;
    results["cesaro"] = detail::pairwise_product(b, x, y, [&](const CMatrix& p, Complex l, const CMatrix& q, Complex m) {
      return cesaro_product(c, p, l, q, m, a.cesaro_terms);
    });
    timings["cesaro"] = t.seconds();
  }
  if (want_all || a.method == "limit") {
    detail::Stopwatch t;
    const CMatrix s = superoperator(c).matrix;
    results["limit"] = detail::pairwise_product(b, x, y, [&](const CMatrix& p, Complex l, const CMatrix& q, Complex m) {
      CVector v = vec(p * q);
      for (std::size_t n = 0; n < a.limit_terms; ++n) v = s * v / (l * m);
      return unvec(v);
    });
    timings["limit"] = t.seconds();
  }
  if (want_all || a.method == "dilation") {
    detail::Stopwatch t;
    const auto tower = build_tower(c, a.depth);
    results["dilation"] = detail::pairwise_product(b, x, y, [&](const CMatrix& p, Complex l, const CMatrix& q, Complex m) {
      return compressed_product(tower, p, l, q, m, a.depth);
    });
    timings["dilation"] = t.seconds();
  }

  const std::map<std::string, std::pair<double, std::string>> thresholds{
      {"cesaro", {1e-2, "(1/N) Σ (λμ)^{-n} τ^n(xy)"}},
      {"limit", {1e-6, "lim (λμ)^{-n} τ^n(xy)"}},
      {"dilation", {1e-8, "q_0 x_N y_N q_0 = (λμ)^{-N} τ^N(xy)"}}};
  std::vector<Check> checks;
  json agreement = json::array();
  for (const auto& [name, m] : results) {
    if (name == "spectral") continue;
    const double diff = op_norm(m - results["spectral"]) / scale;
    const auto& [thr, anchor] = thresholds.at(name);
    checks.push_back(Check::at_most("agreement_" + name, anchor, diff, thr));
    agreement.push_back({{"method", name}, {"relative_difference_to_spectral", diff}});
  }
  timings["total_seconds"] = total.seconds();

  json tol = detail::tolerances_json(a.options);
  tol["cesaro_terms"] = a.cesaro_terms;
  tol["limit_terms"] = a.limit_terms;
  tol["depth"] = a.depth;
  json rep = detail::report_json("product", c.label(), 0, std::move(tol), checks, std::move(timings));
  rep["method"] = a.method;
  rep["matrix"] = io::matrix_to_json(results.at(a.method));
  rep["agreement"] = std::move(agreement);
  out << rep.dump(2) << "\n";
  return detail::all_pass(checks) ? kPass : kCheckFailure;
}

struct ExampleArgs {
  std::string diag = "1,i";
  Eigen::Index weyl_d = 3;
  std::size_t weyl_n = 2;
  std::string probs;
  std::string group = "Z4";
  std::string mu;
  std::string truncations = "32,64,128,256";
  std::string symbol = "1:1,-1:1";
  double lambda_turns = 0.0;
};

inline int cmd_example_unitary(const ExampleArgs& a, std::ostream& out) {
  const auto f = examples::unitary_channel(examples::diagonal(detail::parse_complex_list(a.diag)),
                                           "unitary-diag");
  json predicted = json::array();
  for (const auto& p : f.predicted)
    predicted.push_back({{"lambda", io::complex_to_json(p.lambda)}, {"dim", p.dim}});
  out << io::channel_to_json(f.channel, {{"generator", "unitary"},
                                         {"diag", a.diag},
                                         {"fixed_dim", f.fixed_dim},
                                         {"predicted", predicted}})
             .dump(2)
      << "\n";
  return kPass;
}

inline int cmd_example_weyl(const ExampleArgs& a, std::ostream& out) {
  std::vector<double> probs;
  if (a.probs.empty())
    probs.assign(a.weyl_n, 1.0 / static_cast<double>(a.weyl_n));
  else
    probs = detail::parse_real_list(a.probs);
  const auto f = examples::weyl_channel(a.weyl_d, a.weyl_n, probs);
  out << io::channel_to_json(f.channel, {{"generator", "weyl"},
                                         {"d", a.weyl_d},
                                         {"n", a.weyl_n},
                                         {"probs", probs},
                                         {"v", io::matrix_to_json(f.v)},
                                         {"u", io::matrix_to_json(f.u)}})
             .dump(2)
      << "\n";
  return kPass;
}

inline int cmd_example_group_walk(const ExampleArgs& a, std::ostream& out) {
  const auto g = detail::parse_group(a.group);
  std::vector<double> mu;
  if (a.mu.empty()) {
    mu.assign(g.order, 0.0);
    mu[g.order > 1 ? 1 : 0] = 1.0;
  } else {
    mu = detail::parse_real_list(a.mu);
  }
  const auto f = examples::group_walk_channel(g, mu);
  json predicted = json::array();
  for (const auto& p : f.predicted) predicted.push_back(io::complex_to_json(p.lambda));
  out << io::channel_to_json(f.channel, {{"generator", "group-walk"},
                                         {"group", a.group},
                                         {"mu", mu},
                                         {"predicted_eigenvalues", predicted}})
             .dump(2)
      << "\n";
  return kPass;
}

inline int cmd_example_toeplitz(const ExampleArgs& a, std::ostream& out) {
  std::vector<int> ms;
  for (double m : detail::parse_real_list(a.truncations)) {
    if (m < 1 || m != std::floor(m)) throw io::InputError("truncations must be positive integers");
    ms.push_back(static_cast<int>(m));
  }
  examples::ToeplitzTerm term;
  term.symbol = detail::parse_symbol(a.symbol);
  term.lambda = std::polar(1.0, 2.0 * kPi * a.lambda_turns);
  const auto rep = examples::toeplitz_demo(ms, {term});
  out << "M,r,defect\n";
  out << std::setprecision(17);
  for (const auto& row : rep.rows) out << row.truncation << "," << row.ratio << "," << row.product_defect << "\n";
  return kPass;
}

// Parses argv and dispatches; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peripheral spectrum and peripheral Poisson boundary of unital channels", "periph"};
  app.require_subcommand(1);

  BoundaryOptions opts;
  auto add_tolerances = [&](CLI::App* sub) {
    sub->add_option("--tol-peripheral", opts.spectral.tol_peripheral, "||λ|-1| cutoff")->capture_default_str();
    sub->add_option("--cluster-radius", opts.spectral.cluster_radius, "eigenvalue clustering radius")
        ->capture_default_str();
    sub->add_option("--tol-null", opts.spectral.tol_null, "relative null-space cutoff")->capture_default_str();
  };

  SpectrumArgs sa;
  auto* spectrum = app.add_subcommand("spectrum", "List peripheral eigenvalues and multiplicities");
  spectrum->add_option("channel", sa.file, "channel JSON file")->required();
  add_tolerances(spectrum);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run structural verification suites");
  verify->add_option("channel", va.file, "channel JSON file")->required();
  verify->add_option("--suite", va.suite)
      ->check(CLI::IsMember({"cstar", "automorphism", "stability", "module", "dilation", "all"}))
      ->capture_default_str();
  verify->add_option("--seed", va.seed)->capture_default_str();
  verify->add_option("--trials", va.trials)->capture_default_str();
  verify->add_option("--depth", va.depth, "dilation tower depth")->capture_default_str();
  verify->add_option("--k", va.k, "power used by the stability suite")->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_tolerances(verify);

  ProductArgs pa;
  auto* product = app.add_subcommand("product", "Peripheral product of two elements");
  product->add_option("channel", pa.channel_file)->required();
  product->add_option("x", pa.x_file, "matrix JSON file")->required();
  product->add_option("y", pa.y_file, "matrix JSON file")->required();
  product->add_option("--method", pa.method, "output method; spectral also runs every cross-check")
      ->check(CLI::IsMember({"spectral", "cesaro", "limit", "dilation"}))
      ->capture_default_str();
  product->add_option("--cesaro-terms", pa.cesaro_terms)->check(CLI::PositiveNumber)->capture_default_str();
  product->add_option("--limit-terms", pa.limit_terms)->capture_default_str();
  product->add_option("--depth", pa.depth)->capture_default_str();
  add_tolerances(product);

  ExampleArgs ea;
  auto* example = app.add_subcommand("example", "Emit a built-in example");
  example->require_subcommand(1);
  auto* ex_unitary = example->add_subcommand("unitary", "Conjugation by a diagonal unitary");
  ex_unitary->add_option("--diag", ea.diag, "comma-separated diagonal, e.g. 1,i,-1")->capture_default_str();
  auto* ex_weyl = example->add_subcommand("weyl", "Weyl shift channel on (C^d)^{(x)n}");
  ex_weyl->add_option("--d", ea.weyl_d)->capture_default_str();
  ex_weyl->add_option("--n", ea.weyl_n)->capture_default_str();
  ex_weyl->add_option("--probs", ea.probs, "comma-separated, default uniform");
  auto* ex_group = example->add_subcommand("group-walk", "Random walk on a finite group");
  ex_group->add_option("--group", ea.group, "Zn, S3 or products such as Z2xZ3")->capture_default_str();
  ex_group->add_option("--mu", ea.mu, "comma-separated probabilities, default delta at element 1");
  auto* ex_toeplitz = example->add_subcommand("toeplitz-demo", "Truncated λ-Toeplitz norms (CSV)");
  ex_toeplitz->add_option("--M", ea.truncations, "comma-separated truncations")->capture_default_str();
  ex_toeplitz->add_option("--symbol", ea.symbol, "mode:coeff pairs")->capture_default_str();
  ex_toeplitz->add_option("--lambda-turns", ea.lambda_turns, "λ = exp(2πi t)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "periph: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*spectrum) {
      sa.spectral = opts.spectral;
      return cmd_spectrum(sa, out);
    }
    if (*verify) {
      va.options = opts;
      return cmd_verify(va, out);
    }
    if (*product) {
      pa.options = opts;
      return cmd_product(pa, out);
    }
    if (*ex_unitary) return cmd_example_unitary(ea, out);
    if (*ex_weyl) return cmd_example_weyl(ea, out);
    if (*ex_group) return cmd_example_group_walk(ea, out);
    if (*ex_toeplitz) return cmd_example_toeplitz(ea, out);
  } catch (const CapExceeded& e) {
    err << "periph: " << e.what() << " (set PERIPH_AMBIENT_CAP to raise it)\n";
    return kCapExceeded;
  } catch (const ToleranceConflict& e) {
    err << "periph: tolerance conflict: " << e.what() << "\n";
    return kToleranceConflict;
  } catch (const NotInPeripheralSpan& e) {
    err << "periph: " << e.what() << "\n";
    return kNotInSpan;
  } catch (const io::InputError& e) {
    err << "periph: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "periph: " << e.what() << "\n";
    return kInputError;
  } catch (const ShapeError& e) {
    err << "periph: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "periph: " << e.what() << "\n";
    return kCheckFailure;
  }
  err << "periph: no command\n";
  return kInputError;
}

}  // namespace periph::cli
