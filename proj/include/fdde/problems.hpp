#ifndef FDDE_PROBLEMS_HPP
#define FDDE_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdde/expr.hpp"
#include "fdde/stepper.hpp"

namespace fdde {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BuiltinId { Ex1CaseI, Ex1CaseII, Ex2CaseI, Ex2CaseII, Houseflies, LaserNoise, FracBVP };

struct BuiltinOptions {
  std::map<std::string, double> params; // printed model parameters only
  std::optional<double> nu;
  std::optional<double> nu1;
  std::optional<double> tau;
  std::optional<double> horizon;
};

inline const std::vector<std::pair<std::string, BuiltinId>>& builtin_names() {
  static const std::vector<std::pair<std::string, BuiltinId>> names = {
      {"ex1-case-i", BuiltinId::Ex1CaseI},   {"ex1-case-ii", BuiltinId::Ex1CaseII},
      {"ex2-case-i", BuiltinId::Ex2CaseI},   {"ex2-case-ii", BuiltinId::Ex2CaseII},
      {"houseflies", BuiltinId::Houseflies}, {"laser-noise", BuiltinId::LaserNoise},
      {"frac-bvp", BuiltinId::FracBVP}};
  return names;
}

inline std::optional<BuiltinId> builtin_by_name(const std::string& name) {
  for (const auto& [n, id] : builtin_names()) {
    if (n == name) return id;
  }
  return std::nullopt;
}

namespace detail {

/// Terms (coefficient, exponent) of D^nu applied to t^{13/2} sin(pi t^{4/3}),
/// truncated when the term magnitude at t = 1 drops below 1e-18.
inline std::vector<std::pair<double, double>> sine_series_caputo(double nu) {
  std::vector<std::pair<double, double>> s;
  const double pi = std::numbers::pi;
  double sign = 1.0;
  for (int j = 0; j < 64; ++j) {
    double gj = sign * std::pow(pi, 2 * j + 1) / gamma_fn(2.0 * j + 2.0);
    double betaj = (53.0 + 16.0 * j) / 6.0;
    double xij = (47.0 + 16.0 * j) / 6.0;
    double c = gj * gamma_fn(betaj) / gamma_fn(betaj - nu);
    s.emplace_back(c, xij - nu);
    if (std::abs(c) < 1e-18) break;
    sign = -sign;
  }
  return s;
}

inline double sine_exact(double t) {
  if (t <= 0.0) return 0.0;
  return std::pow(t, 6.5) * std::sin(std::numbers::pi * std::pow(t, 4.0 / 3.0));
}

inline double series_value(const std::vector<std::pair<double, double>>& s, double t) {
  if (t <= 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& [c, e] : s) acc += c * std::pow(t, e);
  return acc;
}

inline void reject_unknown_params(const std::map<std::string, double>& given,
                                  std::initializer_list<const char*> allowed,
                                  const std::string& which) {
  for (const auto& [k, v] : given) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return k == a; }) == allowed.end()) {
      throw config_error("unknown parameter '" + k + "' for builtin " + which);
    }
  }
}

} // namespace detail

/// The benchmark problems with their printed defaults.
inline FDDEProblem make_builtin(BuiltinId id, const BuiltinOptions& opt = {}) {
  FDDEProblem p;
  auto param = [&](const char* key, double dflt) {
    auto it = opt.params.find(key);
    return it == opt.params.end() ? dflt : it->second;
  };

  switch (id) {
    case BuiltinId::Ex1CaseI:
    case BuiltinId::Ex1CaseII: {
      detail::reject_unknown_params(opt.params, {}, "ex1");
      if (opt.nu1) throw config_error("ex1 has no auxiliary fractional term");
      double nu = opt.nu.value_or(0.1);
      double tau = opt.tau.value_or(0.5);
      p.name = id == BuiltinId::Ex1CaseI ? "ex1-case-i" : "ex1-case-ii";
      p.tau = tau;
      p.horizon = opt.horizon.value_or(1.0);
      p.terms = {{1.0, FractionalOrder(nu)}};
      p.A = {1.0}; // the +u(t) term
      p.history = constant_history(0.0);
      if (id == BuiltinId::Ex1CaseI) {
        double g10 = gamma_fn(11.0) / gamma_fn(11.0 - nu);
        p.rhs = [g10, nu, tau](double t, double, double ud) {
          double h = g10 * std::pow(t, 10.0 - nu) + std::pow(t, 10.0);
          if (t > tau) h += std::pow(t - tau, 10.0);
          return h - ud;
        };
        p.exact = TimeFunction{[](double t, int) { return t <= 0.0 ? 0.0 : std::pow(t, 10.0); }};
      } else {
        auto series = detail::sine_series_caputo(nu);
        p.rhs = [series, tau](double t, double, double ud) {
          double h = detail::series_value(series, t) + detail::sine_exact(t);
          if (t > tau) h += detail::sine_exact(t - tau);
          return h - ud;
        };
        p.exact = TimeFunction{[](double t, int) { return detail::sine_exact(t); }};
      }
      break;
    }
    case BuiltinId::Ex2CaseI:
    case BuiltinId::Ex2CaseII: {
      detail::reject_unknown_params(opt.params, {}, "ex2");
      if (opt.nu1) throw config_error("ex2 has no auxiliary fractional term");
      double nu = opt.nu.value_or(0.1);
      double tau = opt.tau.value_or(0.5);
      p.name = id == BuiltinId::Ex2CaseI ? "ex2-case-i" : "ex2-case-ii";
      p.tau = tau;
      p.horizon = opt.horizon.value_or(1.0);
      p.terms = {{1.0, FractionalOrder(nu)}};
      p.history = constant_history(0.0);
      const bool case_i = id == BuiltinId::Ex2CaseI;
      auto coeff = case_i ? std::function<double(double)>([](double t) { return t * t - t * t * t; })
                          : std::function<double(double)>(
                                [](double t) { return std::sin(std::numbers::pi * t); });
      if (case_i) {
        double g10 = gamma_fn(11.0) / gamma_fn(11.0 - nu);
        p.rhs = [g10, nu, tau, coeff](double t, double u, double ud) {
          double uex = t <= 0.0 ? 0.0 : std::pow(t, 10.0);
          double uexd = t - tau <= 0.0 ? 0.0 : std::pow(t - tau, 10.0);
          double h = g10 * std::pow(t, 10.0 - nu) + coeff(t) * (uex + uexd);
          return h - coeff(t) * u - coeff(t) * ud;
        };
        p.exact = TimeFunction{[](double t, int) { return t <= 0.0 ? 0.0 : std::pow(t, 10.0); }};
      } else {
        auto series = detail::sine_series_caputo(nu);
        p.rhs = [series, tau, coeff](double t, double u, double ud) {
          double h = detail::series_value(series, t) +
                     coeff(t) * (detail::sine_exact(t) + detail::sine_exact(t - tau));
          return h - coeff(t) * u - coeff(t) * ud;
        };
        p.exact = TimeFunction{[](double t, int) { return detail::sine_exact(t); }};
      }
      break;
    }
    case BuiltinId::Houseflies: {
      detail::reject_unknown_params(opt.params, {"c", "k", "d", "z"}, "houseflies");
      if (opt.nu1) throw config_error("houseflies has no auxiliary fractional term");
      double c = param("c", 1.81), k = param("k", 0.5107), d = param("d", 0.147),
             z = param("z", 0.000226);
      double tau = opt.tau.value_or(3.0);
      p.name = "houseflies";
      p.tau = tau;
      p.horizon = opt.horizon.value_or(2.0 * tau);
      p.terms = {{1.0, FractionalOrder(opt.nu.value_or(1.0))}};
      p.A = {d}; // the +d u(t) term
      p.history = constant_history(160.0);
      p.rhs = [c, k, z](double, double, double ud) { return c * ud * (k - c * z * ud); };
      break;
    }
    case BuiltinId::LaserNoise: {
      detail::reject_unknown_params(opt.params, {"eps"}, "laser-noise");
      if (opt.nu1) throw config_error("laser-noise has no auxiliary fractional term");
      double eps = param("eps", 0.1);
      if (eps == 0.0) throw config_error("laser-noise: eps must be nonzero");
      double tau = opt.tau.value_or(1.0);
      p.name = "laser-noise";
      p.tau = tau;
      p.horizon = opt.horizon.value_or(2.0 * tau);
      p.terms = {{1.0, FractionalOrder(opt.nu.value_or(1.0))}};
      p.A = {1.0 / eps}; // the +(1/eps) u(t) term
      p.history = constant_history(0.9);
      p.rhs = [eps](double, double u, double ud) { return (1.0 / eps) * u * ud; };
      break;
    }
    case BuiltinId::FracBVP: {
      detail::reject_unknown_params(opt.params, {"delta", "mu", "q", "gamma"}, "frac-bvp");
      double delta = param("delta", 0.3), mu = param("mu", 1.0), q = param("q", 0.4),
             gamma = param("gamma", 0.2);
      double nu = opt.nu.value_or(2.0);
      double nu1 = opt.nu1.value_or(1.0);
      if (!(nu1 < nu)) throw config_error("frac-bvp: nu1 must be below nu");
      p.name = "frac-bvp";
      p.tau = opt.tau.value_or(5.0);
      p.horizon = opt.horizon.value_or(1.0);
      p.terms = {{delta, FractionalOrder(nu1)}, {1.0, FractionalOrder(nu)}};
      p.A = {1.0}; // the +u(t) term
      p.history = constant_history(1.0);
      p.rhs = [mu, q, gamma](double, double u, double ud) {
        return mu * q * q / (u * u * u) * (u - gamma * ud);
      };
      p.extra_constraints = {{1.0, 0, 3.0}};
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Problem files: line-oriented key = value with [sections].
// ---------------------------------------------------------------------------

struct problem_parse_error : std::runtime_error {
  int line;
  int column;
  problem_parse_error(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " (line " + std::to_string(l) + ", column " + std::to_string(c) +
                           ")"),
        line(l), column(c) {}
};

/// Expression syntax error inside a problem file (distinct from structural
/// errors for the CLI exit-code contract).
struct file_expr_error : problem_parse_error {
  using problem_parse_error::problem_parse_error;
};

/// Parsed, normalized view of a problem file (kept for `check` output).
struct ProblemFile {
  double nu = 0.0;
  std::vector<std::pair<double, double>> aux_terms; // (lambda, nu_p)
  std::vector<double> A;
  double tau = 0.0;
  std::optional<double> horizon;
  std::string rhs_src;
  std::string history_src;
  std::vector<FDDEProblem::PointConstraint> constraints;
  std::optional<std::string> exact_src;
  std::map<std::string, double> constants;

  Expr rhs_expr;
  Expr history_expr;
  std::optional<Expr> exact_expr;
};

namespace detail {

struct FileLine {
  int number;
  std::string section;
  std::string key;
  std::string value;
  int value_column; // 1-based column where the value starts
};

inline std::vector<FileLine> split_problem_lines(const std::string& text) {
  std::vector<FileLine> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    auto b = std::find_if(line.begin(), line.end(), notspace);
    if (b == line.end()) continue;
    auto e = std::find_if(line.rbegin(), line.rend(), notspace).base();
    std::string trimmed(b, e);
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']') {
        throw problem_parse_error("unterminated section header", lineno, 1);
      }
      section = trimmed.substr(1, trimmed.size() - 2);
      continue;
    }
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw problem_parse_error("expected key = value", lineno, int(b - line.begin()) + 1);
    }
    FileLine fl;
    fl.number = lineno;
    fl.section = section;
    fl.key = trimmed.substr(0, eq);
    while (!fl.key.empty() && std::isspace(static_cast<unsigned char>(fl.key.back()))) {
      fl.key.pop_back();
    }
    std::size_t vstart = eq + 1;
    while (vstart < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[vstart]))) {
      ++vstart;
    }
    fl.value = trimmed.substr(vstart);
    fl.value_column = int(b - line.begin()) + int(vstart) + 1;
    if (fl.value.empty()) {
      throw problem_parse_error("empty value for key '" + fl.key + "'", lineno, fl.value_column);
    }
    out.push_back(std::move(fl));
  }
  return out;
}

inline double parse_double_field(const FileLine& fl) {
  try {
    std::size_t used = 0;
    double v = std::stod(fl.value, &used);
    if (used != fl.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw problem_parse_error("malformed number '" + fl.value + "' for key '" + fl.key + "'",
                              fl.number, fl.value_column);
  }
}

inline std::vector<double> parse_double_list(const FileLine& fl) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(fl.value);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw problem_parse_error("malformed number '" + item + "' in list for key '" + fl.key + "'",
                                fl.number, fl.value_column);
    }
  }
  return out;
}

/// "lambda=0.3 nu=1.0" (order-insensitive)
inline std::pair<double, double> parse_term_field(const FileLine& fl) {
  std::optional<double> lambda, nu;
  std::istringstream ss(fl.value);
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw problem_parse_error("expected lambda=<x> nu=<y> in term", fl.number, fl.value_column);
    }
    std::string k = tok.substr(0, eq);
    double v;
    try {
      v = std::stod(tok.substr(eq + 1));
    } catch (const std::exception&) {
      throw problem_parse_error("malformed number in term '" + tok + "'", fl.number,
                                fl.value_column);
    }
    if (k == "lambda") lambda = v;
    else if (k == "nu") nu = v;
    else {
      throw problem_parse_error("unknown term field '" + k + "'", fl.number, fl.value_column);
    }
  }
  if (!lambda || !nu) {
    throw problem_parse_error("term needs both lambda= and nu=", fl.number, fl.value_column);
  }
  return {*lambda, *nu};
}

/// "point=1.0 order=0 value=3.0"
inline FDDEProblem::PointConstraint parse_constraint_field(const FileLine& fl) {
  FDDEProblem::PointConstraint c;
  bool have_point = false, have_value = false;
  std::istringstream ss(fl.value);
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw problem_parse_error("expected point=<t> order=<m> value=<v>", fl.number,
                                fl.value_column);
    }
    std::string k = tok.substr(0, eq);
    double v;
    try {
      v = std::stod(tok.substr(eq + 1));
    } catch (const std::exception&) {
      throw problem_parse_error("malformed number in constraint '" + tok + "'", fl.number,
                                fl.value_column);
    }
    if (k == "point") { c.point = v; have_point = true; }
    else if (k == "order") c.derivative_order = int(v);
    else if (k == "value") { c.value = v; have_value = true; }
    else {
      throw problem_parse_error("unknown constraint field '" + k + "'", fl.number,
                                fl.value_column);
    }
  }
  if (!have_point || !have_value) {
    throw problem_parse_error("constraint needs point= and value=", fl.number, fl.value_column);
  }
  return c;
}

inline Expr parse_expr_field(const FileLine& fl, const std::map<std::string, double>& constants) {
  try {
    return Expr::parse(fl.value, constants);
  } catch (const expr_error& e) {
    throw file_expr_error(e.what(), fl.number, fl.value_column + int(e.offset));
  }
}

} // namespace detail

inline ProblemFile parse_problem_file(const std::string& text) {
  ProblemFile pf;
  auto lines = detail::split_problem_lines(text);

  for (const auto& fl : lines) { // constants first: they bind into expressions
    if (fl.section == "constants") pf.constants[fl.key] = detail::parse_double_field(fl);
  }

  bool have_nu = false, have_tau = false, have_rhs = false, have_phi = false;
  for (const auto& fl : lines) {
    if (fl.section == "problem") {
      if (fl.key == "nu") { pf.nu = detail::parse_double_field(fl); have_nu = true; }
      else if (fl.key == "term") pf.aux_terms.push_back(detail::parse_term_field(fl));
      else if (fl.key == "A") pf.A = detail::parse_double_list(fl);
      else if (fl.key == "tau") { pf.tau = detail::parse_double_field(fl); have_tau = true; }
      else if (fl.key == "horizon") pf.horizon = detail::parse_double_field(fl);
      else {
        throw problem_parse_error("unknown key '" + fl.key + "' in [problem]", fl.number, 1);
      }
    } else if (fl.section == "rhs") {
      if (fl.key != "f") throw problem_parse_error("expected f = <expr> in [rhs]", fl.number, 1);
      pf.rhs_src = fl.value;
      pf.rhs_expr = detail::parse_expr_field(fl, pf.constants);
      have_rhs = true;
    } else if (fl.section == "history") {
      if (fl.key != "phi") {
        throw problem_parse_error("expected phi = <expr> in [history]", fl.number, 1);
      }
      pf.history_src = fl.value;
      pf.history_expr = detail::parse_expr_field(fl, pf.constants);
      have_phi = true;
    } else if (fl.section == "constraints") {
      // lines read either `point=.. order=.. value=..` or `constraint = point=..`
      detail::FileLine entry = fl;
      if (fl.key != "constraint") entry.value = fl.key + "=" + fl.value;
      pf.constraints.push_back(detail::parse_constraint_field(entry));
    } else if (fl.section == "exact") {
      if (fl.key != "u") throw problem_parse_error("expected u = <expr> in [exact]", fl.number, 1);
      pf.exact_src = fl.value;
      pf.exact_expr = detail::parse_expr_field(fl, pf.constants);
    } else if (fl.section == "constants") {
      // handled above
    } else {
      throw problem_parse_error("unknown section [" + fl.section + "]", fl.number, 1);
    }
  }
  if (!have_nu) throw problem_parse_error("[problem] nu is required", 1, 1);
  if (!have_tau) throw problem_parse_error("[problem] tau is required", 1, 1);
  if (!have_rhs) throw problem_parse_error("[rhs] f is required", 1, 1);
  if (!have_phi) throw problem_parse_error("[history] phi is required", 1, 1);

  if (pf.history_expr.uses(Expr::Kind::VarU) || pf.history_expr.uses(Expr::Kind::VarUd)) {
    throw problem_parse_error("[history] phi must depend on t only", 1, 1);
  }
  return pf;
}

/// Lower a parsed file into a solvable problem.
inline FDDEProblem problem_from_file(const ProblemFile& pf, const std::string& name = "file") {
  FDDEProblem p;
  p.name = name;
  p.tau = pf.tau;
  p.horizon = pf.horizon.value_or(pf.tau);

  auto aux = pf.aux_terms;
  std::sort(aux.begin(), aux.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [lambda, nup] : aux) {
    if (!(nup < pf.nu)) throw config_error("auxiliary order nu_p must be below the leading nu");
    p.terms.push_back({lambda, FractionalOrder(nup)});
  }
  for (std::size_t i = 1; i < p.terms.size(); ++i) {
    if (!(p.terms[i - 1].order.nu < p.terms[i].order.nu)) {
      throw config_error("auxiliary fractional orders must be strictly increasing");
    }
  }
  p.terms.push_back({1.0, FractionalOrder(pf.nu)});

  p.A = pf.A;
  while (!p.A.empty() && p.A.back() == 0.0) p.A.pop_back();

  Expr rhs = pf.rhs_expr;
  p.rhs = [rhs](double t, double u, double ud) { return rhs.eval(t, u, ud); };

  // history with analytic derivatives, extended on demand up to mu
  auto derivs = std::make_shared<std::vector<Expr>>();
  derivs->push_back(pf.history_expr);
  const int max_order = std::max(p.mu(), 1);
  for (int j = 1; j <= max_order; ++j) derivs->push_back((*derivs)[j - 1].derivative());
  p.history = TimeFunction{[derivs](double t, int order) {
    if (order >= int(derivs->size())) {
      throw std::out_of_range("history derivative order " + std::to_string(order) +
                              " not available");
    }
    return (*derivs)[order].eval(t);
  }};

  p.extra_constraints = pf.constraints;
  if (pf.exact_expr) {
    Expr ex = *pf.exact_expr;
    p.exact = TimeFunction{[ex](double t, int) { return ex.eval(t); }};
  }
  return p;
}

/// Normalized echo of a parsed problem file (the `check` verb).
inline std::string format_problem_file(const ProblemFile& pf) {
  std::ostringstream os;
  os << "[problem]\n";
  os << "nu = " << pf.nu << "\n";
  for (const auto& [lambda, nup] : pf.aux_terms) {
    os << "term = lambda=" << lambda << " nu=" << nup << "\n";
  }
  if (!pf.A.empty()) {
    os << "A = ";
    for (std::size_t i = 0; i < pf.A.size(); ++i) os << (i ? ", " : "") << pf.A[i];
    os << "\n";
  }
  os << "tau = " << pf.tau << "\n";
  if (pf.horizon) os << "horizon = " << *pf.horizon << "\n";
  os << "[rhs]\nf = " << pf.rhs_expr.str() << "\n";
  os << "[history]\nphi = " << pf.history_expr.str() << "\n";
  if (!pf.constraints.empty()) {
    os << "[constraints]\n";
    for (const auto& c : pf.constraints) {
      os << "constraint = point=" << c.point << " order=" << c.derivative_order
         << " value=" << c.value << "\n";
    }
  }
  if (pf.exact_expr) os << "[exact]\nu = " << pf.exact_expr->str() << "\n";
  if (!pf.constants.empty()) {
    os << "[constants]\n";
    for (const auto& [k, v] : pf.constants) os << k << " = " << v << "\n";
  }
  return os.str();
}

} // namespace fdde

#endif
