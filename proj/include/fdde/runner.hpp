#ifndef FDDE_RUNNER_HPP
#define FDDE_RUNNER_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdde/problems.hpp"
#include "fdde/stepper.hpp"

namespace fdde {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  BasisFamily family = BasisFamily::Legendre;
  int N = 15;
  SolverConfig solver;
  MemoryMode memory = MemoryMode::Global;
  NodeDrop drop = NodeDrop::Constrained;
  int samples = 401;

  void validate(int mu) const {
    if (N < mu + 1) {
      throw config_error("N = " + std::to_string(N) + " is below mu + 1 = " +
                         std::to_string(mu + 1));
    }
    if (samples < 2) throw config_error("sample count must be at least 2");
  }
};

struct ErrorReport {
  std::optional<double> l2_error;
  std::optional<double> max_abs_error;
  std::vector<int> iterations;          // per step
  std::vector<double> step_residuals;   // per step, final residual max-norm
  double wall_clock_seconds = 0.0;
  double max_knot_mismatch = 0.0;
};

struct RunResult {
  PiecewiseSolution solution;
  ErrorReport report;
};

/// Unweighted L2 norm of (u_N - exact) over the solved domain, by
/// per-step Legendre-Lobatto quadrature of order 4N.
inline double l2_error(const PiecewiseSolution& ps, const TimeFunction& exact) {
  double acc = 0.0;
  double t0 = 0.0;
  for (std::size_t i = 0; i < ps.steps.size(); ++i) {
    const int N = int(ps.steps[i].coeffs.size()) - 1;
    QuadratureRule rule = legendre_lobatto(0.0, ps.lengths[i], 4 * N);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      double d = eval_solution(ps.steps[i], 0, rule.nodes[j]) - exact(t0 + rule.nodes[j], 0);
      acc += rule.weights[j] * d * d;
    }
    t0 += ps.lengths[i];
  }
  return std::sqrt(acc);
}

inline double max_abs_error(const PiecewiseSolution& ps, const TimeFunction& exact, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double t = ps.horizon * i / double(samples - 1);
    worst = std::max(worst, std::abs(ps.eval(t, 0) - exact(t, 0)));
  }
  return worst;
}

inline RunResult run(const FDDEProblem& problem, const RunConfig& cfg) {
  cfg.validate(problem.mu());
  auto [ps, rep] = solve(problem, cfg.family, cfg.N, cfg.solver, cfg.memory, cfg.drop);
  RunResult out{std::move(ps), {}};
  for (const auto& s : rep.steps) {
    out.report.iterations.push_back(s.iterations);
    out.report.step_residuals.push_back(s.final_residual_norm);
  }
  out.report.wall_clock_seconds = rep.wall_seconds;
  out.report.max_knot_mismatch = rep.max_knot_mismatch;
  if (problem.exact) {
    out.report.l2_error = l2_error(out.solution, *problem.exact);
    out.report.max_abs_error = max_abs_error(out.solution, *problem.exact, cfg.samples);
  }
  return out;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace detail

/// Time-response table: t, u_N(t) and, when the exact solution is known,
/// u(t) and |error|.
inline void write_response_csv(std::ostream& os, const PiecewiseSolution& ps,
                               const std::optional<TimeFunction>& exact, int samples) {
  os << "t,u";
  if (exact) os << ",exact,abs_error";
  os << "\n";
  for (int i = 0; i < samples; ++i) {
    double t = ps.horizon * i / double(samples - 1);
    double u = ps.eval(t, 0);
    os << detail::fmt17(t) << ',' << detail::fmt17(u);
    if (exact) {
      double e = (*exact)(t, 0);
      os << ',' << detail::fmt17(e) << ',' << detail::fmt17(std::abs(u - e));
    }
    os << "\n";
  }
}

/// Phase-plane table: t, u(t), u(t - tau).
inline void write_phase_csv(std::ostream& os, const PiecewiseSolution& ps, int samples) {
  os << "t,u,u_lag\n";
  for (int i = 0; i < samples; ++i) {
    double t = ps.horizon * i / double(samples - 1);
    auto [u, ulag] = ps.lag_trace(t);
    os << detail::fmt17(t) << ',' << detail::fmt17(u) << ',' << detail::fmt17(ulag) << "\n";
  }
}

inline nlohmann::json report_to_json(const ErrorReport& r) {
  nlohmann::json j;
  if (r.l2_error) j["l2_error"] = *r.l2_error;
  if (r.max_abs_error) j["max_abs_error"] = *r.max_abs_error;
  j["iterations"] = r.iterations;
  j["step_residuals"] = r.step_residuals;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  j["max_knot_mismatch"] = r.max_knot_mismatch;
  return j;
}

inline std::string report_to_text(const ErrorReport& r) {
  std::ostringstream os;
  if (r.l2_error) os << "l2_error = " << detail::fmt17(*r.l2_error) << "\n";
  if (r.max_abs_error) os << "max_abs_error = " << detail::fmt17(*r.max_abs_error) << "\n";
  os << "iterations =";
  for (int it : r.iterations) os << ' ' << it;
  os << "\nstep_residuals =";
  for (double v : r.step_residuals) os << ' ' << detail::fmt17(v);
  os << "\nmax_knot_mismatch = " << detail::fmt17(r.max_knot_mismatch) << "\n";
  os << "wall_clock_seconds = " << detail::fmt17(r.wall_clock_seconds) << "\n";
  return os.str();
}

/// Error-vs-N table (the layout behind the convergence tables and the
/// log-MAE curves). Per-row solver failures are recorded in the row.
inline std::string sweep_over_N(const FDDEProblem& problem, RunConfig cfg,
                                const std::vector<int>& n_values) {
  if (n_values.empty()) throw config_error("sweep: empty N list");
  std::ostringstream os;
  os << "N,l2_error,log10_l2_error,max_abs_error,total_iterations,wall_clock_seconds,status\n";
  for (int n : n_values) {
    cfg.N = n;
    os << n << ',';
    try {
      RunResult r = run(problem, cfg);
      int its = 0;
      for (int k : r.report.iterations) its += k;
      if (r.report.l2_error) {
        os << detail::fmt17(*r.report.l2_error) << ','
           << detail::fmt17(std::log10(*r.report.l2_error)) << ',';
      } else {
        os << "nan,nan,";
      }
      os << (r.report.max_abs_error ? detail::fmt17(*r.report.max_abs_error) : "nan") << ','
         << its << ',' << detail::fmt17(r.report.wall_clock_seconds) << ",ok\n";
    } catch (const solver_error& e) {
      os << "nan,nan,nan,0,0,\"" << e.what() << "\"\n";
    }
  }
  return os.str();
}

/// Solution-value table over a nu grid (wide layout: one value column per
/// nu, rows on the sample grid, matching how the tables print u at fixed t).
inline std::string sweep_over_nu(const std::function<FDDEProblem(double)>& factory, RunConfig cfg,
                                 const std::vector<double>& nu_values) {
  if (nu_values.empty()) throw config_error("sweep: empty nu list");
  std::vector<std::optional<PiecewiseSolution>> solutions;
  std::vector<std::string> errors(nu_values.size());
  double horizon = 0.0;
  for (std::size_t i = 0; i < nu_values.size(); ++i) {
    try {
      FDDEProblem p = factory(nu_values[i]);
      RunResult r = run(p, cfg);
      horizon = r.solution.horizon;
      solutions.emplace_back(std::move(r.solution));
    } catch (const solver_error& e) {
      solutions.emplace_back(std::nullopt);
      errors[i] = e.what();
    }
  }
  std::ostringstream os;
  os << "t";
  for (double nu : nu_values) os << ",u_nu_" << detail::fmt17(nu);
  os << "\n";
  for (int i = 0; i < cfg.samples; ++i) {
    double t = horizon * i / double(cfg.samples - 1);
    os << detail::fmt17(t);
    for (const auto& sol : solutions) {
      os << ',' << (sol ? detail::fmt17(sol->eval(t, 0)) : "nan");
    }
    os << "\n";
  }
  for (std::size_t i = 0; i < nu_values.size(); ++i) {
    if (!errors[i].empty()) {
      os << "# nu=" << detail::fmt17(nu_values[i]) << " failed: " << errors[i] << "\n";
    }
  }
  return os.str();
}

} // namespace fdde

#endif
