// Command-line harness: solve benchmark or user problems, sweep N/nu grids,
// emit time-response, phase-plane and convergence tables as CSV/JSON.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdde/fdde.hpp"

namespace {

struct Options {
  std::string problem;
  std::string basis = "legendre";
  std::string method = "fixed-point";
  std::string memory = "global";
  std::string node_drop = "constrained";
  std::string format = "csv";
  std::string out;
  bool phase = false;
  int samples = 401;
  std::vector<int> n_values{15};
  std::vector<double> nu_values;
  double nu1 = std::nan("");
  double tau = std::nan("");
  double horizon = std::nan("");
  double tol = 1e-15;
  double damping = 1.0;
  int max_iter = 500;
  std::vector<std::string> params;
};

fdde::RunConfig run_config(const Options& o) {
  fdde::RunConfig cfg;
  cfg.family = o.basis == "chebyshev" ? fdde::BasisFamily::Chebyshev : fdde::BasisFamily::Legendre;
  cfg.N = o.n_values.front();
  cfg.solver.method = o.method == "newton" ? fdde::SolverConfig::Method::Newton
                                           : fdde::SolverConfig::Method::FixedPoint;
  cfg.solver.tol = o.tol;
  cfg.solver.damping = o.damping;
  cfg.solver.max_iter = o.max_iter;
  cfg.memory = o.memory == "local" ? fdde::MemoryMode::Local : fdde::MemoryMode::Global;
  cfg.drop = o.node_drop == "high" ? fdde::NodeDrop::HighEnd : fdde::NodeDrop::Constrained;
  cfg.samples = o.samples;
  return cfg;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw fdde::config_error("--param expects key=value, got '" + kv + "'");
    }
    try {
      out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw fdde::config_error("--param has a malformed number in '" + kv + "'");
    }
  }
  return out;
}

fdde::FDDEProblem resolve_problem(const Options& o, std::optional<double> nu_override) {
  if (auto id = fdde::builtin_by_name(o.problem)) {
    fdde::BuiltinOptions bo;
    bo.params = parse_params(o.params);
    if (nu_override) bo.nu = *nu_override;
    if (!std::isnan(o.nu1)) bo.nu1 = o.nu1;
    if (!std::isnan(o.tau)) bo.tau = o.tau;
    if (!std::isnan(o.horizon)) bo.horizon = o.horizon;
    return fdde::make_builtin(*id, bo);
  }
  std::ifstream f(o.problem);
  if (!f) throw fdde::config_error("unknown builtin or unreadable problem file: " + o.problem);
  std::stringstream ss;
  ss << f.rdbuf();
  fdde::ProblemFile pf = fdde::parse_problem_file(ss.str());
  fdde::FDDEProblem p = fdde::problem_from_file(pf, o.problem);
  if (nu_override) p.terms.back().order = fdde::FractionalOrder(*nu_override);
  if (!std::isnan(o.nu1)) {
    if (p.terms.size() != 2) {
      throw fdde::config_error("--nu1 needs a problem with exactly one auxiliary term");
    }
    p.terms.front().order = fdde::FractionalOrder(o.nu1);
  }
  if (!std::isnan(o.tau)) p.tau = o.tau;
  if (!std::isnan(o.horizon)) p.horizon = o.horizon;
  return p;
}

void write_text_artifact(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fdde::config_error("cannot open output file: " + path);
  f << content;
}

std::string phase_path_for(const std::string& out) {
  if (out.empty()) return "phase.csv";
  auto dot = out.find_last_of('.');
  if (dot == std::string::npos) return out + ".phase.csv";
  return out.substr(0, dot) + ".phase" + out.substr(dot);
}

int cmd_solve(const Options& o) {
  fdde::FDDEProblem problem =
      resolve_problem(o, o.nu_values.empty() ? std::nullopt : std::optional(o.nu_values.front()));
  fdde::RunConfig cfg = run_config(o);
  fdde::RunResult r = fdde::run(problem, cfg);

  std::ostringstream response;
  fdde::write_response_csv(response, r.solution,
                           problem.exact ? std::optional(*problem.exact) : std::nullopt,
                           cfg.samples);
  if (o.out.empty()) {
    std::cout << response.str();
  } else {
    write_text_artifact(o.out, response.str());
  }
  if (o.phase) {
    std::ostringstream phase;
    fdde::write_phase_csv(phase, r.solution, cfg.samples);
    write_text_artifact(phase_path_for(o.out), phase.str());
  }
  if (o.format == "json") {
    std::cout << fdde::report_to_json(r.report).dump(2) << "\n";
  } else {
    std::cout << fdde::report_to_text(r.report);
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  const bool nu_sweep = o.nu_values.size() > 1;
  if (nu_sweep && o.n_values.size() > 1) {
    throw fdde::config_error("sweep over one grid at a time: give a list for --N or --nu");
  }
  fdde::RunConfig cfg = run_config(o);
  std::string csv;
  if (nu_sweep) {
    csv = fdde::sweep_over_nu([&](double nu) { return resolve_problem(o, nu); }, cfg,
                              o.nu_values);
  } else {
    fdde::FDDEProblem problem =
        resolve_problem(o, o.nu_values.empty() ? std::nullopt : std::optional(o.nu_values.front()));
    csv = fdde::sweep_over_N(problem, cfg, o.n_values);
  }
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text_artifact(o.out, csv);
  }
  return 0;
}

int cmd_check(const Options& o) {
  std::ifstream f(o.problem);
  if (!f) throw fdde::config_error("cannot open problem file: " + o.problem);
  std::stringstream ss;
  ss << f.rdbuf();
  fdde::ProblemFile pf = fdde::parse_problem_file(ss.str());
  fdde::problem_from_file(pf, o.problem); // full structural validation
  std::cout << fdde::format_problem_file(pf);
  return 0;
}

int cmd_list_builtins() {
  static const std::vector<std::pair<std::string, std::string>> rows = {
      {"ex1-case-i", "forced linear FDDE, exact solution t^10"},
      {"ex1-case-ii", "forced linear FDDE, exact solution t^(13/2) sin(pi t^(4/3))"},
      {"ex2-case-i", "variable-coefficient forced FDDE, exact solution t^10"},
      {"ex2-case-ii", "variable-coefficient forced FDDE, exact t^(13/2) sin(pi t^(4/3))"},
      {"houseflies", "population model, quadratic delay term, phi = 160"},
      {"laser-noise", "light-noise model, u*u(t-tau) term, phi = 0.9"},
      {"frac-bvp", "two-term fractional boundary-value problem, u(0)=1, u(1)=3"},
  };
  for (const auto& [name, desc] : rows) std::cout << name << "  -  " << desc << "\n";
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool needs_problem) {
  auto* po = cmd->add_option("--problem", o.problem, "builtin name or problem file path");
  if (needs_problem) po->required();
  cmd->add_option("--basis", o.basis, "basis family")
      ->check(CLI::IsMember({"legendre", "chebyshev"}));
  cmd->add_option("--N", o.n_values, "truncation order (sweep: comma list)")
      ->delimiter(',');
  cmd->add_option("--nu", o.nu_values, "leading Caputo order (sweep: comma list)")
      ->delimiter(',');
  cmd->add_option("--nu1", o.nu1, "auxiliary fractional order");
  cmd->add_option("--tau", o.tau, "delay");
  cmd->add_option("--horizon", o.horizon, "final time T");
  cmd->add_option("--method", o.method, "nonlinear solver")
      ->check(CLI::IsMember({"fixed-point", "newton"}));
  cmd->add_option("--tol", o.tol, "update-norm stopping tolerance");
  cmd->add_option("--damping", o.damping, "initial damping factor");
  cmd->add_option("--max-iter", o.max_iter, "iteration cap per step");
  cmd->add_option("--memory", o.memory, "fractional memory across steps")
      ->check(CLI::IsMember({"global", "local"}));
  cmd->add_option("--node-drop", o.node_drop, "collocation node selection")
      ->check(CLI::IsMember({"constrained", "high"}));
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--phase", o.phase, "also write the phase-plane table");
  cmd->add_option("--samples", o.samples, "time-response sample count");
  cmd->add_option("--param", o.params, "builtin parameter override key=value")
      ->allow_extra_args(false);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral steps-collocation solver for fractional delay differential equations"};
  app.require_subcommand(1);
  Options o;

  CLI::App* solve = app.add_subcommand("solve", "solve one problem and report errors");
  add_common(solve, o, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of N or nu values");
  add_common(sweep, o, true);
  CLI::App* check = app.add_subcommand("check", "parse a problem file and print it normalized");
  check->add_option("--problem", o.problem, "problem file path")->required();
  app.add_subcommand("list-builtins", "list builtin problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (check->parsed()) return cmd_check(o);
    return cmd_list_builtins();
  } catch (const fdde::file_expr_error& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return 4;
  } catch (const fdde::expr_error& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return 4;
  } catch (const fdde::problem_parse_error& e) {
    std::cerr << "problem file error: " << e.what() << "\n";
    return 2;
  } catch (const fdde::solver_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    if (!e.residual_history.empty()) {
      std::cerr << "residual history:";
      for (double r : e.residual_history) std::cerr << ' ' << r;
      std::cerr << "\n";
    }
    return 3;
  } catch (const fdde::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
