#ifndef FDDE_COLLOCATION_HPP
#define FDDE_COLLOCATION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdde/caputo.hpp"
#include "fdde/expr.hpp"
#include "fdde/quadrature.hpp"

namespace fdde {

struct solver_error : std::runtime_error {
  std::vector<double> residual_history;
  explicit solver_error(const std::string& msg, std::vector<double> history = {})
      : std::runtime_error(msg), residual_history(std::move(history)) {}
};

/// One delay-free step: sum_j A_j u^(j) + sum_p lambda_p D^{nu_p} u = f(t, u, u_lag)
/// on [0, tau_step], closed by mu = max(m, n) constraint rows.
struct StepProblem {
  struct FracTerm {
    double lambda = 1.0;
    FractionalOrder order;
  };
  struct Constraint {
    double point = 0.0;
    int derivative_order = 0;
    double value = 0.0;
  };

  BasisSpec basis; // [0, tau_step]
  int N = 0;
  std::vector<double> A;        // A_0..A_n; may be empty
  std::vector<FracTerm> terms;  // ascending orders; leading term (lambda 1, nu) last
  std::function<double(double, double, double)> rhs;  // f(t_local, u, u_lag)
  std::function<double(double)> lag;                  // u_lag(t_local)
  std::function<double(double)> known;                // known forcing added to the left side
  std::vector<Constraint> constraints;

  int integer_order() const { return A.empty() ? 0 : int(A.size()) - 1; }
  double leading_nu() const {
    double nu = 0.0;
    for (const auto& t : terms) nu = std::max(nu, t.order.nu);
    return nu;
  }
  int mu() const { return std::max(int(std::ceil(leading_nu())), integer_order()); }

  void validate() const {
    if (terms.empty()) throw std::invalid_argument("StepProblem: no differential terms");
    for (std::size_t p = 0; p < terms.size(); ++p) {
      for (std::size_t q = p + 1; q < terms.size(); ++q) {
        if (terms[p].order.nu == terms[q].order.nu) {
          throw std::invalid_argument("StepProblem: fractional orders must be distinct");
        }
      }
    }
    if (!A.empty() && A.back() == 0.0) {
      throw std::invalid_argument("StepProblem: leading integer coefficient A_n must be nonzero");
    }
    if (int(constraints.size()) != mu()) {
      throw std::invalid_argument("StepProblem: expected mu = " + std::to_string(mu()) +
                                  " constraints, got " + std::to_string(constraints.size()));
    }
    if (N < mu() + 1) throw std::invalid_argument("StepProblem: N must be at least mu + 1");
  }
};

struct SolverConfig {
  enum class Method { FixedPoint, Newton };
  Method method = Method::FixedPoint;
  double tol = 1e-15;    // max-norm of the damped update, relative to max(1, |a|_inf)
  int max_iter = 500;
  double damping = 1.0;
  double fd_step = 1e-7; // Newton Jacobian columns
};

/// Which residual nodes to keep when mu rows go to constraints.
/// Constrained: drop nodes adjacent to constrained endpoints (default).
/// HighEnd: drop the highest-index nodes instead.
enum class NodeDrop { Constrained, HighEnd };

struct IterationReport {
  int iterations = 0;
  double final_update_norm = 0.0;
  double final_residual_norm = 0.0;
  double damping_used = 1.0;
  std::vector<double> residual_history;
};

/// Matrices shared by the residual and both solvers.
struct StepOperators {
  QuadratureRule rule;
  std::vector<double> colloc;       // selected residual nodes, ascending
  Eigen::MatrixXd value_at_colloc;  // B(j,k) = B_k(x_j)
  Eigen::MatrixXd linear;           // collocated derivative terms
  Eigen::MatrixXd constraint_rows;
  Eigen::VectorXd constraint_values;
  Eigen::MatrixXd full_linear;      // [linear; constraint_rows]
};

inline StepOperators build_step_operators(const StepProblem& p,
                                          NodeDrop drop = NodeDrop::Constrained) {
  p.validate();
  StepOperators ops;
  const int N = p.N;
  const double len = p.basis.length();
  ops.rule = p.basis.family == BasisFamily::Legendre ? legendre_lobatto(0.0, len, N)
                                                     : chebyshev_lobatto(0.0, len, N);
  const int mu = p.mu();
  int n_right = 0;
  for (const auto& c : p.constraints) {
    if (std::abs(c.point - len) <= 1e-12 * len) ++n_right;
  }
  int lo, hi; // inclusive node index range
  if (drop == NodeDrop::Constrained) {
    lo = mu - n_right;
    hi = N - n_right;
  } else {
    lo = 0;
    hi = N - mu;
  }
  ops.colloc.assign(ops.rule.nodes.begin() + lo, ops.rule.nodes.begin() + hi + 1);

  const int rows = int(ops.colloc.size());
  ops.value_at_colloc.resize(rows, N + 1);
  ops.linear = Eigen::MatrixXd::Zero(rows, N + 1);
  for (int j = 0; j < rows; ++j) {
    ops.value_at_colloc.row(j) = eval_basis_all(p.basis, N, 0, ops.colloc[j]).transpose();
  }
  for (std::size_t d = 0; d < p.A.size(); ++d) {
    if (p.A[d] == 0.0) continue;
    for (int j = 0; j < rows; ++j) {
      ops.linear.row(j) += p.A[d] * eval_basis_all(p.basis, N, int(d), ops.colloc[j]).transpose();
    }
  }
  for (const auto& term : p.terms) {
    CaputoOperator op = build_node_operator(p.basis, term.order, N, ops.colloc);
    ops.linear += term.lambda * op.node_matrix;
  }

  ops.constraint_rows.resize(mu, N + 1);
  ops.constraint_values.resize(mu);
  for (int i = 0; i < mu; ++i) {
    const auto& c = p.constraints[i];
    ops.constraint_rows.row(i) =
        eval_basis_all(p.basis, N, c.derivative_order, c.point).transpose();
    ops.constraint_values[i] = c.value;
  }

  ops.full_linear.resize(N + 1, N + 1);
  ops.full_linear.topRows(rows) = ops.linear;
  ops.full_linear.bottomRows(mu) = ops.constraint_rows;
  return ops;
}

/// Nonlinear part of the residual: -f at the collocation rows, zero on
/// constraint rows. Kept separate so Newton can difference just this piece.
inline Eigen::VectorXd rhs_part(const StepProblem& p, const StepOperators& ops,
                                const Eigen::VectorXd& a) {
  const int rows = int(ops.colloc.size());
  Eigen::VectorXd uv = ops.value_at_colloc * a;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
  for (int j = 0; j < rows; ++j) {
    double t = ops.colloc[j];
    double f;
    try {
      f = p.rhs(t, uv[j], p.lag(t));
    } catch (const expr_error& e) {
      throw expr_error("rhs evaluation failed at node " + std::to_string(j) +
                           " (t = " + std::to_string(t) + "): " + e.what(),
                       e.offset);
    } catch (const std::exception& e) {
      throw solver_error("rhs evaluation failed at node " + std::to_string(j) +
                         " (t = " + std::to_string(t) + "): " + e.what());
    }
    if (!std::isfinite(f)) {
      throw solver_error("rhs returned non-finite value at node " + std::to_string(j) +
                         " (t = " + std::to_string(t) + ")");
    }
    out[j] = -f;
  }
  return out;
}

inline Eigen::VectorXd assemble_residual(const StepProblem& p, const StepOperators& ops,
                                         const Eigen::VectorXd& a) {
  const int rows = int(ops.colloc.size());
  const int mu = int(ops.constraint_rows.rows());
  Eigen::VectorXd r(a.size());
  r.head(rows) = ops.linear * a + rhs_part(p, ops, a).head(rows);
  if (p.known) {
    for (int j = 0; j < rows; ++j) r[j] += p.known(ops.colloc[j]);
  }
  r.tail(mu) = ops.constraint_rows * a - ops.constraint_values;
  return r;
}

namespace detail {

inline std::pair<SpectralSolution, IterationReport>
iterate_step(const StepProblem& p, const StepOperators& ops, const SolverConfig& cfg,
             Eigen::VectorXd a, bool newton, double damping) {
  const int N = p.N;
  const int rows = int(ops.colloc.size());
  IterationReport rep;
  rep.damping_used = damping;

  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  if (!newton) {
    lu.compute(ops.full_linear);
    if (!lu.isInvertible()) throw solver_error("degenerate linear operator");
  }

  for (int s = 1; s <= cfg.max_iter; ++s) {
    Eigen::VectorXd r = assemble_residual(p, ops, a);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(rnorm);
    if (!std::isfinite(rnorm)) {
      throw solver_error("residual diverged at iteration " + std::to_string(s),
                         rep.residual_history);
    }
    if (newton) {
      Eigen::MatrixXd J = ops.full_linear;
      Eigen::VectorXd base = rhs_part(p, ops, a);
      for (int k = 0; k <= N; ++k) {
        Eigen::VectorXd ak = a;
        ak[k] += cfg.fd_step;
        J.col(k).head(rows) += (rhs_part(p, ops, ak) - base).head(rows) / cfg.fd_step;
      }
      lu.compute(J);
      if (!lu.isInvertible()) throw solver_error("singular Jacobian", rep.residual_history);
    }
    Eigen::VectorXd delta = lu.solve(-r);
    a += damping * delta;
    double un = damping * delta.lpNorm<Eigen::Infinity>();
    double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    if (un <= cfg.tol * scale) {
      rep.iterations = s;
      rep.final_update_norm = un;
      rep.final_residual_norm = assemble_residual(p, ops, a).lpNorm<Eigen::Infinity>();
      return {SpectralSolution{p.basis, std::move(a)}, rep};
    }
  }
  throw solver_error("no convergence in " + std::to_string(cfg.max_iter) + " iterations" +
                         " (last residual " + std::to_string(rep.residual_history.back()) + ")",
                     rep.residual_history);
}

} // namespace detail

/// Frozen-linear-operator correction iteration (reduces to one exact
/// correction for problems whose rhs does not depend on u).
inline std::pair<SpectralSolution, IterationReport>
solve_fixed_point(const StepProblem& p, const StepOperators& ops, const SolverConfig& cfg,
                  const Eigen::VectorXd& init) {
  return detail::iterate_step(p, ops, cfg, init, false, cfg.damping);
}

/// Newton with forward-difference Jacobian of the rhs part.
inline std::pair<SpectralSolution, IterationReport>
solve_newton(const StepProblem& p, const StepOperators& ops, const SolverConfig& cfg,
             const Eigen::VectorXd& init) {
  return detail::iterate_step(p, ops, cfg, init, true, cfg.damping);
}

/// Configured method with the automatic damping retry ladder
/// (damping, damping/2, damping/4) on non-convergence.
inline std::pair<SpectralSolution, IterationReport>
solve_step(const StepProblem& p, const StepOperators& ops, const SolverConfig& cfg,
           const Eigen::VectorXd& init) {
  const bool newton = cfg.method == SolverConfig::Method::Newton;
  double damping = cfg.damping;
  for (int attempt = 0;; ++attempt) {
    try {
      return detail::iterate_step(p, ops, cfg, init, newton, damping);
    } catch (const solver_error& e) {
      if (attempt >= 2 || e.residual_history.empty()) throw;
      damping *= 0.5;
    }
  }
}

} // namespace fdde

#endif
