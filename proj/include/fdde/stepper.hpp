#ifndef FDDE_STEPPER_HPP
#define FDDE_STEPPER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fdde/collocation.hpp"

namespace fdde {

/// Scalar function of global time with derivatives up to the order the
/// caller needs (order 0 = value).
struct TimeFunction {
  std::function<double(double, int)> f;
  double operator()(double t, int order = 0) const { return f(t, order); }
  explicit operator bool() const { return bool(f); }
};

inline TimeFunction constant_history(double value) {
  return TimeFunction{[value](double, int order) { return order == 0 ? value : 0.0; }};
}

/// Full delay problem on [0, horizon]:
/// sum_j A_j u^(j) + sum_p lambda_p D^{nu_p} u = f(t, u, u(t - tau)),
/// u = phi on [-tau, 0], optional extra (boundary) constraints.
struct FDDEProblem {
  std::vector<double> A;
  std::vector<StepProblem::FracTerm> terms; // ascending; leading last with lambda 1
  double tau = 1.0;
  double horizon = 1.0;
  std::function<double(double, double, double)> rhs; // f(global t, u, u_lag)
  TimeFunction history;
  struct PointConstraint {
    double point = 0.0; // global time
    int derivative_order = 0;
    double value = 0.0;
  };
  std::vector<PointConstraint> extra_constraints;
  std::optional<TimeFunction> exact;
  std::string name;

  int integer_order() const { return A.empty() ? 0 : int(A.size()) - 1; }
  double leading_nu() const {
    double nu = 0.0;
    for (const auto& t : terms) nu = std::max(nu, t.order.nu);
    return nu;
  }
  int mu() const { return std::max(int(std::ceil(leading_nu())), integer_order()); }

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("FDDEProblem: tau must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("FDDEProblem: horizon must be positive");
    if (terms.empty()) throw std::invalid_argument("FDDEProblem: no differential terms");
    if (!history) throw std::invalid_argument("FDDEProblem: history required");
    if (!rhs) throw std::invalid_argument("FDDEProblem: rhs required");
  }
};

/// Fractional-derivative base point across steps. Global keeps the Caputo
/// integral anchored at t = 0, adding the known memory of previous steps to
/// each new step; Local restarts the operator at every step knot.
enum class MemoryMode { Global, Local };

struct RunReport {
  std::vector<IterationReport> steps;
  double wall_seconds = 0.0;
  double max_knot_mismatch = 0.0;
};

/// Ordered per-step expansions covering [0, horizon]; step i lives on the
/// local coordinate [0, lengths[i]] representing [i tau, i tau + lengths[i]].
struct PiecewiseSolution {
  double tau = 1.0;
  double horizon = 1.0;
  int mu = 1;
  TimeFunction history;
  std::vector<SpectralSolution> steps;
  std::vector<double> lengths;

  double eval(double t, int m = 0) const {
    const double slack = 1e-12 * std::max(1.0, horizon);
    if (t < -tau - slack || t > horizon + slack) {
      throw std::out_of_range("PiecewiseSolution::eval: t = " + std::to_string(t) +
                              " outside [-tau, horizon]");
    }
    if (t < 0.0) return history(t, m);
    int i = std::min(int(steps.size()) - 1, int(std::floor(t / tau)));
    double local = t - i * tau;
    if (local > lengths[i]) local = lengths[i];
    return eval_solution(steps[i], m, local);
  }

  /// (u(t), u(t - tau)) for phase-plane output.
  std::pair<double, double> lag_trace(double t) const {
    double lagged = (t - tau < 0.0) ? history(t - tau, 0) : eval(t - tau, 0);
    return {eval(t, 0), lagged};
  }
};

namespace detail {

/// Power-series coefficients (dd) of one step's solution.
inline std::vector<dd> solution_monomial_dd(const SpectralSolution& sol) {
  const int N = int(sol.coeffs.size()) - 1;
  std::vector<dd> out(N + 1);
  for (int k = 0; k <= N; ++k) {
    auto mono = monomial_form_dd(sol.basis, k);
    dd ak(sol.coeffs[k]);
    for (int j = 0; j <= k; ++j) out[j] += ak * mono[j];
  }
  return out;
}

inline std::vector<dd> poly_derivative_dd(const std::vector<dd>& c, int m) {
  if (m >= int(c.size())) return {};
  std::vector<dd> out(c.size() - m);
  for (std::size_t j = 0; j < out.size(); ++j) {
    dd f(1.0);
    for (int i = 1; i <= m; ++i) f *= dd(double(j + i));
    out[j] = c[j + m] * f;
  }
  return out;
}

/// Exact integral int_0^tau (c - s)^g s^j ds for c > tau, g in (-1, 0),
/// split as c^{g+1} S_A - (c-tau)^{g+1} S_B with the alternating sums held
/// in double-double.
class MemoryKernel {
 public:
  MemoryKernel(double g, double tau, int jmax) : g_(g), tau_(tau) {
    const auto& binom = binomial_table();
    beta_.resize(jmax + 1);
    for (int j = 0; j <= jmax; ++j) {
      dd acc(0.0);
      for (int q = 0; q <= j; ++q) {
        dd term = binom[j][q] / dd(g_ + q + 1.0);
        if (q % 2 != 0) term = -term;
        acc += term;
      }
      beta_[j] = acc;
    }
  }

  /// sum_j w[j] * int_0^tau (c - s)^g s^j ds
  double apply(const std::vector<dd>& w, double c) const {
    const auto& binom = binomial_table();
    const double a = std::pow(c, g_ + 1.0);
    const double cmt = c - tau_;
    const double b = cmt > 0.0 ? std::pow(cmt, g_ + 1.0) : 0.0;
    dd total(0.0);
    dd cpow(1.0); // c^j
    for (std::size_t j = 0; j < w.size(); ++j) {
      dd sa = cpow * beta_[j];
      dd sb(0.0);
      if (b != 0.0) {
        dd cq = cpow;        // c^{j-q}
        dd dq(1.0);          // (c-tau)^q
        for (std::size_t q = 0; q <= j; ++q) {
          dd term = binom[j][q] * cq * dq / dd(g_ + q + 1.0);
          if (q % 2 != 0) term = -term;
          sb += term;
          cq /= dd(c);
          dq *= dd(cmt);
        }
      }
      total += w[j] * (dd(a) * sa - dd(b) * sb);
      cpow *= dd(c);
    }
    return double(total);
  }

 private:
  double g_;
  double tau_;
  std::vector<dd> beta_;
};

} // namespace detail

/// Method-of-steps solve. Steps are computed left to right; each consumes
/// the previous step through the lag term, the continuity constraints and,
/// in Global mode, the fractional memory integrals.
inline std::pair<PiecewiseSolution, RunReport>
solve(const FDDEProblem& problem, BasisFamily family, int N, const SolverConfig& cfg = {},
      MemoryMode memory = MemoryMode::Global, NodeDrop drop = NodeDrop::Constrained) {
  problem.validate();
  const int mu = problem.mu();
  if (N < mu + 1) {
    throw std::invalid_argument("solve: N must be at least mu + 1 = " + std::to_string(mu + 1));
  }
  const double tau = problem.tau;
  const double T = problem.horizon;
  const int nsteps = int(std::ceil(T / tau - 1e-12));

  PiecewiseSolution ps;
  ps.tau = tau;
  ps.horizon = T;
  ps.mu = mu;
  ps.history = problem.history;
  RunReport report;

  // dd power series of each completed step, per fractional term order
  std::vector<std::vector<detail::dd>> step_series;
  const bool needs_memory = [&] {
    if (memory == MemoryMode::Local || nsteps < 2) return false;
    for (const auto& t : problem.terms) {
      if (!t.order.is_integer()) return true;
    }
    return false;
  }();

  auto t_start = std::chrono::steady_clock::now();
  for (int i = 1; i <= nsteps; ++i) {
    const double t0 = (i - 1) * tau;
    const double len = std::min(i * tau, T) - t0;

    StepProblem sp;
    sp.basis = BasisSpec(family, 0.0, len);
    sp.N = N;
    sp.A = problem.A;
    sp.terms = problem.terms;

    for (int j = 0; j < mu; ++j) {
      double value = (i == 1) ? problem.history(0.0, j)
                              : eval_solution(ps.steps.back(), j, ps.lengths.back());
      sp.constraints.push_back({0.0, j, value});
    }
    for (const auto& ec : problem.extra_constraints) {
      const double slack = 1e-12 * std::max(1.0, T);
      if (ec.point >= t0 - slack && ec.point <= t0 + len + slack) {
        if (sp.constraints.empty()) {
          throw solver_error("step " + std::to_string(i) +
                             ": more boundary constraints than conditions to replace");
        }
        sp.constraints.pop_back(); // boundary data replaces the highest-order condition
        sp.constraints.push_back({std::clamp(ec.point - t0, 0.0, len), ec.derivative_order,
                                  ec.value});
      }
    }

    sp.rhs = [&problem, t0](double tl, double u, double ud) {
      return problem.rhs(t0 + tl, u, ud);
    };
    if (i == 1) {
      sp.lag = [&problem, t0, tau](double tl) { return problem.history(t0 + tl - tau, 0); };
    } else {
      const SpectralSolution& prev = ps.steps.back();
      sp.lag = [&prev](double tl) { return eval_solution(prev, 0, tl); };
    }

    if (needs_memory && i >= 2) {
      struct FracMemory {
        double scale;
        detail::MemoryKernel kernel;
        std::vector<std::vector<detail::dd>> derivs; // u_p^{(m)} series, p = 1..i-1
      };
      std::vector<FracMemory> frac;
      for (const auto& term : problem.terms) {
        if (term.order.is_integer()) continue;
        const int m = term.order.m;
        std::vector<std::vector<detail::dd>> derivs;
        for (int p = 0; p < i - 1; ++p) {
          derivs.push_back(detail::poly_derivative_dd(step_series[p], m));
        }
        frac.push_back({term.lambda / gamma_fn(m - term.order.nu),
                        detail::MemoryKernel(m - term.order.nu - 1.0, tau, N),
                        std::move(derivs)});
      }
      sp.known = [frac = std::move(frac), i, tau](double tl) {
        double acc = 0.0;
        for (const auto& fm : frac) {
          double sum = 0.0;
          for (int p = 1; p <= i - 1; ++p) {
            sum += fm.kernel.apply(fm.derivs[p - 1], tl + (i - p) * tau);
          }
          acc += fm.scale * sum;
        }
        return acc;
      };
    }

    Eigen::VectorXd init;
    if (i == 1) {
      init = Eigen::VectorXd::Zero(N + 1);
      init[0] = problem.history(0.0, 0);
    } else {
      init = ps.steps.back().coeffs;
    }

    try {
      StepOperators ops = build_step_operators(sp, drop);
      auto [sol, rep] = solve_step(sp, ops, cfg, init);
      ps.steps.push_back(std::move(sol));
      ps.lengths.push_back(len);
      report.steps.push_back(std::move(rep));
    } catch (const solver_error& e) {
      throw solver_error("step " + std::to_string(i) + " of " + std::to_string(nsteps) + ": " +
                             e.what(),
                         e.residual_history);
    }
    if (needs_memory && i < nsteps) {
      step_series.push_back(detail::solution_monomial_dd(ps.steps.back()));
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  for (int i = 1; i < int(ps.steps.size()); ++i) {
    for (int j = 0; j < mu; ++j) {
      double gap = std::abs(eval_solution(ps.steps[i], j, 0.0) -
                            eval_solution(ps.steps[i - 1], j, ps.lengths[i - 1]));
      report.max_knot_mismatch = std::max(report.max_knot_mismatch, gap);
    }
  }
  return {std::move(ps), std::move(report)};
}

} // namespace fdde

#endif
