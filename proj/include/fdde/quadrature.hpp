#ifndef FDDE_QUADRATURE_HPP
#define FDDE_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdde/basis_spec.hpp"

namespace fdde {

/// Gauss-Lobatto rule on [alpha, beta]. Both endpoints are nodes.
/// Legendre weights integrate dx; Chebyshev weights integrate the mapped
/// weight 1/sqrt(1 - t(x)^2) dx, Jacobian folded in.
struct QuadratureRule {
  BasisSpec spec;
  int order = 0; // N: node count minus one
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// L_N, L_N', L_N'' on the standard interval at t.
inline void legendre_with_derivs(int N, double t, double& v, double& d1, double& d2) {
  double p0 = 1.0, p1 = t;           // values
  double q0 = 0.0, q1 = 1.0;         // first derivatives
  double r0 = 0.0, r1 = 0.0;         // second derivatives
  if (N == 0) { v = p0; d1 = q0; d2 = r0; return; }
  for (int k = 1; k < N; ++k) {
    double a = (2.0 * k + 1.0) / (k + 1.0);
    double b = double(k) / (k + 1.0);
    double p2 = a * t * p1 - b * p0;
    double q2 = a * (t * q1 + p1) - b * q0;
    double r2 = a * (t * r1 + 2.0 * q1) - b * r0;
    p0 = p1; p1 = p2;
    q0 = q1; q1 = q2;
    r0 = r1; r1 = r2;
  }
  v = p1; d1 = q1; d2 = r1;
}

} // namespace detail

/// Chebyshev-Gauss-Lobatto nodes and weights, nodes ascending.
inline QuadratureRule chebyshev_lobatto(double alpha, double beta, int N) {
  if (N < 1) throw std::invalid_argument("chebyshev_lobatto: N must be >= 1");
  QuadratureRule r;
  r.spec = BasisSpec(BasisFamily::Chebyshev, alpha, beta);
  r.order = N;
  r.nodes.resize(N + 1);
  r.weights.resize(N + 1);
  const double mid = 0.5 * (alpha + beta);
  const double half = 0.5 * (beta - alpha);
  const double pi = std::numbers::pi;
  for (int j = 0; j <= N / 2; ++j) {
    double c = std::cos(j * pi / N); // in (0, 1]
    r.nodes[j] = mid - half * c;
    r.nodes[N - j] = mid + half * c;
  }
  r.nodes[0] = alpha;
  r.nodes[N] = beta;
  if (N % 2 == 0) r.nodes[N / 2] = mid;
  for (int j = 0; j <= N; ++j) {
    double w = (j == 0 || j == N) ? pi / (2.0 * N) : pi / N;
    r.weights[j] = w * half;
  }
  return r;
}

/// Legendre-Gauss-Lobatto: endpoints plus roots of L_N' found by Newton
/// from Chebyshev-Lobatto initial guesses; weights 2/(N(N+1) L_N(x_j)^2)
/// scaled by the interval Jacobian.
inline QuadratureRule legendre_lobatto(double alpha, double beta, int N) {
  if (N < 1) throw std::invalid_argument("legendre_lobatto: N must be >= 1");
  QuadratureRule r;
  r.spec = BasisSpec(BasisFamily::Legendre, alpha, beta);
  r.order = N;
  r.nodes.resize(N + 1);
  r.weights.resize(N + 1);

  std::vector<double> t(N + 1);
  t[0] = -1.0;
  t[N] = 1.0;
  const double pi = std::numbers::pi;
  for (int j = 1; j <= N / 2; ++j) {
    double x = -std::cos(j * pi / N);
    double v, d1, d2;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      detail::legendre_with_derivs(N, x, v, d1, d2);
      double dx = d1 / d2;
      x -= dx;
      if (std::abs(dx) <= 4.0 * std::numeric_limits<double>::epsilon()) {
        converged = true;
        break;
      }
    }
    detail::legendre_with_derivs(N, x, v, d1, d2);
    if (!converged && std::abs(d1) > 1e-14 * (1.0 + std::abs(d2))) {
      throw std::runtime_error("legendre_lobatto: Newton failed to converge for interior node " +
                               std::to_string(j) + " of N=" + std::to_string(N));
    }
    t[j] = x;
    t[N - j] = -x;
  }
  if (N % 2 == 0) t[N / 2] = 0.0;

  const double mid = 0.5 * (alpha + beta);
  const double half = 0.5 * (beta - alpha);
  for (int j = 0; j <= N; ++j) {
    r.nodes[j] = mid + half * t[j];
    double v, d1, d2;
    detail::legendre_with_derivs(N, t[j], v, d1, d2);
    r.weights[j] = 2.0 / (N * (N + 1.0) * v * v) * half;
  }
  r.nodes[0] = alpha;
  r.nodes[N] = beta;
  return r;
}

/// Weighted sum over the rule's nodes.
inline double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  double acc = 0.0, comp = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    double fx = f(rule.nodes[j]);
    if (!std::isfinite(fx)) {
      throw std::runtime_error("integrate: non-finite integrand at node " + std::to_string(j) +
                               " (x = " + std::to_string(rule.nodes[j]) + ")");
    }
    // Kahan accumulation
    double y = rule.weights[j] * fx - comp;
    double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  return acc;
}

} // namespace fdde

#endif
