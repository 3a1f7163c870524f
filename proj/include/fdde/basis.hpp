#ifndef FDDE_BASIS_HPP
#define FDDE_BASIS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdde/basis_spec.hpp"
#include "fdde/dd.hpp"
#include "fdde/quadrature.hpp"

namespace fdde {

/// Monomial forms are numerically meaningless past this degree even in
/// extended precision; coefficients grow like (3 + 2 sqrt 2)^n.
inline constexpr int kMonomialDegreeCap = 60;

/// Power-series form of one shifted basis polynomial: coeffs[j] multiplies x^j.
struct MonomialForm {
  int degree = 0;
  std::vector<double> coeffs;
};

/// Truncated expansion u(x) = sum_k coeffs[k] B_k(x) in the given basis.
struct SpectralSolution {
  BasisSpec basis;
  Eigen::VectorXd coeffs;
};

namespace detail {

/// Derivative table in the mapped variable t: out(d, k) = B_k^{(d)}(t),
/// d = 0..m, k = 0..K. Entries with d > k are exactly zero.
inline Eigen::MatrixXd basis_derivative_table(BasisFamily fam, int K, int m, double t) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, K + 1);
  T(0, 0) = 1.0;
  if (K >= 1) {
    T(0, 1) = t;
    if (m >= 1) T(1, 1) = 1.0;
  }
  for (int k = 1; k < K; ++k) {
    if (fam == BasisFamily::Legendre) {
      double a = (2.0 * k + 1.0) / (k + 1.0);
      double b = double(k) / (k + 1.0);
      for (int d = 0; d <= m; ++d) {
        double lower = d > 0 ? d * T(d - 1, k) : 0.0;
        T(d, k + 1) = a * (t * T(d, k) + lower) - b * T(d, k - 1);
      }
    } else {
      for (int d = 0; d <= m; ++d) {
        double lower = d > 0 ? d * T(d - 1, k) : 0.0;
        T(d, k + 1) = 2.0 * (t * T(d, k) + lower) - T(d, k - 1);
      }
    }
  }
  return T;
}

inline const std::vector<dd>& factorial_table() {
  static const std::vector<dd> table = [] {
    std::vector<dd> f(2 * kMonomialDegreeCap + 1);
    f[0] = dd(1.0);
    for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * dd(double(i));
    return f;
  }();
  return table;
}

inline const std::vector<std::vector<dd>>& binomial_table() {
  static const std::vector<std::vector<dd>> table = [] {
    std::vector<std::vector<dd>> c(kMonomialDegreeCap + 1);
    for (int n = 0; n <= kMonomialDegreeCap; ++n) {
      c[n].resize(n + 1);
      c[n][0] = c[n][n] = dd(1.0);
      for (int k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
    }
    return c;
  }();
  return table;
}

/// Shifted-Legendre power series by the triple sum over (k, l, j).
inline std::vector<dd> legendre_monomial_dd(const BasisSpec& spec, int n) {
  const auto& fact = factorial_table();
  const dd beta(spec.beta);
  const dd width(spec.beta - spec.alpha);
  std::vector<dd> pow_beta(n + 1), pow_width(n + 1);
  pow_beta[0] = pow_width[0] = dd(1.0);
  for (int i = 1; i <= n; ++i) {
    pow_beta[i] = pow_beta[i - 1] * beta;
    pow_width[i] = pow_width[i - 1] * width;
  }
  std::vector<dd> out(n + 1);
  for (int k = 0; k <= n / 2; ++k) {
    for (int l = 0; l <= n - 2 * k; ++l) {
      dd base = fact[2 * n - 2 * k] /
                (fact[n - k] * fact[k] * fact[n - 2 * k - l]) / pow_width[l];
      base *= dd(std::ldexp(1.0, l - n));
      for (int j = 0; j <= l; ++j) {
        dd term = base * pow_beta[l - j] / (fact[j] * fact[l - j]);
        if ((k + l - j) % 2 != 0) term = -term;
        out[j] += term;
      }
    }
  }
  return out;
}

/// Shifted-Chebyshev power series: standard coefficients by the coefficient
/// recurrence, then the binomial expansion of (a x + b)^p.
inline std::vector<dd> chebyshev_monomial_dd(const BasisSpec& spec, int n) {
  std::vector<dd> prev{dd(1.0)}, cur{dd(0.0), dd(1.0)};
  if (n == 0) return prev;
  for (int k = 1; k < n; ++k) {
    std::vector<dd> next(k + 2);
    for (int p = 0; p <= k; ++p) next[p + 1] += dd(2.0) * cur[p];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] -= prev[p];
    prev = std::move(cur);
    cur = std::move(next);
  }
  const dd a = dd(2.0) / dd(spec.beta - spec.alpha);
  const dd b = -(dd(spec.alpha) + dd(spec.beta)) / dd(spec.beta - spec.alpha);
  const auto& binom = binomial_table();
  std::vector<dd> pow_a(n + 1), pow_b(n + 1);
  pow_a[0] = pow_b[0] = dd(1.0);
  for (int i = 1; i <= n; ++i) {
    pow_a[i] = pow_a[i - 1] * a;
    pow_b[i] = pow_b[i - 1] * b;
  }
  std::vector<dd> out(n + 1);
  for (int p = 0; p <= n; ++p) {
    for (int j = 0; j <= p; ++j) {
      out[j] += cur[p] * binom[p][j] * pow_a[j] * pow_b[p - j];
    }
  }
  return out;
}

inline std::vector<dd> monomial_form_dd(const BasisSpec& spec, int k) {
  if (k < 0) throw std::invalid_argument("monomial_form: negative degree");
  if (k > kMonomialDegreeCap) {
    throw std::invalid_argument("monomial_form: degree " + std::to_string(k) +
                                " exceeds cap " + std::to_string(kMonomialDegreeCap));
  }
  return spec.family == BasisFamily::Legendre ? legendre_monomial_dd(spec, k)
                                              : chebyshev_monomial_dd(spec, k);
}

} // namespace detail

/// Value of the k-th shifted basis polynomial at x (three-term recurrence).
inline double eval_basis(const BasisSpec& spec, int k, double x) {
  if (k < 0) throw std::invalid_argument("eval_basis: negative degree");
  const double t = spec.map(x);
  double p0 = 1.0, p1 = t;
  if (k == 0) return p0;
  for (int i = 1; i < k; ++i) {
    double p2;
    if (spec.family == BasisFamily::Legendre) {
      p2 = ((2.0 * i + 1.0) * t * p1 - i * p0) / (i + 1.0);
    } else {
      p2 = 2.0 * t * p1 - p0;
    }
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// m-th derivative of the k-th shifted basis polynomial at x.
inline double eval_derivative(const BasisSpec& spec, int k, int m, double x) {
  if (k < 0 || m < 0) throw std::invalid_argument("eval_derivative: negative index");
  if (m > k) return 0.0;
  if (m == 0) return eval_basis(spec, k, x);
  Eigen::MatrixXd T = detail::basis_derivative_table(spec.family, k, m, spec.map(x));
  return T(m, k) * std::pow(2.0 / spec.length(), m);
}

/// Values of B_k^{(m)}(x) for k = 0..N in one pass.
inline Eigen::VectorXd eval_basis_all(const BasisSpec& spec, int N, int m, double x) {
  Eigen::MatrixXd T = detail::basis_derivative_table(spec.family, N, m, spec.map(x));
  return T.row(m).transpose() * std::pow(2.0 / spec.length(), m);
}

/// Power-series coefficients of the k-th shifted basis polynomial.
inline MonomialForm monomial_form(const BasisSpec& spec, int k) {
  auto ddc = detail::monomial_form_dd(spec, k);
  MonomialForm f;
  f.degree = k;
  f.coeffs.reserve(ddc.size());
  for (auto& c : ddc) f.coeffs.push_back(double(c));
  return f;
}

/// Truncated orthogonal projection of f. Legendre uses the unweighted inner
/// product with the interval-length normalization (2k+1)/(beta-alpha); the
/// Chebyshev path is the discrete Gauss-Lobatto transform.
inline SpectralSolution project(const BasisSpec& spec, const std::function<double(double)>& f,
                                int N) {
  if (N < 0) throw std::invalid_argument("project: negative truncation");
  SpectralSolution sol;
  sol.basis = spec;
  sol.coeffs = Eigen::VectorXd::Zero(N + 1);

  if (spec.family == BasisFamily::Legendre) {
    QuadratureRule rule = legendre_lobatto(spec.alpha, spec.beta, N + 1);
    const int M = rule.order;
    Eigen::MatrixXd B(M + 1, N + 1);
    Eigen::VectorXd fv(M + 1);
    for (int j = 0; j <= M; ++j) {
      double v = f(rule.nodes[j]);
      if (!std::isfinite(v)) {
        throw std::runtime_error("project: non-finite f at quadrature node " + std::to_string(j) +
                                 " (x = " + std::to_string(rule.nodes[j]) + ")");
      }
      fv[j] = v * rule.weights[j];
      B.row(j) = eval_basis_all(spec, N, 0, rule.nodes[j]).transpose();
    }
    sol.coeffs = B.transpose() * fv;
    for (int k = 0; k <= N; ++k) sol.coeffs[k] *= (2.0 * k + 1.0) / spec.length();
  } else {
    const int M = std::max(N, 1);
    QuadratureRule rule = chebyshev_lobatto(spec.alpha, spec.beta, M);
    Eigen::VectorXd fv(M + 1);
    for (int j = 0; j <= M; ++j) {
      double v = f(rule.nodes[j]);
      if (!std::isfinite(v)) {
        throw std::runtime_error("project: non-finite f at quadrature node " + std::to_string(j) +
                                 " (x = " + std::to_string(rule.nodes[j]) + ")");
      }
      fv[j] = v;
    }
    for (int k = 0; k <= N; ++k) {
      double acc = 0.0;
      for (int j = 0; j <= M; ++j) {
        double sigma = (j == 0 || j == M) ? 0.5 : 1.0;
        acc += sigma * fv[j] * eval_basis(spec, k, rule.nodes[j]);
      }
      double cbar = (k == 0 || k == M) ? 2.0 : 1.0;
      sol.coeffs[k] = 2.0 * acc / (M * cbar);
    }
  }
  return sol;
}

/// m-th derivative of the expansion at x.
inline double eval_solution(const SpectralSolution& sol, int m, double x) {
  const int N = int(sol.coeffs.size()) - 1;
  return eval_basis_all(sol.basis, N, m, x).dot(sol.coeffs);
}

} // namespace fdde

#endif
