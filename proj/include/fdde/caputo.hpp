#ifndef FDDE_CAPUTO_HPP
#define FDDE_CAPUTO_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdde/basis.hpp"
#include "fdde/gamma.hpp"

namespace fdde {

/// Caputo order nu > 0 together with m = ceil(nu).
struct FractionalOrder {
  double nu = 1.0;
  int m = 1;

  FractionalOrder() = default;
  explicit FractionalOrder(double order) : nu(order) {
    if (!(order > 0.0)) throw std::invalid_argument("FractionalOrder: nu must be positive");
    m = int(std::ceil(order));
  }

  bool is_integer() const { return nu == double(m); }
};

/// Caputo derivative of x^k of order nu, base point 0.
inline double caputo_monomial(int k, const FractionalOrder& order, double x) {
  if (k < order.m) return 0.0;
  const double e = k - order.nu;
  double p;
  if (x == 0.0) {
    p = (e == 0.0) ? 1.0 : 0.0;
  } else {
    p = std::pow(x, e);
  }
  return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 - order.nu) * p;
}

namespace detail {

/// Gamma(j+1)/Gamma(j+1-nu) for j = m..jmax, with the common 1/Gamma(m-nu)
/// factor left out in the fractional case (the caller applies it once);
/// pure double-double products otherwise.
inline std::vector<dd> caputo_ratio_table(const FractionalOrder& order, int jmax) {
  std::vector<dd> r(jmax + 1);
  const int m = order.m;
  if (m > jmax) return r;
  if (order.is_integer()) {
    dd v(1.0);
    for (int i = 2; i <= m; ++i) v *= dd(double(i));
    r[m] = v; // m!
    for (int j = m; j < jmax; ++j) r[j + 1] = r[j] * dd(j + 1.0) / dd(j + 1.0 - order.nu);
  } else {
    dd v(1.0);
    for (int i = 2; i <= m; ++i) v *= dd(double(i));
    r[m] = v / dd(m - order.nu);
    for (int j = m; j < jmax; ++j) r[j + 1] = r[j] * dd(j + 1.0) / dd(j + 1.0 - order.nu);
  }
  return r;
}

/// (D^nu B_k)(x) from the dd power series q, exact up to rounding.
inline double caputo_basis_value(const std::vector<dd>& q, const FractionalOrder& order,
                                 const std::vector<dd>& ratio, double x) {
  const int k = int(q.size()) - 1;
  const int m = order.m;
  if (k < m) return 0.0;
  dd sum(0.0);
  dd xpow(1.0); // x^{j-m}
  for (int j = m; j <= k; ++j) {
    sum += q[j] * ratio[j] * xpow;
    xpow *= dd(x);
  }
  if (order.is_integer()) return double(sum);
  const double common = (x == 0.0) ? 0.0 : std::pow(x, order.m - order.nu);
  return double(sum) * common / gamma_fn(order.m - order.nu);
}

} // namespace detail

/// Order-nu Caputo operator on span{B_0..B_N}: pointwise matrix
/// D(j,k) = (D^nu B_k)(x_j), and optionally the Legendre coefficient-space
/// matrix S with D^nu L_n = sum_i S(n,i) L_i truncated at i <= N.
struct CaputoOperator {
  BasisSpec basis;
  FractionalOrder order;
  int N = 0;
  Eigen::MatrixXd node_matrix;
  std::optional<Eigen::MatrixXd> coeff_matrix;
};

/// Pointwise operator at the given nodes. Requires alpha = 0 (the Caputo
/// base point); exact through the dd monomial pipeline, no series truncation.
inline CaputoOperator build_node_operator(const BasisSpec& basis, const FractionalOrder& order,
                                          int N, const std::vector<double>& nodes) {
  if (basis.alpha != 0.0) {
    throw std::invalid_argument("build_node_operator: basis interval must start at 0");
  }
  if (N > kMonomialDegreeCap) {
    throw std::invalid_argument("build_node_operator: N exceeds monomial degree cap");
  }
  CaputoOperator op;
  op.basis = basis;
  op.order = order;
  op.N = N;
  op.node_matrix = Eigen::MatrixXd::Zero(int(nodes.size()), N + 1);
  const auto ratio = detail::caputo_ratio_table(order, N);
  for (int k = order.m; k <= N; ++k) {
    const auto q = detail::monomial_form_dd(basis, k);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      op.node_matrix(int(j), k) = detail::caputo_basis_value(q, order, ratio, nodes[j]);
    }
  }
  return op;
}

/// Coefficient-space matrix S for the shifted Legendre family on [0, beta];
/// the projection integrals are evaluated in closed form by expanding
/// L_i into monomials: int_0^beta x^{j-nu+m} dx = beta^{j-nu+m+1}/(j-nu+m+1).
inline Eigen::MatrixXd build_coeff_operator_legendre(const BasisSpec& basis,
                                                     const FractionalOrder& order, int N) {
  if (basis.family != BasisFamily::Legendre) {
    throw std::invalid_argument("build_coeff_operator_legendre: Legendre family required");
  }
  if (basis.alpha != 0.0) {
    throw std::invalid_argument("build_coeff_operator_legendre: basis interval must start at 0");
  }
  if (N > kMonomialDegreeCap) {
    throw std::invalid_argument("build_coeff_operator_legendre: N exceeds monomial degree cap");
  }
  const double tau = basis.beta;
  const double nu = order.nu;
  const int m = order.m;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N + 1, N + 1);

  std::vector<std::vector<detail::dd>> mono(N + 1);
  for (int k = 0; k <= N; ++k) mono[k] = detail::monomial_form_dd(basis, k);
  std::vector<detail::dd> tau_pow(N + 1);
  tau_pow[0] = detail::dd(1.0);
  for (int i = 1; i <= N; ++i) tau_pow[i] = tau_pow[i - 1] * detail::dd(tau);

  const auto ratio = detail::caputo_ratio_table(order, N);
  const double common =
      order.is_integer() ? std::pow(tau, -nu) : std::pow(tau, -nu) / gamma_fn(m - nu);

  for (int i = 0; i <= N; ++i) {
    // K(j) = sum_mm g_mm tau^mm / (j - nu + mm + 1)
    std::vector<detail::dd> K(N + 1);
    for (int j = m; j <= N; ++j) {
      detail::dd acc(0.0);
      for (int mm = 0; mm <= i; ++mm) {
        acc += mono[i][mm] * tau_pow[mm] / detail::dd(j - nu + mm + 1.0);
      }
      K[j] = acc;
    }
    for (int n = m; n <= N; ++n) {
      detail::dd acc(0.0);
      for (int j = m; j <= n; ++j) {
        acc += mono[n][j] * ratio[j] * tau_pow[j] * K[j];
      }
      S(n, i) = double(acc) * (2.0 * i + 1.0) * common;
    }
  }
  return S;
}

} // namespace fdde

#endif
