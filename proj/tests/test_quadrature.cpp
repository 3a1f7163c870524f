#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "fdde/quadrature.hpp"
#include "test_helpers.hpp"

using namespace fdde;
using fdde_test::rel_err;
using fdde_test::uniform;

constexpr double pi = std::numbers::pi;

TEST_CASE("Chebyshev-Lobatto nodes and weights", "[quadrature]") {
  QuadratureRule r = chebyshev_lobatto(-1.0, 1.0, 2);
  REQUIRE(r.nodes[0] == -1.0);
  REQUIRE(std::abs(r.nodes[1]) < 1e-16);
  REQUIRE(r.nodes[2] == 1.0);
  REQUIRE(rel_err(r.weights[0], pi / 4.0) < 1e-15);
  REQUIRE(rel_err(r.weights[1], pi / 2.0) < 1e-15);
  REQUIRE(rel_err(r.weights[2], pi / 4.0) < 1e-15);

  QuadratureRule s = chebyshev_lobatto(0.0, 1.0, 2);
  REQUIRE(s.nodes[0] == 0.0);
  REQUIRE(rel_err(s.nodes[1], 0.5) < 1e-15);
  REQUIRE(s.nodes[2] == 1.0);

  QuadratureRule t = chebyshev_lobatto(-1.0, 1.0, 4);
  REQUIRE(rel_err(integrate(t, [](double) { return 1.0; }), pi) < 1e-14);
}

TEST_CASE("Chebyshev rule integrates against its weight", "[quadrature]") {
  QuadratureRule r = chebyshev_lobatto(-1.0, 1.0, 6);
  double got = integrate(r, [](double x) { return x * x; });
  REQUIRE(rel_err(got, pi / 2.0) < 1e-14); // integral of t^2/sqrt(1-t^2)
}

TEST_CASE("Legendre-Lobatto three-point rule", "[quadrature]") {
  QuadratureRule r = legendre_lobatto(-1.0, 1.0, 2);
  REQUIRE(r.nodes[0] == -1.0);
  REQUIRE(std::abs(r.nodes[1]) < 1e-15);
  REQUIRE(r.nodes[2] == 1.0);
  REQUIRE(rel_err(r.weights[0], 1.0 / 3.0) < 1e-14);
  REQUIRE(rel_err(r.weights[1], 4.0 / 3.0) < 1e-14);
  REQUIRE(rel_err(r.weights[2], 1.0 / 3.0) < 1e-14);
  REQUIRE(rel_err(integrate(r, [](double x) { return x * x; }), 2.0 / 3.0) < 1e-14);
}

TEST_CASE("Lobatto exactness boundary at degree 2N-1", "[quadrature]") {
  QuadratureRule r = legendre_lobatto(0.0, 1.0, 8);
  REQUIRE(std::abs(integrate(r, [](double x) { return std::pow(x, 15.0); }) - 1.0 / 16.0) < 1e-14);
  double defect = std::abs(integrate(r, [](double x) { return std::pow(x, 16.0); }) - 1.0 / 17.0);
  REQUIRE(defect > 1e-18); // first degree beyond exactness
  REQUIRE(defect < 1e-4);
}

TEST_CASE("constants integrate to the interval length", "[quadrature]") {
  for (double tau : {0.3, 1.0, 2.5}) {
    QuadratureRule r = legendre_lobatto(0.0, tau, 6);
    REQUIRE(rel_err(integrate(r, [](double) { return 1.0; }), tau) < 1e-14);
  }
}

TEST_CASE("random polynomials integrate exactly through 2N-1", "[quadrature]") {
  for (int N = 2; N <= 24; ++N) {
    double a = uniform(-1.5, 0.0);
    double b = a + uniform(0.5, 2.0);
    QuadratureRule r = legendre_lobatto(a, b, N);
    const int deg = 2 * N - 1;
    std::vector<double> coeffs(deg + 1);
    for (auto& c : coeffs) c = uniform(-1.0, 1.0);
    auto poly = [&](double x) {
      double v = 0.0;
      for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
      return v;
    };
    double want = 0.0;
    for (int j = 0; j <= deg; ++j) {
      want += coeffs[j] / (j + 1.0) * (std::pow(b, j + 1.0) - std::pow(a, j + 1.0));
    }
    REQUIRE(fdde_test::mixed_err(integrate(r, poly), want) < 1e-12);
  }
}

TEST_CASE("node symmetry and weight positivity", "[quadrature]") {
  for (int N : {3, 7, 12, 21}) {
    QuadratureRule r = legendre_lobatto(-2.0, 2.0, N);
    for (int j = 0; j <= N; ++j) {
      REQUIRE(r.weights[j] > 0.0);
      REQUIRE(std::abs(r.nodes[j] + r.nodes[N - j]) < 1e-13);
    }
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    REQUIRE(rel_err(sum, 4.0) < 1e-12);
    for (int j = 1; j <= N; ++j) REQUIRE(r.nodes[j] > r.nodes[j - 1]);
  }
}

TEST_CASE("invalid rule orders are rejected", "[quadrature]") {
  REQUIRE_THROWS_AS(chebyshev_lobatto(0.0, 1.0, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(legendre_lobatto(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("non-finite integrand names the node", "[quadrature]") {
  QuadratureRule r = legendre_lobatto(0.0, 1.0, 4);
  REQUIRE_THROWS_WITH(
      integrate(r, [](double x) { return x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0; }),
      Catch::Matchers::ContainsSubstring("node 0"));
}
