#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fdde/basis.hpp"
#include "test_helpers.hpp"

using namespace fdde;
using fdde_test::rel_err;
using fdde_test::uniform;

namespace {

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double horner_dd(const std::vector<detail::dd>& c, double x) {
  detail::dd v(0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * detail::dd(x) + *it;
  return double(v);
}

} // namespace

TEST_CASE("shifted Legendre endpoint values", "[basis]") {
  BasisSpec spec(BasisFamily::Legendre, 0.0, 2.0);
  REQUIRE(eval_basis(spec, 1, 2.0) == 1.0);
  REQUIRE(eval_basis(spec, 3, 0.0) == -1.0);
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  REQUIRE(rel_err(eval_basis(unit, 2, 0.5), -0.5) < 1e-14);
}

TEST_CASE("endpoint identities on random intervals", "[basis]") {
  for (auto fam : {BasisFamily::Legendre, BasisFamily::Chebyshev}) {
    for (int rep = 0; rep < 10; ++rep) {
      double a = uniform(-2.0, 2.0);
      double b = a + uniform(0.5, 3.0);
      BasisSpec spec(fam, a, b);
      for (int k = 0; k <= 30; ++k) {
        REQUIRE(rel_err(eval_basis(spec, k, b), 1.0) < 1e-12);
        REQUIRE(rel_err(eval_basis(spec, k, a), k % 2 == 0 ? 1.0 : -1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("monomial form matches hand expansions", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  MonomialForm f2 = monomial_form(unit, 2);
  REQUIRE(f2.coeffs.size() == 3);
  REQUIRE(rel_err(f2.coeffs[0], 1.0) < 1e-14);
  REQUIRE(rel_err(f2.coeffs[1], -6.0) < 1e-14);
  REQUIRE(rel_err(f2.coeffs[2], 6.0) < 1e-14);

  BasisSpec std_leg(BasisFamily::Legendre, -1.0, 1.0);
  MonomialForm f1 = monomial_form(std_leg, 1);
  REQUIRE(f1.coeffs[0] == 0.0);
  REQUIRE(f1.coeffs[1] == 1.0);
}

TEST_CASE("monomial form cross-route consistency at k = 5", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  MonomialForm f = monomial_form(unit, 5);
  for (int i = 0; i < 200; ++i) {
    double x = i / 199.0;
    REQUIRE(std::abs(horner(f.coeffs, x) - eval_basis(unit, 5, x)) <= 1e-12);
  }
}

TEST_CASE("monomial degree cap", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  REQUIRE_THROWS_AS(monomial_form(unit, kMonomialDegreeCap + 1), std::invalid_argument);
}

TEST_CASE("integer derivatives", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  REQUIRE(std::abs(eval_derivative(unit, 2, 1, 0.5)) < 1e-12); // d/dx(6x^2-6x+1) at 1/2
  BasisSpec spec(BasisFamily::Legendre, 0.0, 2.0);
  REQUIRE(eval_derivative(spec, 3, 4, 1.3) == 0.0);
  BasisSpec std_leg(BasisFamily::Legendre, -1.0, 1.0);
  REQUIRE(rel_err(eval_derivative(std_leg, 2, 2, 0.3), 3.0) < 1e-13);
}

TEST_CASE("derivatives match finite differences", "[basis]") {
  for (auto fam : {BasisFamily::Legendre, BasisFamily::Chebyshev}) {
    BasisSpec spec(fam, 0.0, 1.5);
    const double h = 1e-6;
    for (int k = 1; k <= 12; ++k) {
      for (int i = 0; i < 20; ++i) {
        double x = 0.15 + 1.2 * i / 19.0;
        double fd = (eval_basis(spec, k, x + h) - eval_basis(spec, k, x - h)) / (2.0 * h);
        REQUIRE(fdde_test::mixed_err(eval_derivative(spec, k, 1, x), fd) < 1e-5);
      }
    }
  }
}

TEST_CASE("projection of a basis element", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  SpectralSolution sol = project(unit, [&](double x) { return eval_basis(unit, 3, x); }, 5);
  for (int k = 0; k <= 5; ++k) {
    REQUIRE(std::abs(sol.coeffs[k] - (k == 3 ? 1.0 : 0.0)) < 1e-13);
  }

  BasisSpec cheb(BasisFamily::Chebyshev, 0.0, 1.0);
  SpectralSolution solc = project(cheb, [&](double x) { return eval_basis(cheb, 3, x); }, 5);
  for (int k = 0; k <= 5; ++k) {
    REQUIRE(std::abs(solc.coeffs[k] - (k == 3 ? 1.0 : 0.0)) < 1e-13);
  }
}

TEST_CASE("projection of x on [0,1]", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  SpectralSolution sol = project(unit, [](double x) { return x; }, 2);
  REQUIRE(rel_err(sol.coeffs[0], 0.5) < 1e-13);
  REQUIRE(rel_err(sol.coeffs[1], 0.5) < 1e-13);
  REQUIRE(std::abs(sol.coeffs[2]) < 1e-13);
}

TEST_CASE("projection round trip for x^10", "[basis]") {
  for (auto fam : {BasisFamily::Legendre, BasisFamily::Chebyshev}) {
    BasisSpec spec(fam, 0.0, 1.0);
    SpectralSolution sol = project(spec, [](double x) { return std::pow(x, 10.0); }, 19);
    for (int i = 0; i < 100; ++i) {
      double x = i / 99.0;
      REQUIRE(std::abs(eval_solution(sol, 0, x) - std::pow(x, 10.0)) <= 1e-12);
    }
  }
}

TEST_CASE("eval_solution values and derivatives", "[basis]") {
  BasisSpec unit(BasisFamily::Legendre, 0.0, 1.0);
  SpectralSolution c;
  c.basis = unit;
  c.coeffs = Eigen::VectorXd::Zero(6);
  c.coeffs[0] = 3.25;
  REQUIRE(eval_solution(c, 0, 0.37) == 3.25);

  SpectralSolution sq = project(unit, [](double x) { return x * x; }, 4);
  REQUIRE(rel_err(eval_solution(sq, 1, 0.25), 0.5) < 1e-12);
  REQUIRE(std::abs(eval_solution(sq, 3, 0.6)) < 1e-10);
}

TEST_CASE("orthogonality under the Lobatto inner product", "[basis]") {
  double a = uniform(-1.0, 1.0);
  double b = a + uniform(0.5, 2.5);
  BasisSpec spec(BasisFamily::Legendre, a, b);
  QuadratureRule rule = legendre_lobatto(a, b, 44);
  for (int i = 0; i <= 20; ++i) {
    for (int k = i; k <= 20; ++k) {
      double ip = integrate(rule, [&](double x) {
        return eval_basis(spec, i, x) * eval_basis(spec, k, x);
      });
      if (i == k) {
        REQUIRE(rel_err(ip, (b - a) / (2.0 * k + 1.0)) < 1e-10);
      } else {
        REQUIRE(std::abs(ip) < 1e-10);
      }
    }
  }
}

TEST_CASE("route equivalence through the extended-precision series", "[basis]") {
  for (auto fam : {BasisFamily::Legendre, BasisFamily::Chebyshev}) {
    double a = 0.0;
    double b = uniform(0.5, 2.0);
    BasisSpec spec(fam, a, b);
    for (int k = 0; k <= 25; ++k) {
      auto q = detail::monomial_form_dd(spec, k);
      for (int i = 0; i < 100; ++i) {
        double x = uniform(a, b);
        double via_series = horner_dd(q, x);
        double via_recurrence = eval_basis(spec, k, x);
        double via_deriv0 = eval_derivative(spec, k, 0, x);
        REQUIRE(fdde_test::mixed_err(via_series, via_recurrence) < 1e-11);
        REQUIRE(fdde_test::mixed_err(via_deriv0, via_recurrence) < 1e-11);
      }
    }
  }
}

TEST_CASE("basis spec validation", "[basis]") {
  REQUIRE_THROWS_AS(BasisSpec(BasisFamily::Legendre, 1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(BasisSpec(BasisFamily::Legendre, 2.0, 1.0), std::invalid_argument);
}
