#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fdde/gamma.hpp"
#include "test_helpers.hpp"

using fdde::gamma_fn;
using fdde_test::rel_err;

TEST_CASE("gamma at small integers and half-integers", "[gamma]") {
  REQUIRE(rel_err(gamma_fn(1.0), 1.0) < 1e-14);
  REQUIRE(rel_err(gamma_fn(2.0), 1.0) < 1e-14);
  REQUIRE(rel_err(gamma_fn(11.0), 3628800.0) < 1e-13);
  REQUIRE(rel_err(gamma_fn(0.5), std::sqrt(std::numbers::pi)) < 1e-13);
  REQUIRE(rel_err(gamma_fn(1.5), 0.5 * std::sqrt(std::numbers::pi)) < 1e-13);
}

TEST_CASE("gamma against lgamma across the working range", "[gamma]") {
  for (double x = 0.1; x <= 171.0; x += 0.73) {
    double want = std::exp(std::lgamma(x));
    REQUIRE(rel_err(gamma_fn(x), want) < 5e-13);
  }
}

TEST_CASE("gamma functional equation", "[gamma]") {
  for (int i = 0; i < 200; ++i) {
    double x = fdde_test::uniform(0.05, 60.0);
    REQUIRE(rel_err(gamma_fn(x + 1.0), x * gamma_fn(x)) < 1e-12);
  }
}

TEST_CASE("gamma reflection below one half", "[gamma]") {
  constexpr double pi = std::numbers::pi;
  for (double x : {0.25, 0.1, -0.3, -1.7, -5.2}) {
    double want = pi / (std::sin(pi * x) * std::tgamma(1.0 - x));
    REQUIRE(rel_err(gamma_fn(x), want) < 1e-12);
  }
}

TEST_CASE("gamma rejects poles", "[gamma]") {
  REQUIRE_THROWS_AS(gamma_fn(0.0), std::domain_error);
  REQUIRE_THROWS_AS(gamma_fn(-1.0), std::domain_error);
  REQUIRE_THROWS_AS(gamma_fn(-7.0), std::domain_error);
}
