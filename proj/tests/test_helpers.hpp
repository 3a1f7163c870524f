#ifndef FDDE_TEST_HELPERS_HPP
#define FDDE_TEST_HELPERS_HPP

#include <cmath>
#include <random>

namespace fdde_test {

inline double rel_err(double got, double want) {
  double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

/// relative error with an absolute floor, for quantities that cross zero
inline double mixed_err(double got, double want, double floor = 1.0) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240811u);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

} // namespace fdde_test

#endif
