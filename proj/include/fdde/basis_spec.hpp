#ifndef FDDE_BASIS_SPEC_HPP
#define FDDE_BASIS_SPEC_HPP

#include <stdexcept>
#include <string>

namespace fdde {

enum class BasisFamily { Legendre, Chebyshev };

inline const char* to_string(BasisFamily f) {
  return f == BasisFamily::Legendre ? "legendre" : "chebyshev";
}

/// Orthogonal family shifted to [alpha, beta] by the affine map
/// t = (2 x - (alpha + beta)) / (beta - alpha).
struct BasisSpec {
  BasisFamily family = BasisFamily::Legendre;
  double alpha = -1.0;
  double beta = 1.0;

  BasisSpec() = default;
  BasisSpec(BasisFamily fam, double a, double b) : family(fam), alpha(a), beta(b) {
    if (!(beta > alpha)) {
      throw std::invalid_argument("BasisSpec: beta must exceed alpha, got [" +
                                  std::to_string(a) + ", " + std::to_string(b) + "]");
    }
  }

  double length() const { return beta - alpha; }
  /// Mapped coordinate in [-1, 1].
  double map(double x) const { return (2.0 * x - (alpha + beta)) / (beta - alpha); }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

} // namespace fdde

#endif
