#include "fraclap/exact.hpp"

#include <cmath>
#include <stdexcept>

namespace fraclap {

double ExactSolution::value(const Vec2& x) const {
  const double r2 = dim == 1 ? x[0] * x[0] : norm2(x);
  const double g = 1.0 - r2;
  return g > 0.0 ? std::pow(g, s) : 0.0;
}

Vec2 ExactSolution::gradient(const Vec2& x) const {
  const double r2 = dim == 1 ? x[0] * x[0] : norm2(x);
  const double g = 1.0 - r2;
  if (g <= 0.0) return {0.0, 0.0};
  const double c = -2.0 * s * std::pow(g, s - 1.0);
  return {c * x[0], dim == 1 ? 0.0 : c * x[1]};
}

ExactSolution disc_exact_solution(double s, int dim) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("disc_exact_solution: s must be in (0,1)");
  if (dim != 1 && dim != 2) throw std::invalid_argument("disc_exact_solution: dim must be 1 or 2");
  ExactSolution u;
  u.dim = dim;
  u.s = s;
  if (dim == 2) {
    const double g = std::tgamma(1.0 + s);
    u.rhs_constant = std::pow(2.0, 2.0 * s) * g * g;
    u.energy_squared = u.rhs_constant * M_PI / (s + 1.0);
  } else {
    u.rhs_constant =
        std::pow(2.0, 2.0 * s) * std::tgamma(s + 0.5) * std::tgamma(s + 1.0) / std::tgamma(0.5);
    // int_{-1}^{1} (1-x^2)^s dx = sqrt(pi) Gamma(s+1) / Gamma(s+3/2)
    u.energy_squared =
        u.rhs_constant * std::sqrt(M_PI) * std::tgamma(s + 1.0) / std::tgamma(s + 1.5);
  }
  return u;
}

}  // namespace fraclap
