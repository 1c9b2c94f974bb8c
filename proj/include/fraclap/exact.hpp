#ifndef FRACLAP_EXACT_HPP
#define FRACLAP_EXACT_HPP

#include "fraclap/geometry.hpp"

namespace fraclap {

/// Exact solution u(x) = (1-|x|^2)_+^s of the homogeneous Dirichlet problem
/// on the unit ball with constant right-hand side.
struct ExactSolution {
  int dim = 2;
  double s = 0.5;
  double rhs_constant = 0.0;
  double energy_squared = 0.0;  // a(u,u) = rhs_constant * int u

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;  // unbounded near the boundary for s < 1
};

ExactSolution disc_exact_solution(double s, int dim);

}  // namespace fraclap

#endif
