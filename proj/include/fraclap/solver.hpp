#ifndef FRACLAP_SOLVER_HPP
#define FRACLAP_SOLVER_HPP

#include <functional>
#include <stdexcept>

#include "fraclap/assembly.hpp"

namespace fraclap {

struct SolverFailure : std::runtime_error {
  int pivot_index;
  SolverFailure(const std::string& msg, int pivot) : std::runtime_error(msg), pivot_index(pivot) {}
};

/// Piecewise-linear function given by one coefficient per mesh vertex.
struct FemFunction {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd coefficients;

  double eval_ref(int element, double r1, double r2) const;
  Vec2 gradient(int element) const;  // constant per element
  double eval(const Vec2& x) const;  // element search; intended for tests
};

enum class SolveMethod { cholesky, cg };

/// Solves K c = F on the free vertices; boundary coefficients are zero.
FemFunction solve(const StiffnessSystem& system, SolveMethod method = SolveMethod::cholesky);

/// c^T F for the solved system, after checking |c^T K c - c^T F| <= 1e-10 |c^T F|.
double galerkin_energy(const StiffnessSystem& system, const FemFunction& u_h);

FemFunction nodal_interpolant(const Mesh& mesh, const std::function<double(const Vec2&)>& f);

}  // namespace fraclap

#endif
