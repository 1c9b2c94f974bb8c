#include "fraclap/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>

namespace fraclap {

double FemFunction::eval_ref(int element, double r1, double r2) const {
  const auto& el = mesh->elements[element];
  if (mesh->dim == 1)
    return (1.0 - r1) * coefficients[el[0]] + r1 * coefficients[el[1]];
  return (1.0 - r1 - r2) * coefficients[el[0]] + r1 * coefficients[el[1]] + r2 * coefficients[el[2]];
}

Vec2 FemFunction::gradient(int element) const {
  const auto& el = mesh->elements[element];
  if (mesh->dim == 1) {
    const double h = mesh->element_volume[element];
    return {(coefficients[el[1]] - coefficients[el[0]]) / h, 0.0};
  }
  const Vec2 v0 = mesh->vertices[el[0]];
  const Vec2 e1 = mesh->vertices[el[1]] - v0;
  const Vec2 e2 = mesh->vertices[el[2]] - v0;
  const double det = cross(e1, e2);
  const double c1 = coefficients[el[1]] - coefficients[el[0]];
  const double c2 = coefficients[el[2]] - coefficients[el[0]];
  // gradient of r1 is (e2[1], -e2[0])/det rotated; solve [e1 e2]^T grad = (c1, c2)
  return {(c1 * e2[1] - c2 * e1[1]) / det, (-c1 * e2[0] + c2 * e1[0]) / det};
}

double FemFunction::eval(const Vec2& x) const {
  constexpr double tol = 1e-12;
  if (mesh->dim == 1) {
    for (int e = 0; e < mesh->n_elements(); ++e) {
      const auto& el = mesh->elements[e];
      const double a = mesh->vertices[el[0]][0], b = mesh->vertices[el[1]][0];
      if (x[0] >= a - tol && x[0] <= b + tol) return eval_ref(e, (x[0] - a) / (b - a), 0.0);
    }
    throw std::invalid_argument("FemFunction::eval: point outside mesh");
  }
  for (int e = 0; e < mesh->n_elements(); ++e) {
    const auto& el = mesh->elements[e];
    const Vec2 v0 = mesh->vertices[el[0]];
    const Vec2 e1 = mesh->vertices[el[1]] - v0;
    const Vec2 e2 = mesh->vertices[el[2]] - v0;
    const double det = cross(e1, e2);
    const Vec2 d = x - v0;
    const double r1 = (d[0] * e2[1] - d[1] * e2[0]) / det;
    const double r2 = (-d[0] * e1[1] + d[1] * e1[0]) / det;
    if (r1 >= -tol && r2 >= -tol && r1 + r2 <= 1.0 + tol) return eval_ref(e, r1, r2);
  }
  throw std::invalid_argument("FemFunction::eval: point outside mesh");
}

namespace {

int find_bad_pivot(const Eigen::MatrixXd& K) {
  Eigen::MatrixXd L = K;
  const int n = static_cast<int>(K.rows());
  for (int j = 0; j < n; ++j) {
    double d = L(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) return j;
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = L(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return -1;
}

}  // namespace

FemFunction solve(const StiffnessSystem& system, SolveMethod method) {
  const int nf = system.n_free();
  if (system.F.size() != nf) throw std::invalid_argument("solve: system has no load attached");

  Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
  if (nf > 0 && system.F.norm() > 0.0) {
    if (method == SolveMethod::cholesky) {
      Eigen::LLT<Eigen::MatrixXd> llt(system.K);
      if (llt.info() != Eigen::Success)
        throw SolverFailure("solve: Cholesky failed, nonpositive pivot", find_bad_pivot(system.K));
      c = llt.solve(system.F);
      c += llt.solve(system.F - system.K * c);  // one refinement step
    } else {
      Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setTolerance(1e-13);
      cg.setMaxIterations(50 * nf);
      cg.compute(system.K);
      c = cg.solve(system.F);
      c += cg.solve(system.F - system.K * c);
    }
    const double resid = (system.K * c - system.F).norm() / system.F.norm();
    if (!(resid <= 1e-12))
      throw std::runtime_error("solve: relative residual " + std::to_string(resid) + " exceeds 1e-12");
  }

  FemFunction u;
  u.mesh = system.mesh;
  u.coefficients = Eigen::VectorXd::Zero(system.mesh->n_vertices());
  for (int i = 0; i < nf; ++i) u.coefficients[system.vertex_of_free[i]] = c[i];
  return u;
}

double galerkin_energy(const StiffnessSystem& system, const FemFunction& u_h) {
  const int nf = system.n_free();
  Eigen::VectorXd c(nf);
  for (int i = 0; i < nf; ++i) c[i] = u_h.coefficients[system.vertex_of_free[i]];
  const double ctf = c.dot(system.F);
  const double ctkc = c.dot(system.K * c);
  const double scale = std::max(std::abs(ctf), 1e-300);
  if (std::abs(ctkc - ctf) > 1e-10 * scale && std::abs(ctkc - ctf) > 1e-14)
    throw std::runtime_error("galerkin_energy: c^T K c and c^T F disagree; inconsistent system");
  return ctf;
}

FemFunction nodal_interpolant(const Mesh& mesh, const std::function<double(const Vec2&)>& f) {
  FemFunction u;
  u.mesh = &mesh;
  u.coefficients = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) u.coefficients[v] = f(mesh.vertices[v]);
  return u;
}

}  // namespace fraclap
