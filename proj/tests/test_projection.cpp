#include <doctest.h>

#include <cmath>

#include "fraclap/norms.hpp"
#include "fraclap/projection.hpp"

using namespace fraclap;

namespace {

double field_l2(const Mesh& mesh, const std::function<double(const Vec2&)>& f) {
  const QuadRule q = mesh.dim == 1 ? gauss_interval(10) : gauss_triangle(10);
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const Vec2 v0 = mesh.vertices[el[0]];
    const double jac = mesh.dim == 1 ? mesh.element_volume[e] : 2.0 * mesh.element_volume[e];
    for (int i = 0; i < q.size(); ++i) {
      Vec2 x;
      if (mesh.dim == 1)
        x = {v0[0] + q.points[i][0] * mesh.element_volume[e], 0.0};
      else
        x = v0 + q.points[i][0] * (mesh.vertices[el[1]] - v0) +
            q.points[i][1] * (mesh.vertices[el[2]] - v0);
      const double fv = f(x);
      acc += q.weights[i] * jac * fv * fv;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("l2 projection: reproduction, partition of unity, orthogonality") {
  const Mesh m = refine_uniform(build_disc_mesh(8), false);
  auto affine = [](const Vec2& x) { return 0.3 + 1.2 * x[0] - 0.5 * x[1]; };
  const FemFunction p = l2_projection(m, affine, false);
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(p.coefficients[v] == doctest::Approx(affine(m.vertices[v])).epsilon(1e-12));

  const FemFunction ones = l2_projection(m, [](const Vec2&) { return 1.0; }, false);
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(ones.coefficients[v] == doctest::Approx(1.0).epsilon(1e-12));

  auto f = [](const Vec2& x) { return std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]); };
  const FemFunction pf = l2_projection(m, f, false);
  const Eigen::VectorXd rhs = assemble_load(m, f, 8);
  const Eigen::VectorXd resid = rhs - assemble_mass(m) * pf.coefficients;
  const double fl2 = field_l2(m, f);
  for (int v = 0; v < m.n_vertices(); ++v) {
    const double phi_l2 = std::sqrt(assemble_mass(m).coeff(v, v));
    CHECK(std::abs(resid[v]) <= 1e-12 * fl2 * phi_l2 + 1e-15);
  }

  // stability and idempotence
  CHECK(l2_norm(pf) <= fl2 + 1e-12);
  const FemFunction ppf = l2_projection(m, [&](const Vec2& x) { return pf.eval(x); }, false, 6);
  CHECK((ppf.coefficients - pf.coefficients).cwiseAbs().maxCoeff() <= 1e-12);

  // constrained variant zeroes the boundary
  const FemFunction pc = l2_projection(m, f, true);
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.boundary_vertex[v]) CHECK(pc.coefficients[v] == 0.0);
}

TEST_CASE("l2 projection is linear") {
  const Mesh m = build_interval_mesh(8);
  auto f = [](const Vec2& x) { return std::sin(2.0 * x[0]); };
  auto g = [](const Vec2& x) { return x[0] * x[0] * x[0]; };
  const double a = 0.7, b = -1.3;
  const FemFunction pf = l2_projection(m, f, false);
  const FemFunction pg = l2_projection(m, g, false);
  const FemFunction pc =
      l2_projection(m, [&](const Vec2& x) { return a * f(x) + b * g(x); }, false);
  const Eigen::VectorXd combo = a * pf.coefficients + b * pg.coefficients;
  CHECK((pc.coefficients - combo).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("quasi interpolant: reproduction, constants, locality") {
  const Mesh m = refine_uniform(build_disc_mesh(8), false);
  auto affine = [](const Vec2& x) { return 0.4 - 0.8 * x[0] + 0.6 * x[1]; };
  const FemFunction j = quasi_interpolant(m, affine);
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(j.coefficients[v] == doctest::Approx(affine(m.vertices[v])).epsilon(1e-12));

  const FemFunction jc = quasi_interpolant(m, [](const Vec2&) { return 4.2; });
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(jc.coefficients[v] == doctest::Approx(4.2).epsilon(1e-13));

  // locality: the value at a vertex depends only on f on its first incident
  // element; perturb f outside that element and compare bitwise
  const int z = m.elements[m.n_elements() / 2][0];
  const int home = m.vertex_elements[z].front();
  auto base = [](const Vec2& x) { return std::sin(x[0]) + x[1]; };
  auto perturbed = [&](const Vec2& x) {
    // shift values on elements far from z's home element
    const Vec2 c = (1.0 / 3.0) * (m.vertices[m.elements[home][0]] +
                                  m.vertices[m.elements[home][1]] +
                                  m.vertices[m.elements[home][2]]);
    return base(x) + (norm(x - c) > 2.0 * m.element_diameter[home] ? 5.0 : 0.0);
  };
  const FemFunction j1 = quasi_interpolant(m, base);
  const FemFunction j2 = quasi_interpolant(m, perturbed);
  CHECK(j1.coefficients[z] == j2.coefficients[z]);  // bitwise

  // measured L2 stability constant stays put across levels
  Mesh mm = build_disc_mesh(8);
  auto f = [](const Vec2& x) { return std::cos(2.0 * x[0] - x[1]); };
  std::vector<double> ratios;
  for (int l = 0; l < 3; ++l) {
    if (l > 0) mm = refine_uniform(mm, false);
    const FemFunction jf = quasi_interpolant(mm, f);
    ratios.push_back(l2_norm(jf) / field_l2(mm, f));
  }
  for (double r : ratios) CHECK(std::abs(r - ratios.front()) <= 0.2 * ratios.front());
}

TEST_CASE("cutoff function invariants") {
  Mesh m = build_disc_mesh(16);
  for (int l = 0; l < 3; ++l) m = refine_uniform(m, true);
  const SubdomainSpec inner = SubdomainSpec::axis_square({0.0, 0.0}, 0.4);
  const SubdomainSpec outer = SubdomainSpec::axis_square({0.0, 0.0}, 1.4);
  const CutoffFunction cut = build_cutoff(m, inner, outer);
  CHECK(cut.separation == doctest::Approx(0.5));
  for (int v = 0; v < m.n_vertices(); ++v) {
    CHECK(cut.eta[v] >= 0.0);
    CHECK(cut.eta[v] <= 1.0);
    if (inner.contains(m.vertices[v], 2)) CHECK(cut.eta[v] == 1.0);
    const Vec2& x = m.vertices[v];
    if (std::max(std::abs(x[0]), std::abs(x[1])) >= 0.7) CHECK(cut.eta[v] == 0.0);
  }
  for (int e : cut.inner.resolved_elements)
    for (int k = 0; k < 3; ++k) CHECK(cut.eta[m.elements[e][k]] == 1.0);
  CHECK(cut.measured_gradient_bound <= 2.0 / cut.separation);
}

TEST_CASE("superapproximation ratios") {
  // eta * v_h already piecewise linear -> zero numerator
  Mesh m = build_disc_mesh(16);
  for (int l = 0; l < 3; ++l) m = refine_uniform(m, true);
  const SubdomainSpec inner = SubdomainSpec::axis_square({0.0, 0.0}, 0.4);
  const SubdomainSpec outer = SubdomainSpec::axis_square({0.0, 0.0}, 1.4);
  FemFunction v;
  v.mesh = &m;
  v.coefficients = Eigen::VectorXd::Zero(m.n_vertices());
  for (int k = 0; k < m.n_vertices(); ++k)
    if (std::max(std::abs(m.vertices[k][0]), std::abs(m.vertices[k][1])) <= 0.1)
      v.coefficients[k] = 2.5;
  const auto r0 = superapprox_ratio({&m}, {v}, inner, outer, 0);
  CHECK(r0.front() <= 1e-12);

  // interpolants of a fixed smooth function stay bounded over levels
  std::vector<Mesh> meshes;
  Mesh mm = refine_uniform(build_disc_mesh(16), true);
  for (int l = 0; l < 4; ++l) {
    meshes.push_back(mm);
    mm = refine_uniform(mm, true);
  }
  auto smooth = [](const Vec2& x) { return std::exp(-norm2(x)) * (1.0 + x[0]); };
  std::vector<const Mesh*> mptrs;
  std::vector<FemFunction> family;
  for (const Mesh& mesh : meshes) {
    mptrs.push_back(&mesh);
    family.push_back(nodal_interpolant(mesh, smooth));
  }
  for (int t : {0, 1}) {
    const auto r = superapprox_ratio(mptrs, family, inner, outer, t);
    for (size_t l = 1; l < r.size(); ++l) {
      double prior = 0.0;
      for (size_t k = 0; k < l; ++k) prior = std::max(prior, r[k]);
      CHECK(r[l] <= 1.5 * prior);
    }
  }
  CHECK_THROWS_AS(superapprox_ratio({}, {}, inner, outer, 2), std::invalid_argument);
}

TEST_CASE("l2 locality probe") {
  const SubdomainSpec d0 = SubdomainSpec::axis_square({0.0, 0.0}, 0.25);
  const SubdomainSpec d1 = SubdomainSpec::axis_square({0.0, 0.0}, 1.0);
  // f supported near the boundary, vanishing on D1
  auto f = [](const Vec2& x) {
    const double r = norm(x);
    return r > 0.85 ? (r - 0.85) * (r - 0.85) : 0.0;
  };
  Mesh m = build_disc_mesh(16);
  m = refine_uniform(m, true);
  m = refine_uniform(m, true);
  CHECK(l2_locality_probe(m, [](const Vec2&) { return 0.0; }, d0, d1) == 0.0);

  std::vector<double> ratios, hs;
  for (int l = 0; l < 3; ++l) {
    ratios.push_back(l2_locality_probe(m, f, d0, d1));
    hs.push_back(m.max_diameter());
    m = refine_uniform(m, true);
  }
  // halves per level once h <= dist/8 (dist = 0.375 here, h starts ~ 0.25)
  for (size_t l = 1; l < ratios.size(); ++l)
    if (hs[l - 1] <= 0.375 / 8.0) CHECK(ratios[l] <= 0.5 * ratios[l - 1]);
  CHECK(ratios.back() <= 0.5 * ratios[ratios.size() - 2]);

  // f supported inside D0 violates the precondition
  CHECK_THROWS_AS(l2_locality_probe(
                      m, [](const Vec2& x) { return norm(x) < 0.1 ? 1.0 : 0.0; }, d0, d1),
                  std::invalid_argument);
}
