#include "fraclap/projection.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fraclap/norms.hpp"

namespace fraclap {

namespace {

Eigen::VectorXd solve_mass(const Mesh& mesh, const Eigen::VectorXd& rhs, bool constrained) {
  const Eigen::SparseMatrix<double> M = assemble_mass(mesh);
  const int nv = mesh.n_vertices();
  if (!constrained) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M);
    if (llt.info() != Eigen::Success) throw std::runtime_error("l2_projection: mass solve failure");
    return llt.solve(rhs);
  }
  std::vector<int> free_of(nv, -1), vert_of;
  for (int v = 0; v < nv; ++v)
    if (!mesh.boundary_vertex[v]) {
      free_of[v] = static_cast<int>(vert_of.size());
      vert_of.push_back(v);
    }
  const int nf = static_cast<int>(vert_of.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      if (free_of[it.row()] >= 0 && free_of[it.col()] >= 0)
        trips.emplace_back(free_of[it.row()], free_of[it.col()], it.value());
  Eigen::SparseMatrix<double> Mf(nf, nf);
  Mf.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd bf(nf);
  for (int i = 0; i < nf; ++i) bf[i] = rhs[vert_of[i]];
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Mf);
  if (llt.info() != Eigen::Success) throw std::runtime_error("l2_projection: mass solve failure");
  const Eigen::VectorXd cf = llt.solve(bf);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nf; ++i) c[vert_of[i]] = cf[i];
  return c;
}

}  // namespace

FemFunction l2_projection(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                          bool constrained, int quad_order) {
  const Eigen::VectorXd rhs = assemble_load(mesh, f, quad_order);
  FemFunction out;
  out.mesh = &mesh;
  out.coefficients = solve_mass(mesh, rhs, constrained);
  return out;
}

namespace {

// L2 projection of f onto P1 of a single element, evaluated at local vertex.
double local_projection_value(const Mesh& mesh, int e, int local_vertex,
                              const std::function<double(int, const Vec2&)>& f_ref, int quad_order) {
  const double vol = mesh.element_volume[e];
  if (mesh.dim == 1) {
    const QuadRule q = gauss_interval(std::max(2, quad_order));
    double b0 = 0.0, b1 = 0.0;
    for (int i = 0; i < q.size(); ++i) {
      const double r = q.points[i][0];
      const double fv = f_ref(e, {r, 0.0}) * q.weights[i] * vol;
      b0 += fv * (1.0 - r);
      b1 += fv * r;
    }
    // inverse of (vol/6) [[2,1],[1,2]]
    const double c0 = (2.0 * b0 - b1) * 2.0 / vol;
    const double c1 = (2.0 * b1 - b0) * 2.0 / vol;
    return local_vertex == 0 ? c0 : c1;
  }
  const QuadRule q = gauss_triangle(std::max(2, quad_order));
  double b[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < q.size(); ++i) {
    const double r1 = q.points[i][0], r2 = q.points[i][1];
    const double fv = f_ref(e, {r1, r2}) * q.weights[i] * 2.0 * vol;
    b[0] += fv * (1.0 - r1 - r2);
    b[1] += fv * r1;
    b[2] += fv * r2;
  }
  // inverse of (vol/12)(I + ones) is (12/vol)(I - ones/4)
  const double sum = b[0] + b[1] + b[2];
  return (12.0 / vol) * (b[local_vertex] - 0.25 * sum);
}

}  // namespace

FemFunction quasi_interpolant_elemwise(const Mesh& mesh,
                                       const std::function<double(int, const Vec2&)>& f_ref,
                                       int quad_order) {
  FemFunction out;
  out.mesh = &mesh;
  out.coefficients = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int e = mesh.vertex_elements[v].front();  // lowest incident element index
    int lv = 0;
    for (int k = 0; k < mesh.verts_per_element(); ++k)
      if (mesh.elements[e][k] == v) lv = k;
    out.coefficients[v] = local_projection_value(mesh, e, lv, f_ref, quad_order);
  }
  return out;
}

FemFunction quasi_interpolant(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                              int quad_order) {
  auto f_ref = [&](int e, const Vec2& ref) {
    const auto& el = mesh.elements[e];
    const Vec2 v0 = mesh.vertices[el[0]];
    if (mesh.dim == 1) {
      const double h = mesh.element_volume[e];
      return f({v0[0] + ref[0] * h, 0.0});
    }
    const Vec2 e1 = mesh.vertices[el[1]] - v0;
    const Vec2 e2 = mesh.vertices[el[2]] - v0;
    return f(v0 + ref[0] * e1 + ref[1] * e2);
  };
  return quasi_interpolant_elemwise(mesh, f_ref, quad_order);
}

namespace {

double region_distance_in(const SubdomainSpec& spec, const Vec2& x, int dim) {
  // distance from x to the region (0 inside)
  if (spec.kind == SubdomainSpec::Kind::axis_square) {
    double d = std::abs(x[0] - spec.center[0]) - 0.5 * spec.side;
    if (dim == 2) d = std::max(d, std::abs(x[1] - spec.center[1]) - 0.5 * spec.side);
    return std::max(0.0, d);
  }
  if (spec.kind == SubdomainSpec::Kind::disc) {
    Vec2 dd = x - spec.center;
    if (dim == 1) dd[1] = 0.0;
    return std::max(0.0, norm(dd) - spec.radius);
  }
  return 0.0;  // element_list handled by the caller
}

double region_distance_out(const SubdomainSpec& spec, const Vec2& x, int dim) {
  // distance from x to the complement of the region (0 outside)
  if (spec.kind == SubdomainSpec::Kind::axis_square) {
    double slack = 0.5 * spec.side - std::abs(x[0] - spec.center[0]);
    if (dim == 2) slack = std::min(slack, 0.5 * spec.side - std::abs(x[1] - spec.center[1]));
    return std::max(0.0, slack);
  }
  if (spec.kind == SubdomainSpec::Kind::disc) {
    Vec2 dd = x - spec.center;
    if (dim == 1) dd[1] = 0.0;
    return std::max(0.0, spec.radius - norm(dd));
  }
  return 0.0;
}

bool geometric_kind(const SubdomainSpec& s) { return s.kind != SubdomainSpec::Kind::element_list; }

}  // namespace

double region_separation(const Mesh& mesh, const SubdomainSpec& inner, const SubdomainSpec& outer) {
  if (geometric_kind(inner) && geometric_kind(outer)) {
    // smallest slack of the inner region inside the outer one, sampled on a
    // fine set of inner-boundary probes; exact for the concentric cases used
    if (inner.kind == SubdomainSpec::Kind::axis_square &&
        outer.kind == SubdomainSpec::Kind::axis_square) {
      double sep = std::numeric_limits<double>::infinity();
      for (int k = 0; k < mesh.dim; ++k) {
        sep = std::min(sep, (outer.center[k] + 0.5 * outer.side) - (inner.center[k] + 0.5 * inner.side));
        sep = std::min(sep, (inner.center[k] - 0.5 * inner.side) - (outer.center[k] - 0.5 * outer.side));
      }
      return std::max(0.0, sep);
    }
    if (inner.kind == SubdomainSpec::Kind::disc && outer.kind == SubdomainSpec::Kind::disc)
      return std::max(0.0, outer.radius - inner.radius - norm(outer.center - inner.center));
    if (inner.kind == SubdomainSpec::Kind::axis_square && outer.kind == SubdomainSpec::Kind::disc) {
      const double corner = 0.5 * inner.side * (mesh.dim == 2 ? std::sqrt(2.0) : 1.0);
      return std::max(0.0, outer.radius - norm(outer.center - inner.center) - corner);
    }
  }
  // fallback: vertex-based estimate
  const SubdomainSpec ri = inner.resolved ? inner : mark_subdomain(mesh, inner);
  const SubdomainSpec ro = outer.resolved ? outer : mark_subdomain(mesh, outer);
  std::vector<char> in_outer(mesh.n_vertices(), 0), in_inner(mesh.n_vertices(), 0);
  for (int e : ro.resolved_elements)
    for (int k = 0; k < mesh.verts_per_element(); ++k) in_outer[mesh.elements[e][k]] = 1;
  for (int e : ri.resolved_elements)
    for (int k = 0; k < mesh.verts_per_element(); ++k) in_inner[mesh.elements[e][k]] = 1;
  double sep = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!in_inner[v]) continue;
    for (int w = 0; w < mesh.n_vertices(); ++w)
      if (!in_outer[w]) sep = std::min(sep, norm(mesh.vertices[v] - mesh.vertices[w]));
  }
  return std::isfinite(sep) ? sep : 0.0;
}

CutoffFunction build_cutoff(const Mesh& mesh, const SubdomainSpec& inner,
                            const SubdomainSpec& outer) {
  CutoffFunction c;
  c.inner = inner.resolved ? inner : mark_subdomain(mesh, inner);
  c.outer = outer.resolved ? outer : mark_subdomain(mesh, outer);
  c.separation = region_separation(mesh, inner, outer);
  c.eta = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2& x = mesh.vertices[v];
    const double rin = region_distance_in(inner, x, mesh.dim);
    const double rout = region_distance_out(outer, x, mesh.dim);
    double eta;
    if (rin <= 0.0)
      eta = 1.0;
    else if (rout <= 0.0)
      eta = 0.0;
    else
      eta = rout / (rin + rout);
    c.eta[v] = std::clamp(eta, 0.0, 1.0);
  }
  FemFunction etah;
  etah.mesh = &mesh;
  etah.coefficients = c.eta;
  for (int e = 0; e < mesh.n_elements(); ++e)
    c.measured_gradient_bound = std::max(c.measured_gradient_bound, norm(etah.gradient(e)));
  return c;
}

std::vector<double> superapprox_ratio(const std::vector<const Mesh*>& meshes,
                                      const std::vector<FemFunction>& v_family,
                                      const SubdomainSpec& inner, const SubdomainSpec& outer,
                                      int t) {
  if (t != 0 && t != 1) throw std::invalid_argument("superapprox_ratio: t must be 0 or 1");
  if (meshes.size() != v_family.size())
    throw std::invalid_argument("superapprox_ratio: level count mismatch");
  std::vector<double> out;
  for (size_t lvl = 0; lvl < meshes.size(); ++lvl) {
    const Mesh& mesh = *meshes[lvl];
    const FemFunction& v = v_family[lvl];
    const CutoffFunction cut = build_cutoff(mesh, inner, outer);
    FemFunction etah;
    etah.mesh = &mesh;
    etah.coefficients = cut.eta;

    auto g_ref = [&](int e, const Vec2& ref) {
      return etah.eval_ref(e, ref[0], ref[1]) * v.eval_ref(e, ref[0], ref[1]);
    };
    const FemFunction j = quasi_interpolant_elemwise(mesh, g_ref, 4);

    const QuadRule rule = mesh.dim == 1 ? gauss_interval(6) : gauss_triangle(6);
    double num2 = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const double jac = mesh.dim == 1 ? mesh.element_volume[e] : 2.0 * mesh.element_volume[e];
      if (t == 0) {
        for (int q = 0; q < rule.size(); ++q) {
          const Vec2 ref = rule.points[q];
          const double d = g_ref(e, ref) - j.eval_ref(e, ref[0], ref[1]);
          num2 += rule.weights[q] * jac * d * d;
        }
      } else {
        const Vec2 ge = etah.gradient(e);
        const Vec2 gv = v.gradient(e);
        const Vec2 gj = j.gradient(e);
        for (int q = 0; q < rule.size(); ++q) {
          const Vec2 ref = rule.points[q];
          const double ve = v.eval_ref(e, ref[0], ref[1]);
          const double ee = etah.eval_ref(e, ref[0], ref[1]);
          const double dx = ve * ge[0] + ee * gv[0] - gj[0];
          const double dy = ve * ge[1] + ee * gv[1] - gj[1];
          num2 += rule.weights[q] * jac * (dx * dx + dy * dy);
        }
      }
    }

    double den2 = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      bool in_support = false;
      for (int k = 0; k < mesh.verts_per_element(); ++k)
        if (cut.eta[mesh.elements[e][k]] > 0.0) in_support = true;
      if (!in_support) continue;
      const auto& el = mesh.elements[e];
      const double vol = mesh.element_volume[e];
      const Vec2 gv = v.gradient(e);
      double mass;
      if (mesh.dim == 1) {
        const double c0 = v.coefficients[el[0]], c1 = v.coefficients[el[1]];
        mass = vol / 3.0 * (c0 * c0 + c1 * c1 + c0 * c1);
      } else {
        const double c0 = v.coefficients[el[0]], c1 = v.coefficients[el[1]],
                     c2 = v.coefficients[el[2]];
        mass = vol / 6.0 * (c0 * c0 + c1 * c1 + c2 * c2 + c0 * c1 + c0 * c2 + c1 * c2);
      }
      den2 += mass + vol * norm2(gv);
    }
    const double h = mesh.max_diameter();
    const double den = std::pow(h, 2.0 - t) * std::sqrt(den2);
    out.push_back(den > 0.0 ? std::sqrt(num2) / den : 0.0);
  }
  return out;
}

double l2_locality_probe(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                         const SubdomainSpec& d0, const SubdomainSpec& d1) {
  const SubdomainSpec r0 = d0.resolved ? d0 : mark_subdomain(mesh, d0);
  const SubdomainSpec r1 = d1.resolved ? d1 : mark_subdomain(mesh, d1);
  const double sep = region_separation(mesh, d0, d1);
  const double h = mesh.max_diameter();
  if (sep < 2.0 * h) throw std::invalid_argument("l2_locality_probe: dist(D0, boundary of D1) < 2h");

  // f must vanish on D1
  const QuadRule rule = mesh.dim == 1 ? gauss_interval(4) : gauss_triangle(4);
  double f_max_global = 0.0, f_max_d1 = 0.0, f_l2sq = 0.0;
  std::vector<char> in_d1(mesh.n_elements(), 0);
  for (int e : r1.resolved_elements) in_d1[e] = 1;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const Vec2 v0 = mesh.vertices[el[0]];
    const double jac = mesh.dim == 1 ? mesh.element_volume[e] : 2.0 * mesh.element_volume[e];
    for (int q = 0; q < rule.size(); ++q) {
      Vec2 x;
      if (mesh.dim == 1)
        x = {v0[0] + rule.points[q][0] * mesh.element_volume[e], 0.0};
      else
        x = v0 + rule.points[q][0] * (mesh.vertices[el[1]] - v0) +
            rule.points[q][1] * (mesh.vertices[el[2]] - v0);
      const double fv = f(x);
      f_max_global = std::max(f_max_global, std::abs(fv));
      if (in_d1[e]) f_max_d1 = std::max(f_max_d1, std::abs(fv));
      f_l2sq += rule.weights[q] * jac * fv * fv;
    }
  }
  if (f_max_global == 0.0) return 0.0;
  if (f_max_d1 > 1e-12 * f_max_global)
    throw std::invalid_argument("l2_locality_probe: f does not vanish on D1");

  const FemFunction proj = l2_projection(mesh, f, true);
  const double num = l2_norm(proj, &r0);
  return num / std::sqrt(f_l2sq);
}

}  // namespace fraclap
