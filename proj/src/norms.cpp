#include "fraclap/norms.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fraclap/grading.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/projection.hpp"

namespace fraclap {

namespace {

struct BoundaryContact {
  int bedge = -1;  // local edge index on the domain boundary
  int bvert = -1;  // local vertex index on the domain boundary
};

std::vector<BoundaryContact> classify_boundary_contact(const Mesh& mesh) {
  std::vector<BoundaryContact> out(mesh.n_elements());
  if (mesh.dim == 1) {
    for (int e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 2; ++k)
        if (mesh.boundary_vertex[mesh.elements[e][k]]) out[e].bvert = k;
    return out;
  }
  std::set<std::pair<int, int>> bedges;
  for (const auto& be : mesh.boundary_edges) bedges.insert(std::minmax(be[0], be[1]));
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      if (bedges.count(std::minmax(el[k], el[(k + 1) % 3])) && out[e].bedge < 0) out[e].bedge = k;
      if (mesh.boundary_vertex[el[k]] && out[e].bvert < 0) out[e].bvert = k;
    }
  }
  return out;
}

// Integrates fn(element, parent reference point, physical point) over one
// element, grading geometrically toward its boundary feature if any.
template <class Fn>
double integrate_element(const Mesh& mesh, int e, const BoundaryContact& bc, const QuadRule& rule,
                         const QuadRule& rule1d, double ratio, int depth, const Fn& fn) {
  double acc = 0.0;
  if (mesh.dim == 1) {
    const auto& el = mesh.elements[e];
    const double x0 = mesh.vertices[el[0]][0];
    const double h = mesh.element_volume[e];
    std::vector<std::array<double, 2>> cells;
    if (bc.bvert >= 0)
      cells = graded_cells_1d(bc.bvert == 0, ratio, depth);
    else
      cells = {{0.0, 1.0}};
    for (const auto& c : cells) {
      const double len = c[1] - c[0];
      for (int q = 0; q < rule1d.size(); ++q) {
        const double r = c[0] + len * rule1d.points[q][0];
        acc += len * rule1d.weights[q] * fn(e, Vec2{r, 0.0}, Vec2{x0 + r * h, 0.0});
      }
    }
    return acc * h;
  }

  const auto& el = mesh.elements[e];
  const Vec2 v0 = mesh.vertices[el[0]];
  const Vec2 e1 = mesh.vertices[el[1]] - v0;
  const Vec2 e2 = mesh.vertices[el[2]] - v0;
  std::vector<SubCell2> cells;
  if (bc.bedge >= 0)
    cells = graded_cells_edge(bc.bedge, ratio, depth);
  else if (bc.bvert >= 0)
    cells = graded_cells_vertex(bc.bvert, ratio, depth);
  else
    cells = uniform_cells(0);
  for (const auto& c : cells) {
    const Vec2 d1 = c.v[1] - c.v[0];
    const Vec2 d2 = c.v[2] - c.v[0];
    const double area2 = std::abs(cross(d1, d2));
    if (area2 == 0.0) continue;
    for (int q = 0; q < rule.size(); ++q) {
      const double u1 = rule.points[q][0], u2 = rule.points[q][1];
      const Vec2 ref{c.v[0][0] + u1 * d1[0] + u2 * d2[0], c.v[0][1] + u1 * d1[1] + u2 * d2[1]};
      const Vec2 x = v0 + ref[0] * e1 + ref[1] * e2;
      acc += rule.weights[q] * area2 * fn(e, ref, x);
    }
  }
  return acc * 2.0 * mesh.element_volume[e];
}

std::vector<int> region_elements(const Mesh& mesh, const SubdomainSpec* region) {
  if (region == nullptr) {
    std::vector<int> all(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) all[e] = e;
    return all;
  }
  if (region->resolved) return region->resolved_elements;
  return mark_subdomain(mesh, *region).resolved_elements;
}

template <class Fn>
double graded_sum(const Mesh& mesh, const std::vector<int>& elems, const NormConfig& config,
                  int depth, const Fn& fn) {
  const auto contact = classify_boundary_contact(mesh);
  const QuadRule rule = gauss_triangle(config.interior_order);
  const QuadRule rule1d = gauss_interval(std::max(4, (config.interior_order + 3) / 2));
  double total = 0.0;
  std::function<double(std::int64_t, std::int64_t)> compute = [&](std::int64_t b, std::int64_t e) {
    double part = 0.0;
    for (std::int64_t k = b; k < e; ++k) {
      const int el = elems[k];
      part += integrate_element(mesh, el, contact[el], rule, rule1d, config.grade_ratio, depth, fn);
    }
    return part;
  };
  std::function<void(double&)> merge = [&](double& part) { total += part; };
  parallel_blocks<double>(static_cast<std::int64_t>(elems.size()), 64, config.workers, compute, merge);
  return total;
}

}  // namespace

std::optional<double> l2_error(const ExactSolution& exact, const FemFunction& u_h,
                               const SubdomainSpec* region, const NormConfig& config) {
  const Mesh& mesh = *u_h.mesh;
  const std::vector<int> elems = region_elements(mesh, region);
  if (elems.empty()) return std::nullopt;
  auto fn = [&](int e, const Vec2& ref, const Vec2& x) {
    const double d = exact.value(x) - u_h.eval_ref(e, ref[0], ref[1]);
    return d * d;
  };
  return std::sqrt(graded_sum(mesh, elems, config, config.grade_depth, fn));
}

std::optional<double> h1_seminorm_error(const ExactSolution& exact, const FemFunction& u_h,
                                        const SubdomainSpec* region, const NormConfig& config) {
  const Mesh& mesh = *u_h.mesh;
  const std::vector<int> elems = region_elements(mesh, region);
  if (elems.empty()) return std::nullopt;
  if (exact.s <= 0.5) {
    // grad u is not square-integrable up to the boundary
    if (region == nullptr) return std::nullopt;
    const auto contact = classify_boundary_contact(mesh);
    for (int e : elems)
      if (contact[e].bedge >= 0 || contact[e].bvert >= 0) return std::nullopt;
  }
  int depth = config.grade_depth;
  if (exact.s > 0.5) {
    const double decay = (2.0 * exact.s - 1.0) * std::log(1.0 / config.grade_ratio);
    depth = std::max(depth, std::min(40, static_cast<int>(std::ceil(9.21 / decay))));
  }
  std::vector<Vec2> grads(mesh.n_elements());
  for (int e : elems) grads[e] = u_h.gradient(e);
  auto fn = [&](int e, const Vec2&, const Vec2& x) {
    const Vec2 g = exact.gradient(x);
    const double dx = g[0] - grads[e][0];
    const double dy = g[1] - grads[e][1];
    return dx * dx + dy * dy;
  };
  return std::sqrt(graded_sum(mesh, elems, config, depth, fn));
}

double energy_error(const StiffnessSystem& system, const FemFunction& u_h,
                    const ExactSolution& exact) {
  const double discrete = galerkin_energy(system, u_h);
  const double radicand = exact.energy_squared - discrete;
  if (radicand < -1e-10 * std::max(1.0, std::abs(exact.energy_squared)))
    throw std::runtime_error("energy_error: negative radicand " + std::to_string(radicand) +
                             " (quadrature or geometry error)");
  return std::sqrt(std::max(0.0, radicand));
}

double l2_norm(const FemFunction& v, const SubdomainSpec* region) {
  const Mesh& mesh = *v.mesh;
  const std::vector<int> elems = region_elements(mesh, region);
  double acc = 0.0;
  for (int e : elems) {
    const auto& el = mesh.elements[e];
    const double vol = mesh.element_volume[e];
    if (mesh.dim == 1) {
      const double c0 = v.coefficients[el[0]], c1 = v.coefficients[el[1]];
      acc += vol / 3.0 * (c0 * c0 + c1 * c1 + c0 * c1);
    } else {
      const double c0 = v.coefficients[el[0]], c1 = v.coefficients[el[1]], c2 = v.coefficients[el[2]];
      acc += vol / 6.0 * (c0 * c0 + c1 * c1 + c2 * c2 + c0 * c1 + c0 * c2 + c1 * c2);
    }
  }
  return std::sqrt(acc);
}

namespace {

struct PairElem {
  std::array<Vec2, 3> v;
  std::array<int, 3> g;
  std::array<int, 3> sorted;
  Vec2 centroid{0.0, 0.0};
  double radius = 0.0, diam = 0.0, jac = 0.0;
  std::array<double, 3> coef{0.0, 0.0, 0.0};
  bool zero = true;
};

}  // namespace

double fractional_seminorm(const FemFunction& v, double t, const SubdomainSpec* region,
                           const AssemblyConfig& config) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("fractional_seminorm: t must be in (0,1)");
  const Mesh& mesh = *v.mesh;
  const int dim = mesh.dim;
  const int nvpe = mesh.verts_per_element();
  const std::vector<int> elems = region_elements(mesh, region);
  const int R = static_cast<int>(elems.size());
  if (R == 0) return 0.0;

  std::vector<PairElem> info(R);
  for (int i = 0; i < R; ++i) {
    const int e = elems[i];
    PairElem& pe = info[i];
    for (int k = 0; k < nvpe; ++k) {
      pe.g[k] = mesh.elements[e][k];
      pe.v[k] = mesh.vertices[pe.g[k]];
      pe.sorted[k] = pe.g[k];
      pe.coef[k] = v.coefficients[pe.g[k]];
      if (pe.coef[k] != 0.0) pe.zero = false;
    }
    if (nvpe == 2) pe.sorted[2] = -1;
    std::sort(pe.sorted.begin(), pe.sorted.begin() + nvpe);
    for (int k = 0; k < nvpe; ++k) pe.centroid = pe.centroid + (1.0 / nvpe) * pe.v[k];
    for (int k = 0; k < nvpe; ++k) pe.radius = std::max(pe.radius, norm(pe.v[k] - pe.centroid));
    pe.diam = mesh.element_diameter[e];
    pe.jac = dim == 1 ? mesh.element_volume[e] : 2.0 * mesh.element_volume[e];
  }

  const int so = config.singular_order > 0 ? config.singular_order : (dim == 1 ? 6 : 5);
  const PairQuadRule rule_id = singular_pair_rule(PairCase::identical, so, t, dim);
  const PairQuadRule rule_vx = singular_pair_rule(PairCase::shared_vertex, so, t, dim);
  PairQuadRule rule_ed;
  if (dim == 2) rule_ed = singular_pair_rule(PairCase::shared_edge, so, t, dim);
  const int n_max = std::max(config.disjoint_order_contact,
                             std::max(config.disjoint_order_near, config.disjoint_order_far));
  std::vector<PairQuadRule> disjoint_rules(n_max + 1);
  for (int n = std::min(config.disjoint_order_far, config.disjoint_order_near); n <= n_max; ++n)
    disjoint_rules[n] = singular_pair_rule(PairCase::disjoint, n, t, dim);

  const double kexp = -0.5 * (dim + 2.0 * t);
  const std::int64_t n_pairs = static_cast<std::int64_t>(R) * (R + 1) / 2;

  auto value_at = [&](const PairElem& pe, const std::array<int, 3>& order, const Vec2& ref,
                      Vec2& phys) {
    const Vec2 o = pe.v[order[0]];
    const Vec2 e1 = pe.v[order[1]] - o;
    const Vec2 e2 = dim == 2 ? pe.v[order[2]] - o : Vec2{0.0, 0.0};
    phys = {o[0] + ref[0] * e1[0] + ref[1] * e2[0], o[1] + ref[0] * e1[1] + ref[1] * e2[1]};
    double val = (1.0 - ref[0] - (dim == 2 ? ref[1] : 0.0)) * pe.coef[order[0]] +
                 ref[0] * pe.coef[order[1]];
    if (dim == 2) val += ref[1] * pe.coef[order[2]];
    return val;
  };

  double total = 0.0;
  std::function<double(std::int64_t, std::int64_t)> compute = [&](std::int64_t begin,
                                                                  std::int64_t end) {
    double part = 0.0;
    std::array<int, 2> shared{};
    for (std::int64_t p = begin; p < end; ++p) {
      std::int64_t eb = static_cast<std::int64_t>((std::sqrt(8.0 * static_cast<double>(p) + 1.0) - 1.0) / 2.0);
      while (eb * (eb + 1) / 2 > p) --eb;
      while ((eb + 1) * (eb + 2) / 2 <= p) ++eb;
      const std::int64_t ea = p - eb * (eb + 1) / 2;
      const PairElem& A = info[ea];
      const PairElem& B = info[eb];
      if (A.zero && B.zero) continue;

      const PairQuadRule* rule = nullptr;
      std::array<int, 3> oa = {0, 1, 2}, ob = {0, 1, 2};
      if (ea == eb) {
        rule = &rule_id;
      } else {
        int nsh = 0;
        for (int i = 0; i < nvpe; ++i)
          for (int j = 0; j < nvpe; ++j)
            if (A.sorted[i] == B.sorted[j] && A.sorted[i] >= 0) {
              if (nsh < 2) shared[nsh] = A.sorted[i];
              ++nsh;
            }
        if (nsh == 2 && dim == 2) {
          rule = &rule_ed;
          int ia0 = 0, ia1 = 0, ib0 = 0, ib1 = 0;
          for (int k = 0; k < 3; ++k) {
            if (A.g[k] == shared[0]) ia0 = k;
            if (A.g[k] == shared[1]) ia1 = k;
            if (B.g[k] == shared[0]) ib0 = k;
            if (B.g[k] == shared[1]) ib1 = k;
          }
          oa = {ia0, ia1, 3 - ia0 - ia1};
          ob = {ib0, ib1, 3 - ib0 - ib1};
        } else if (nsh == 1) {
          rule = &rule_vx;
          int ia0 = 0, ib0 = 0;
          for (int k = 0; k < nvpe; ++k) {
            if (A.g[k] == shared[0]) ia0 = k;
            if (B.g[k] == shared[0]) ib0 = k;
          }
          if (dim == 2) {
            oa = {ia0, (ia0 + 1) % 3, (ia0 + 2) % 3};
            ob = {ib0, (ib0 + 1) % 3, (ib0 + 2) % 3};
          } else {
            oa = {ia0, 1 - ia0, 2};
            ob = {ib0, 1 - ib0, 2};
          }
        } else {
          const double dc = norm(A.centroid - B.centroid) - A.radius - B.radius;
          const double ratio = std::max(dc, 0.0) / std::max(A.diam, B.diam);
          rule = &disjoint_rules[disjoint_points_per_dir(ratio, t, dim, config)];
        }
      }

      double acc = 0.0;
      Vec2 px, py;
      for (int q = 0; q < rule->size(); ++q) {
        const double vx = value_at(A, oa, rule->x_ref[q], px);
        const double vy = value_at(B, ob, rule->y_ref[q], py);
        const double dx = px[0] - py[0], dy = px[1] - py[1];
        const double d = vx - vy;
        acc += rule->weights[q] * d * d * std::pow(dx * dx + dy * dy, kexp);
      }
      part += (ea == eb ? 1.0 : 2.0) * A.jac * B.jac * acc;
    }
    return part;
  };
  std::function<void(double&)> merge = [&](double& part) { total += part; };
  parallel_blocks<double>(n_pairs, 4096, config.workers, compute, merge);
  return std::sqrt(std::max(0.0, total));
}

double localized_energy_error(const FemFunction& u_h, const ExactSolution& exact,
                              const SubdomainSpec& inner, const SubdomainSpec& outer, double t,
                              const AssemblyConfig& config) {
  const Mesh& mesh = *u_h.mesh;
  const CutoffFunction eta = build_cutoff(mesh, inner, outer);
  const double h = mesh.max_diameter();
  if (eta.separation < 2.0 * h)
    throw std::invalid_argument("localized_energy_error: layer thinner than 2h");
  FemFunction w;
  w.mesh = &mesh;
  w.coefficients = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    w.coefficients[v] = eta.eta[v] * (exact.value(mesh.vertices[v]) - u_h.coefficients[v]);
  const double semi = fractional_seminorm(w, t, nullptr, config);
  const double l2 = l2_norm(w, nullptr);
  return std::sqrt(semi * semi + l2 * l2);
}

std::vector<double> eoc(const std::vector<double>& values, const std::vector<double>& hs) {
  if (values.size() != hs.size() || values.size() < 2)
    throw std::invalid_argument("eoc: need equal lengths >= 2");
  for (size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) throw std::invalid_argument("eoc: values must be positive");
    if (!(hs[k] > 0.0)) throw std::invalid_argument("eoc: hs must be positive");
    if (k > 0 && !(hs[k] < hs[k - 1]))
      throw std::invalid_argument("eoc: hs must be strictly decreasing");
  }
  std::vector<double> out(values.size() - 1);
  for (size_t k = 0; k + 1 < values.size(); ++k)
    out[k] = std::log(values[k] / values[k + 1]) / std::log(hs[k] / hs[k + 1]);
  return out;
}

}  // namespace fraclap
