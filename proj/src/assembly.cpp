#include "fraclap/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "fraclap/grading.hpp"
#include "fraclap/parallel.hpp"

namespace fraclap {

// ---------------------------------------------------------------- grading

std::vector<SubCell2> graded_cells_edge(int local_edge, double ratio, int depth) {
  const Vec2 ref[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const Vec2 V1 = ref[local_edge];
  const Vec2 V2 = ref[(local_edge + 1) % 3];
  const Vec2 A = ref[(local_edge + 2) % 3];
  auto at = [&](double mu, const Vec2& V) -> Vec2 { return mu * A + (1.0 - mu) * V; };
  std::vector<SubCell2> cells;
  double hi = ratio;
  cells.push_back({{A, at(ratio, V1), at(ratio, V2)}});
  for (int k = 1; k < depth; ++k) {
    const double lo = hi * ratio;
    cells.push_back({{at(hi, V1), at(hi, V2), at(lo, V2)}});
    cells.push_back({{at(hi, V1), at(lo, V2), at(lo, V1)}});
    hi = lo;
  }
  cells.push_back({{at(hi, V1), at(hi, V2), V2}});
  cells.push_back({{at(hi, V1), V2, V1}});
  return cells;
}

std::vector<SubCell2> graded_cells_vertex(int local_vertex, double ratio, int depth) {
  const Vec2 ref[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const Vec2 V = ref[local_vertex];
  const Vec2 W1 = ref[(local_vertex + 1) % 3];
  const Vec2 W2 = ref[(local_vertex + 2) % 3];
  auto at = [&](double c, const Vec2& W) -> Vec2 { return V + c * (W - V); };
  std::vector<SubCell2> cells;
  double hi = 1.0;
  for (int k = 0; k < depth; ++k) {
    const double lo = hi * ratio;
    cells.push_back({{at(hi, W1), at(hi, W2), at(lo, W2)}});
    cells.push_back({{at(hi, W1), at(lo, W2), at(lo, W1)}});
    hi = lo;
  }
  cells.push_back({{V, at(hi, W1), at(hi, W2)}});
  return cells;
}

std::vector<SubCell2> uniform_cells(int depth) {
  std::vector<SubCell2> cells = {{{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}}}};
  for (int k = 0; k < depth; ++k) {
    std::vector<SubCell2> next;
    next.reserve(4 * cells.size());
    for (const auto& c : cells) {
      const Vec2 m01 = 0.5 * (c.v[0] + c.v[1]);
      const Vec2 m12 = 0.5 * (c.v[1] + c.v[2]);
      const Vec2 m02 = 0.5 * (c.v[0] + c.v[2]);
      next.push_back({{c.v[0], m01, m02}});
      next.push_back({{c.v[1], m12, m01}});
      next.push_back({{c.v[2], m02, m12}});
      next.push_back({{m01, m12, m02}});
    }
    cells.swap(next);
  }
  return cells;
}

std::vector<std::array<double, 2>> graded_cells_1d(bool toward_left, double ratio, int depth) {
  std::vector<std::array<double, 2>> cells;
  double hi = 1.0;
  for (int k = 0; k < depth; ++k) {
    const double lo = hi * ratio;
    cells.push_back({lo, hi});
    hi = lo;
  }
  cells.push_back({0.0, hi});
  if (!toward_left)
    for (auto& c : cells) c = {1.0 - c[1], 1.0 - c[0]};
  return cells;
}

// ------------------------------------------------------------- constants

double normalization_constant(int dim, double s) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("normalization_constant: dim must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("normalization_constant: s must be in (0,1)");
  return -std::pow(2.0, 2.0 * s) * std::tgamma(s + 0.5 * dim) /
         (std::pow(M_PI, 0.5 * dim) * std::tgamma(-s));
}

// ------------------------------------------------------- boundary geometry

BoundaryGeometry domain_boundary(const Mesh& mesh) {
  BoundaryGeometry bd;
  bd.dim = mesh.dim;
  if (mesh.dim == 1) {
    bd.a = std::numeric_limits<double>::infinity();
    bd.b = -bd.a;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      bd.a = std::min(bd.a, mesh.vertices[v][0]);
      bd.b = std::max(bd.b, mesh.vertices[v][0]);
    }
    return bd;
  }
  if (mesh.boundary_edges.empty()) throw std::runtime_error("domain_boundary: mesh has no boundary");
  std::map<int, int> succ;
  for (const auto& e : mesh.boundary_edges) succ[e[0]] = e[1];
  const int start = succ.begin()->first;
  int cur = start;
  do {
    bd.loop.push_back(mesh.vertices[cur]);
    auto it = succ.find(cur);
    if (it == succ.end()) throw std::runtime_error("domain_boundary: open boundary chain");
    cur = it->second;
  } while (cur != start && bd.loop.size() <= mesh.boundary_edges.size());
  if (bd.loop.size() != mesh.boundary_edges.size())
    throw std::runtime_error("domain_boundary: boundary is not a single loop");
  return bd;
}

namespace {

struct Rule1Dv {
  std::vector<double> x, w;
};

Rule1Dv from_quadrule(const QuadRule& q) {
  Rule1Dv r;
  r.x.resize(q.size());
  r.w = q.weights;
  for (int i = 0; i < q.size(); ++i) r.x[i] = q.points[i][0];
  return r;
}

// Evaluates rho_c by boundary-edge quadrature with precomputed graded rules.
struct ComplementKernel {
  int dim = 2;
  double s = 0.5;
  double kexp = 0.0;  // |x-y|^(-dim-2s) = (r^2)^kexp
  double a = 0.0, b = 0.0;
  std::vector<Vec2> loop, edge_vec;
  std::vector<double> edge_len;
  Rule1Dv far_rule, mid_rule;
  std::vector<Rule1Dv> graded;  // graded[k]: k+1 levels toward 0
  static constexpr int kmax = 48;

  ComplementKernel(const BoundaryGeometry& bd, double s_, const AssemblyConfig& cfg) {
    dim = bd.dim;
    s = s_;
    kexp = -0.5 * (dim + 2.0 * s);
    a = bd.a;
    b = bd.b;
    loop = bd.loop;
    if (dim == 2) {
      const int m = static_cast<int>(loop.size());
      edge_vec.resize(m);
      edge_len.resize(m);
      for (int i = 0; i < m; ++i) {
        edge_vec[i] = loop[(i + 1) % m] - loop[i];
        edge_len[i] = norm(edge_vec[i]);
      }
      far_rule = from_quadrule(gauss_interval(3));
      mid_rule = from_quadrule(gauss_interval(std::max(6, cfg.exterior_edge_base_order - 2)));
      graded.reserve(kmax);
      for (int k = 1; k <= kmax; ++k)
        graded.push_back(from_quadrule(adaptive_edge_rule(std::pow(0.5, k), cfg.exterior_edge_base_order)));
    }
  }

  double side_integral(const Vec2& x, const Vec2& p, const Vec2& e, double t0, double len,
                       double dist, double edge_length) const {
    // integral over tau between t0 and t0+len, graded toward t0
    if (std::abs(len) < 1e-14) return 0.0;
    const double r = dist / (edge_length * std::abs(len));
    const Rule1Dv* rule;
    if (r >= 1.0)
      rule = &mid_rule;
    else {
      int k = static_cast<int>(std::ceil(std::log2(1.0 / r)));
      k = std::min(std::max(k, 1), kmax);
      rule = &graded[k - 1];
    }
    double acc = 0.0;
    for (size_t i = 0; i < rule->x.size(); ++i) {
      const double tau = t0 + len * rule->x[i];
      const double dx = x[0] - (p[0] + tau * e[0]);
      const double dy = x[1] - (p[1] + tau * e[1]);
      acc += rule->w[i] * std::pow(dx * dx + dy * dy, kexp);
    }
    return acc * std::abs(len);
  }

  double eval(const Vec2& x) const {
    if (dim == 1) {
      return (std::pow(b - x[0], -2.0 * s) + std::pow(x[0] - a, -2.0 * s)) / (2.0 * s);
    }
    double acc = 0.0;
    const int m = static_cast<int>(loop.size());
    for (int i = 0; i < m; ++i) {
      const Vec2& p = loop[i];
      const Vec2& e = edge_vec[i];
      const double L = edge_len[i];
      const double de = cross(p - x, e) / L;  // (p-x) . n_out
      if (de == 0.0) continue;
      const double tstar = std::clamp(dot(x - p, e) / (L * L), 0.0, 1.0);
      const double cx = x[0] - (p[0] + tstar * e[0]);
      const double cy = x[1] - (p[1] + tstar * e[1]);
      const double dist = std::sqrt(cx * cx + cy * cy);
      double integral = 0.0;
      if (dist >= 2.0 * L) {
        for (size_t q = 0; q < far_rule.x.size(); ++q) {
          const double tau = far_rule.x[q];
          const double dx = x[0] - (p[0] + tau * e[0]);
          const double dy = x[1] - (p[1] + tau * e[1]);
          integral += far_rule.w[q] * std::pow(dx * dx + dy * dy, kexp);
        }
      } else {
        integral = side_integral(x, p, e, tstar, -tstar, dist, L) +
                   side_integral(x, p, e, tstar, 1.0 - tstar, dist, L);
      }
      acc += de * integral * L;
    }
    return acc / (2.0 * s);
  }
};

bool point_in_polygon(const Vec2& x, const std::vector<Vec2>& loop) {
  bool inside = false;
  const int m = static_cast<int>(loop.size());
  for (int i = 0; i < m; ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % m];
    if ((p[1] > x[1]) != (q[1] > x[1])) {
      const double xi = p[0] + (x[1] - p[1]) * (q[0] - p[0]) / (q[1] - p[1]);
      if (x[0] < xi) inside = !inside;
    }
  }
  return inside;
}

double dist_point_segment(const Vec2& x, const Vec2& p, const Vec2& q) {
  const Vec2 e = q - p;
  const double L2 = norm2(e);
  const double t = L2 > 0.0 ? std::clamp(dot(x - p, e) / L2, 0.0, 1.0) : 0.0;
  return norm(x - (p + t * e));
}

}  // namespace

double exterior_weight(const Vec2& x, const BoundaryGeometry& bd, double s,
                       const AssemblyConfig& config) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("exterior_weight: s must be in (0,1)");
  if (bd.dim == 1) {
    if (!(x[0] > bd.a && x[0] < bd.b))
      throw std::invalid_argument("exterior_weight: point not strictly inside the interval");
    return (std::pow(bd.b - x[0], -2.0 * s) + std::pow(x[0] - bd.a, -2.0 * s)) / (2.0 * s);
  }
  if (!point_in_polygon(x, bd.loop))
    throw std::invalid_argument("exterior_weight: point not inside the polygon");
  const int m = static_cast<int>(bd.loop.size());
  for (int i = 0; i < m; ++i)
    if (dist_point_segment(x, bd.loop[i], bd.loop[(i + 1) % m]) < 1e-13)
      throw std::invalid_argument("exterior_weight: point lies on the boundary");
  ComplementKernel ck(bd, s, config);
  return ck.eval(x);
}

// --------------------------------------------------------------- assembly

namespace {

struct Trip {
  int i, j;
  double v;
};

struct ElemInfo {
  std::array<Vec2, 3> v;
  std::array<int, 3> g;
  std::array<int, 3> sorted;
  Vec2 centroid;
  double radius = 0.0, diam = 0.0, jac = 0.0;  // jac: 2|T| in 2D, |T| in 1D
};

struct FlatPairRule {
  int n = 0;
  std::vector<double> xr1, xr2, yr1, yr2, w;
  std::vector<double> lx0, lx1, lx2, ly0, ly1, ly2;
};

FlatPairRule flatten(const PairQuadRule& r) {
  FlatPairRule f;
  f.n = r.size();
  f.xr1.resize(f.n);
  f.xr2.resize(f.n);
  f.yr1.resize(f.n);
  f.yr2.resize(f.n);
  f.w = r.weights;
  f.lx0.resize(f.n);
  f.lx1.resize(f.n);
  f.lx2.resize(f.n);
  f.ly0.resize(f.n);
  f.ly1.resize(f.n);
  f.ly2.resize(f.n);
  for (int q = 0; q < f.n; ++q) {
    f.xr1[q] = r.x_ref[q][0];
    f.xr2[q] = r.dim == 2 ? r.x_ref[q][1] : 0.0;
    f.yr1[q] = r.y_ref[q][0];
    f.yr2[q] = r.dim == 2 ? r.y_ref[q][1] : 0.0;
    f.lx0[q] = 1.0 - f.xr1[q] - f.xr2[q];
    f.lx1[q] = f.xr1[q];
    f.lx2[q] = f.xr2[q];
    f.ly0[q] = 1.0 - f.yr1[q] - f.yr2[q];
    f.ly1[q] = f.yr1[q];
    f.ly2[q] = f.yr2[q];
  }
  return f;
}

struct ElemRule {
  int n = 0;
  std::vector<double> r1, r2, wt, l0, l1, l2;
};

ElemRule make_elem_rule(int dim, int points_per_dir) {
  ElemRule e;
  if (dim == 1) {
    QuadRule q = gauss_interval(points_per_dir);
    e.n = q.size();
    for (int i = 0; i < e.n; ++i) {
      e.r1.push_back(q.points[i][0]);
      e.r2.push_back(0.0);
      e.wt.push_back(q.weights[i]);
    }
  } else {
    QuadRule q = gauss_triangle(std::max(1, 2 * points_per_dir - 2));
    e.n = q.size();
    for (int i = 0; i < e.n; ++i) {
      e.r1.push_back(q.points[i][0]);
      e.r2.push_back(q.points[i][1]);
      e.wt.push_back(q.weights[i]);
    }
  }
  for (int i = 0; i < e.n; ++i) {
    e.l0.push_back(1.0 - e.r1[i] - e.r2[i]);
    e.l1.push_back(e.r1[i]);
    e.l2.push_back(e.r2[i]);
  }
  return e;
}

int count_shared(const std::array<int, 3>& a, const std::array<int, 3>& b, int nv,
                 std::array<int, 2>& shared) {
  int c = 0;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      if (a[i] == b[j]) {
        if (c < 2) shared[c] = a[i];
        ++c;
      }
  return c;
}

}  // namespace

StiffnessSystem assemble_stiffness(const Mesh& mesh, double s, const AssemblyConfig& config) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("assemble_stiffness: s must be in (0,1)");
  if (config.disjoint_order_far < 1 || config.disjoint_order_near < 1 ||
      config.disjoint_order_contact < 1 || config.disjoint_order_contact > 11 ||
      !(config.separation_ratio > 0.0))
    throw std::invalid_argument("assemble_stiffness: bad disjoint-rule configuration");
  const int dim = mesh.dim;
  const int nvpe = mesh.verts_per_element();
  const int E = mesh.n_elements();

  StiffnessSystem sys;
  sys.mesh = &mesh;
  sys.s = s;
  sys.C_ds = normalization_constant(dim, s);

  sys.free_of_vertex.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.boundary_vertex[v]) {
      sys.free_of_vertex[v] = static_cast<int>(sys.vertex_of_free.size());
      sys.vertex_of_free.push_back(v);
    }
  const int nf = sys.n_free();
  sys.K = Eigen::MatrixXd::Zero(nf, nf);
  sys.F = Eigen::VectorXd::Zero(nf);

  std::vector<ElemInfo> info(E);
  for (int e = 0; e < E; ++e) {
    ElemInfo& ei = info[e];
    for (int k = 0; k < nvpe; ++k) {
      ei.g[k] = mesh.elements[e][k];
      ei.v[k] = mesh.vertices[ei.g[k]];
      ei.sorted[k] = ei.g[k];
    }
    if (nvpe == 2) ei.sorted[2] = ei.g[2] = -1;
    std::sort(ei.sorted.begin(), ei.sorted.begin() + nvpe);
    ei.centroid = {0.0, 0.0};
    for (int k = 0; k < nvpe; ++k) ei.centroid = ei.centroid + (1.0 / nvpe) * ei.v[k];
    for (int k = 0; k < nvpe; ++k) ei.radius = std::max(ei.radius, norm(ei.v[k] - ei.centroid));
    ei.diam = mesh.element_diameter[e];
    ei.jac = dim == 1 ? mesh.element_volume[e] : 2.0 * mesh.element_volume[e];
  }

  const int so = config.singular_order > 0 ? config.singular_order : (dim == 1 ? 6 : 5);
  const FlatPairRule rule_id = flatten(singular_pair_rule(PairCase::identical, so, s, dim));
  const FlatPairRule rule_vx = flatten(singular_pair_rule(PairCase::shared_vertex, so, s, dim));
  FlatPairRule rule_ed;
  if (dim == 2) rule_ed = flatten(singular_pair_rule(PairCase::shared_edge, so, s, dim));

  const int n_far = config.disjoint_order_far;
  const int n_max = std::max(config.disjoint_order_contact, std::max(config.disjoint_order_near, n_far));
  std::vector<ElemRule> disjoint_rules(n_max + 1);
  for (int n = std::min(n_far, config.disjoint_order_near); n <= n_max; ++n)
    disjoint_rules[n] = make_elem_rule(dim, n);

  // far-band nodes mapped once per element
  const ElemRule& er_far = disjoint_rules[n_far];
  std::vector<double> farx(static_cast<size_t>(E) * er_far.n), fary(farx.size());
  for (int e = 0; e < E; ++e) {
    const ElemInfo& ei = info[e];
    for (int q = 0; q < er_far.n; ++q) {
      const double r1 = er_far.r1[q], r2 = er_far.r2[q];
      farx[static_cast<size_t>(e) * er_far.n + q] =
          ei.v[0][0] + r1 * (ei.v[1][0] - ei.v[0][0]) + (dim == 2 ? r2 * (ei.v[2][0] - ei.v[0][0]) : 0.0);
      fary[static_cast<size_t>(e) * er_far.n + q] =
          ei.v[0][1] + r1 * (ei.v[1][1] - ei.v[0][1]) + (dim == 2 ? r2 * (ei.v[2][1] - ei.v[0][1]) : 0.0);
    }
  }

  const double kexp = -0.5 * (dim + 2.0 * s);
  const double Chalf = 0.5 * sys.C_ds;

  // ------------------------------------------------ interior double integral
  const std::int64_t n_pairs = static_cast<std::int64_t>(E) * (E + 1) / 2;

  auto local_coords = [&](const ElemInfo& ei, const std::array<int, 3>& order, Vec2& origin, Vec2& e1,
                          Vec2& e2) {
    // order holds local indices into ei vertex arrays
    origin = ei.v[order[0]];
    e1 = ei.v[order[1]] - origin;
    e2 = dim == 2 ? ei.v[order[2]] - origin : Vec2{0.0, 0.0};
  };

  auto compute_block = [&](std::int64_t begin, std::int64_t end) {
    std::vector<Trip> out;
    out.reserve(static_cast<size_t>(end - begin) * (dim == 1 ? 10 : 21));
    double acc[6][6];
    int gdof[6];
    std::array<int, 2> shared{};
    for (std::int64_t p = begin; p < end; ++p) {
      // decode p = eb*(eb+1)/2 + ea, ea <= eb
      std::int64_t eb = static_cast<std::int64_t>((std::sqrt(8.0 * static_cast<double>(p) + 1.0) - 1.0) / 2.0);
      while (eb * (eb + 1) / 2 > p) --eb;
      while ((eb + 1) * (eb + 2) / 2 <= p) ++eb;
      const std::int64_t ea = p - eb * (eb + 1) / 2;
      const ElemInfo& A = info[ea];
      const ElemInfo& B = info[eb];

      const FlatPairRule* fr = nullptr;
      const ElemRule* dr = nullptr;
      std::array<int, 3> oa = {0, 1, 2}, ob = {0, 1, 2};
      int ndof = 0;
      int nsh = 0;
      if (ea == eb) {
        fr = &rule_id;
        ndof = nvpe;
        nsh = nvpe;
      } else {
        nsh = count_shared(A.sorted, B.sorted, nvpe, shared);
        if (nsh == 2 && dim == 2) {
          fr = &rule_ed;
          ndof = 4;
        } else if (nsh == 1) {
          fr = &rule_vx;
          ndof = 2 * nvpe - 1;
        } else {
          const double dc = norm(A.centroid - B.centroid) - A.radius - B.radius;
          const double ratio = std::max(dc, 0.0) / std::max(A.diam, B.diam);
          dr = &disjoint_rules[disjoint_points_per_dir(ratio, s, dim, config)];
          ndof = 2 * nvpe;
        }
      }

      for (int a = 0; a < ndof; ++a)
        for (int b = a; b < ndof; ++b) acc[a][b] = 0.0;

      if (fr != nullptr) {
        // arrange local orders per the rule conventions
        if (ea != eb) {
          if (nsh == 2) {
            // shared edge first, same order in both
            int ia0 = 0, ia1 = 0, ib0 = 0, ib1 = 0;
            for (int k = 0; k < 3; ++k) {
              if (A.g[k] == shared[0]) ia0 = k;
              if (A.g[k] == shared[1]) ia1 = k;
              if (B.g[k] == shared[0]) ib0 = k;
              if (B.g[k] == shared[1]) ib1 = k;
            }
            oa = {ia0, ia1, 3 - ia0 - ia1};
            ob = {ib0, ib1, 3 - ib0 - ib1};
          } else {
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
          }
        }
        Vec2 ax, ae1, ae2, bx, be1, be2;
        local_coords(A, oa, ax, ae1, ae2);
        local_coords(B, ob, bx, be1, be2);
        const int n = fr->n;
        for (int q = 0; q < n; ++q) {
          const double xr1 = fr->xr1[q], xr2 = fr->xr2[q];
          const double yr1 = fr->yr1[q], yr2 = fr->yr2[q];
          const double px = ax[0] + xr1 * ae1[0] + xr2 * ae2[0];
          const double py = ax[1] + xr1 * ae1[1] + xr2 * ae2[1];
          const double qx = bx[0] + yr1 * be1[0] + yr2 * be2[0];
          const double qy = bx[1] + yr1 * be1[1] + yr2 * be2[1];
          const double dx = px - qx, dy = py - qy;
          const double kv = fr->w[q] * std::pow(dx * dx + dy * dy, kexp);
          double d[6];
          if (ea == eb) {
            d[0] = fr->lx0[q] - fr->ly0[q];
            d[1] = fr->lx1[q] - fr->ly1[q];
            d[2] = fr->lx2[q] - fr->ly2[q];
          } else if (nsh == 2) {
            d[0] = fr->lx0[q] - fr->ly0[q];
            d[1] = fr->lx1[q] - fr->ly1[q];
            d[2] = fr->lx2[q];
            d[3] = -fr->ly2[q];
          } else if (dim == 2) {
            d[0] = fr->lx0[q] - fr->ly0[q];
            d[1] = fr->lx1[q];
            d[2] = fr->lx2[q];
            d[3] = -fr->ly1[q];
            d[4] = -fr->ly2[q];
          } else {
            d[0] = fr->lx0[q] - fr->ly0[q];
            d[1] = fr->lx1[q];
            d[2] = -fr->ly1[q];
          }
          for (int a = 0; a < ndof; ++a) {
            const double da = d[a] * kv;
            for (int b = a; b < ndof; ++b) acc[a][b] += da * d[b];
          }
        }
        // global dof ids in local order
        if (ea == eb) {
          for (int k = 0; k < nvpe; ++k) gdof[k] = A.g[k];
        } else if (nsh == 2) {
          gdof[0] = shared[0];
          gdof[1] = shared[1];
          gdof[2] = A.g[oa[2]];
          gdof[3] = B.g[ob[2]];
        } else if (dim == 2) {
          gdof[0] = shared[0];
          gdof[1] = A.g[oa[1]];
          gdof[2] = A.g[oa[2]];
          gdof[3] = B.g[ob[1]];
          gdof[4] = B.g[ob[2]];
        } else {
          gdof[0] = shared[0];
          gdof[1] = A.g[oa[1]];
          gdof[2] = B.g[ob[1]];
        }
      } else {
        // disjoint tensor rule
        const int n = dr->n;
        const bool use_far = dr == &er_far;
        double xq[121][2], yq[121][2];
        if (use_far) {
          for (int q = 0; q < n; ++q) {
            xq[q][0] = farx[static_cast<size_t>(ea) * n + q];
            xq[q][1] = fary[static_cast<size_t>(ea) * n + q];
            yq[q][0] = farx[static_cast<size_t>(eb) * n + q];
            yq[q][1] = fary[static_cast<size_t>(eb) * n + q];
          }
        } else {
          for (int q = 0; q < n; ++q) {
            const double r1 = dr->r1[q], r2 = dr->r2[q];
            xq[q][0] = A.v[0][0] + r1 * (A.v[1][0] - A.v[0][0]) + (dim == 2 ? r2 * (A.v[2][0] - A.v[0][0]) : 0.0);
            xq[q][1] = A.v[0][1] + r1 * (A.v[1][1] - A.v[0][1]) + (dim == 2 ? r2 * (A.v[2][1] - A.v[0][1]) : 0.0);
            yq[q][0] = B.v[0][0] + r1 * (B.v[1][0] - B.v[0][0]) + (dim == 2 ? r2 * (B.v[2][0] - B.v[0][0]) : 0.0);
            yq[q][1] = B.v[0][1] + r1 * (B.v[1][1] - B.v[0][1]) + (dim == 2 ? r2 * (B.v[2][1] - B.v[0][1]) : 0.0);
          }
        }
        for (int qi = 0; qi < n; ++qi) {
          const double wxi = dr->wt[qi];
          const double la0 = dr->l0[qi], la1 = dr->l1[qi], la2 = dr->l2[qi];
          for (int qj = 0; qj < n; ++qj) {
            const double dx = xq[qi][0] - yq[qj][0];
            const double dy = xq[qi][1] - yq[qj][1];
            const double kv = wxi * dr->wt[qj] * std::pow(dx * dx + dy * dy, kexp);
            double d[6];
            d[0] = la0;
            d[1] = la1;
            if (dim == 2) {
              d[2] = la2;
              d[3] = -dr->l0[qj];
              d[4] = -dr->l1[qj];
              d[5] = -dr->l2[qj];
            } else {
              d[2] = -dr->l0[qj];
              d[3] = -dr->l1[qj];
            }
            for (int a = 0; a < ndof; ++a) {
              const double da = d[a] * kv;
              for (int b = a; b < ndof; ++b) acc[a][b] += da * d[b];
            }
          }
        }
        for (int k = 0; k < nvpe; ++k) {
          gdof[k] = A.g[k];
          gdof[nvpe + k] = B.g[k];
        }
      }

      const double scale = (ea == eb ? 1.0 : 2.0) * Chalf * A.jac * B.jac;
      for (int a = 0; a < ndof; ++a) {
        const int fa = sys.free_of_vertex[gdof[a]];
        if (fa < 0) continue;
        for (int b = a; b < ndof; ++b) {
          const int fb = sys.free_of_vertex[gdof[b]];
          if (fb < 0) continue;
          out.push_back({std::min(fa, fb), std::max(fa, fb), scale * acc[a][b]});
        }
      }
    }
    return out;
  };

  std::function<std::vector<Trip>(std::int64_t, std::int64_t)> compute_fn = compute_block;
  std::function<void(std::vector<Trip>&)> merge_fn = [&](std::vector<Trip>& trips) {
    for (const Trip& t : trips) sys.K(t.i, t.j) += t.v;
  };
  parallel_blocks<std::vector<Trip>>(n_pairs, 8192, config.workers, compute_fn, merge_fn);

  // -------------------------------------------------- complement contribution
  const BoundaryGeometry bd = domain_boundary(mesh);
  const ComplementKernel ck(bd, s, config);

  // vertex distances to the boundary
  std::vector<double> vdist(mesh.n_vertices(), 0.0);
  if (dim == 1) {
    for (int v = 0; v < mesh.n_vertices(); ++v)
      vdist[v] = std::min(mesh.vertices[v][0] - bd.a, bd.b - mesh.vertices[v][0]);
  } else {
    const int m = static_cast<int>(bd.loop.size());
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        dmin = std::min(dmin, dist_point_segment(mesh.vertices[v], bd.loop[i], bd.loop[(i + 1) % m]));
      vdist[v] = dmin;
    }
  }

  std::set<std::pair<int, int>> bedges;
  for (const auto& e : mesh.boundary_edges) bedges.insert(std::minmax(e[0], e[1]));

  const QuadRule cell_rule2 = gauss_triangle(config.exterior_cell_order);
  const QuadRule cell_rule1 = gauss_interval(std::max(4, (config.exterior_cell_order + 1) / 2 + 2));

  auto compute_ext = [&](std::int64_t begin, std::int64_t end) {
    std::vector<Trip> out;
    double loc[3][3];
    for (std::int64_t e = begin; e < end; ++e) {
      const ElemInfo& ei = info[e];
      for (int a = 0; a < nvpe; ++a)
        for (int b = a; b < nvpe; ++b) loc[a][b] = 0.0;

      if (dim == 1) {
        const double x0 = ei.v[0][0], h = ei.v[1][0] - ei.v[0][0];
        const bool left_closer = (x0 - bd.a) < (bd.b - (x0 + h));
        const double dist = std::min(x0 - bd.a, bd.b - (x0 + h));
        int depth = 12;
        if (dist < h) depth = 24;
        auto cells = graded_cells_1d(left_closer, 0.25, depth);
        for (const auto& c : cells) {
          const double len = c[1] - c[0];
          for (int q = 0; q < cell_rule1.size(); ++q) {
            const double r = c[0] + len * cell_rule1.points[q][0];
            const double w = len * cell_rule1.weights[q];
            const double rho = ck.eval({x0 + r * h, 0.0});
            const double l0 = 1.0 - r, l1 = r;
            loc[0][0] += w * l0 * l0 * rho;
            loc[0][1] += w * l0 * l1 * rho;
            loc[1][1] += w * l1 * l1 * rho;
          }
        }
      } else {
        // pick grading by the element's boundary contact
        int bedge = -1, bvert = -1;
        for (int k = 0; k < 3 && bedge < 0; ++k)
          if (bedges.count(std::minmax(ei.g[k], ei.g[(k + 1) % 3]))) bedge = k;
        for (int k = 0; k < 3 && bvert < 0; ++k)
          if (mesh.boundary_vertex[ei.g[k]]) bvert = k;
        double dmin = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) dmin = std::min(dmin, vdist[ei.g[k]]);

        std::vector<SubCell2> cells;
        if (bedge >= 0)
          cells = graded_cells_edge(bedge, 0.25, config.exterior_grade_depth);
        else if (bvert >= 0)
          cells = graded_cells_vertex(bvert, 0.25, config.exterior_grade_depth);
        else if (dmin < 2.0 * ei.diam) {
          const int depth = std::clamp(
              static_cast<int>(std::ceil(std::log2(2.0 * ei.diam / std::max(dmin, 1e-30)))), 1, 3);
          cells = uniform_cells(depth);
        } else {
          cells = uniform_cells(0);
        }

        for (const auto& c : cells) {
          const Vec2 d1 = c.v[1] - c.v[0];
          const Vec2 d2 = c.v[2] - c.v[0];
          const double area2 = std::abs(cross(d1, d2));  // = 2 * reference area of the cell
          if (area2 == 0.0) continue;
          for (int q = 0; q < cell_rule2.size(); ++q) {
            const double u1 = cell_rule2.points[q][0], u2 = cell_rule2.points[q][1];
            const double R1 = c.v[0][0] + u1 * d1[0] + u2 * d2[0];
            const double R2 = c.v[0][1] + u1 * d1[1] + u2 * d2[1];
            const Vec2 x{ei.v[0][0] + R1 * (ei.v[1][0] - ei.v[0][0]) + R2 * (ei.v[2][0] - ei.v[0][0]),
                         ei.v[0][1] + R1 * (ei.v[1][1] - ei.v[0][1]) + R2 * (ei.v[2][1] - ei.v[0][1])};
            const double w = cell_rule2.weights[q] * area2;
            const double rho = ck.eval(x);
            const double l[3] = {1.0 - R1 - R2, R1, R2};
            for (int a = 0; a < 3; ++a)
              for (int b = a; b < 3; ++b) loc[a][b] += w * l[a] * l[b] * rho;
          }
        }
      }

      const double scale = sys.C_ds * ei.jac;
      for (int a = 0; a < nvpe; ++a) {
        const int fa = sys.free_of_vertex[ei.g[a]];
        if (fa < 0) continue;
        for (int b = a; b < nvpe; ++b) {
          const int fb = sys.free_of_vertex[ei.g[b]];
          if (fb < 0) continue;
          out.push_back({std::min(fa, fb), std::max(fa, fb), scale * loc[a][b]});
        }
      }
    }
    return out;
  };

  if (!config.interior_only) {
    std::function<std::vector<Trip>(std::int64_t, std::int64_t)> ext_fn = compute_ext;
    parallel_blocks<std::vector<Trip>>(E, 64, config.workers, ext_fn, merge_fn);
  }

  // mirror the upper triangle
  for (int i = 0; i < nf; ++i)
    for (int j = i + 1; j < nf; ++j) sys.K(j, i) = sys.K(i, j);

  for (int i = 0; i < nf; ++i)
    if (!(sys.K(i, i) > 0.0))
      throw std::runtime_error("assemble_stiffness: nonpositive diagonal entry (broken quadrature)");

  return sys;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                              int order) {
  if (order < 4) order = 4;
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.n_vertices());
  if (mesh.dim == 1) {
    const QuadRule q = gauss_interval(order);
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto& el = mesh.elements[e];
      const double x0 = mesh.vertices[el[0]][0];
      const double h = mesh.element_volume[e];
      for (int i = 0; i < q.size(); ++i) {
        const double r = q.points[i][0];
        const double fv = f({x0 + r * h, 0.0}) * q.weights[i] * h;
        F[el[0]] += fv * (1.0 - r);
        F[el[1]] += fv * r;
      }
    }
    return F;
  }
  const QuadRule q = gauss_triangle(order);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const Vec2 v0 = mesh.vertices[el[0]];
    const Vec2 e1 = mesh.vertices[el[1]] - v0;
    const Vec2 e2 = mesh.vertices[el[2]] - v0;
    const double jac = 2.0 * mesh.element_volume[e];
    for (int i = 0; i < q.size(); ++i) {
      const double r1 = q.points[i][0], r2 = q.points[i][1];
      const Vec2 x = v0 + r1 * e1 + r2 * e2;
      const double fv = f(x) * q.weights[i] * jac;
      F[el[0]] += fv * (1.0 - r1 - r2);
      F[el[1]] += fv * r1;
      F[el[2]] += fv * r2;
    }
  }
  return F;
}

void attach_load(StiffnessSystem& system, const Eigen::VectorXd& full_load) {
  if (full_load.size() != system.mesh->n_vertices())
    throw std::invalid_argument("attach_load: load vector size mismatch");
  system.F.resize(system.n_free());
  for (int i = 0; i < system.n_free(); ++i) system.F[i] = full_load[system.vertex_of_free[i]];
}

Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  const int nvpe = mesh.verts_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const double vol = mesh.element_volume[e];
    const double off = mesh.dim == 1 ? vol / 6.0 : vol / 12.0;
    const double diag = 2.0 * off;
    for (int a = 0; a < nvpe; ++a)
      for (int b = 0; b < nvpe; ++b)
        trips.emplace_back(el[a], el[b], a == b ? diag : off);
  }
  Eigen::SparseMatrix<double> M(mesh.n_vertices(), mesh.n_vertices());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

void dump_system(const StiffnessSystem& system, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_system: cannot open " + path);
  f.write("FRLK1", 5);
  const std::int64_t n = system.K.rows();
  const std::int64_t nf = system.F.size();
  f.write(reinterpret_cast<const char*>(&n), 8);
  f.write(reinterpret_cast<const char*>(&nf), 8);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      const double v = system.K(i, j);
      f.write(reinterpret_cast<const char*>(&v), 8);
    }
  f.write(reinterpret_cast<const char*>(system.F.data()), 8 * nf);
}

void read_system_dump(const std::string& path, Eigen::MatrixXd& K, Eigen::VectorXd& F) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_system_dump: cannot open " + path);
  char magic[5];
  f.read(magic, 5);
  if (std::memcmp(magic, "FRLK1", 5) != 0) throw std::runtime_error("read_system_dump: bad magic");
  std::int64_t n = 0, nf = 0;
  f.read(reinterpret_cast<char*>(&n), 8);
  f.read(reinterpret_cast<char*>(&nf), 8);
  K.resize(n, n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) f.read(reinterpret_cast<char*>(&K(i, j)), 8);
  F.resize(nf);
  f.read(reinterpret_cast<char*>(F.data()), 8 * nf);
  if (!f) throw std::runtime_error("read_system_dump: truncated file");
}

}  // namespace fraclap
