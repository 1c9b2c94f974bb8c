#include "fraclap/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fraclap {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

}  // namespace

double Mesh::max_diameter() const {
  double h = 0.0;
  for (double d : element_diameter) h = std::max(h, d);
  return h;
}

void Mesh::finalize() {
  const int nv = n_vertices();
  const int ne = n_elements();
  element_diameter.assign(ne, 0.0);
  element_volume.assign(ne, 0.0);
  vertex_elements.assign(nv, {});
  boundary_edges.clear();
  boundary_vertex.assign(nv, 0);

  if (dim == 1) {
    for (int e = 0; e < ne; ++e) {
      auto& el = elements[e];
      if (el[0] < 0 || el[0] >= nv || el[1] < 0 || el[1] >= nv)
        throw std::runtime_error("mesh: element vertex index out of range");
      if (vertices[el[0]][0] > vertices[el[1]][0]) std::swap(el[0], el[1]);
      const double vol = vertices[el[1]][0] - vertices[el[0]][0];
      if (!(vol > 0.0)) throw std::runtime_error("mesh: degenerate interval element");
      element_volume[e] = vol;
      element_diameter[e] = vol;
      vertex_elements[el[0]].push_back(e);
      vertex_elements[el[1]].push_back(e);
    }
    for (int v = 0; v < nv; ++v)
      if (vertex_elements[v].size() == 1) boundary_vertex[v] = 1;
    return;
  }

  std::map<std::pair<int, int>, std::pair<int, int>> edge_use;  // (vmin,vmax) -> (count, owner)
  for (int e = 0; e < ne; ++e) {
    auto& el = elements[e];
    for (int k = 0; k < 3; ++k)
      if (el[k] < 0 || el[k] >= nv)
        throw std::runtime_error("mesh: element vertex index out of range");
    double sa = signed_area(vertices[el[0]], vertices[el[1]], vertices[el[2]]);
    if (sa < 0.0) {
      std::swap(el[1], el[2]);
      sa = -sa;
    }
    if (!(sa > 0.0)) throw std::runtime_error("mesh: degenerate triangle");
    element_volume[e] = sa;
    double d01 = norm(vertices[el[1]] - vertices[el[0]]);
    double d12 = norm(vertices[el[2]] - vertices[el[1]]);
    double d02 = norm(vertices[el[2]] - vertices[el[0]]);
    element_diameter[e] = std::max({d01, d12, d02});
    for (int k = 0; k < 3; ++k) {
      vertex_elements[el[k]].push_back(e);
      int a = el[k], b = el[(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_use.find(key);
      if (it == edge_use.end())
        edge_use[key] = {1, e};
      else
        it->second.first += 1;
    }
  }
  for (int e = 0; e < ne; ++e) {
    const auto& el = elements[e];
    for (int k = 0; k < 3; ++k) {
      int a = el[k], b = el[(k + 1) % 3];
      auto it = edge_use.find(std::minmax(a, b));
      if (it->second.first == 1) {
        // oriented (a,b): with positive element orientation the domain lies left
        boundary_edges.push_back({a, b});
        boundary_vertex[a] = 1;
        boundary_vertex[b] = 1;
      } else if (it->second.first > 2) {
        throw std::runtime_error("mesh: edge shared by more than two elements");
      }
    }
  }
}

Mesh build_interval_mesh(int n_elements) {
  if (n_elements < 2) throw std::invalid_argument("build_interval_mesh: need n_elements >= 2");
  Mesh m;
  m.dim = 1;
  m.domain = DomainKind::interval;
  const double h = 2.0 / n_elements;
  m.vertices.resize(n_elements + 1);
  for (int i = 0; i <= n_elements; ++i) m.vertices[i] = {-1.0 + h * i, 0.0};
  m.vertices.front() = {-1.0, 0.0};
  m.vertices.back() = {1.0, 0.0};
  m.elements.resize(n_elements);
  for (int e = 0; e < n_elements; ++e) m.elements[e] = {e, e + 1, -1};
  m.parent.assign(n_elements, -1);
  m.finalize();
  return m;
}

Mesh build_disc_mesh(int boundary_segments) {
  if (boundary_segments < 8) throw std::invalid_argument("build_disc_mesh: need boundary_segments >= 8");
  Mesh m;
  m.dim = 2;
  m.domain = DomainKind::disc_polygon;
  const int n = boundary_segments;
  m.vertices.resize(n + 1);
  m.vertices[0] = {0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    m.vertices[k + 1] = {std::cos(t), std::sin(t)};
  }
  m.elements.resize(n);
  for (int k = 0; k < n; ++k) m.elements[k] = {0, k + 1, (k + 1) % n + 1};
  m.parent.assign(n, -1);
  m.finalize();
  return m;
}

Mesh refine_uniform(const Mesh& mesh, bool project_boundary) {
  Mesh out;
  out.dim = mesh.dim;
  out.domain = mesh.domain;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;

  if (mesh.dim == 1) {
    out.elements.reserve(2 * mesh.n_elements());
    out.parent.reserve(2 * mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto& el = mesh.elements[e];
      const int mid = static_cast<int>(out.vertices.size());
      out.vertices.push_back(0.5 * (mesh.vertices[el[0]] + mesh.vertices[el[1]]));
      out.elements.push_back({el[0], mid, -1});
      out.elements.push_back({mid, el[1], -1});
      out.parent.push_back(e);
      out.parent.push_back(e);
    }
    out.finalize();
    return out;
  }

  std::map<std::pair<int, int>, int> midpoint;
  auto mid_of = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(out.vertices.size());
    Vec2 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    out.vertices.push_back(p);
    midpoint[key] = idx;
    return idx;
  };

  out.elements.reserve(4 * mesh.n_elements());
  out.parent.reserve(4 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const int m01 = mid_of(el[0], el[1]);
    const int m12 = mid_of(el[1], el[2]);
    const int m02 = mid_of(el[0], el[2]);
    out.elements.push_back({el[0], m01, m02});
    out.elements.push_back({el[1], m12, m01});
    out.elements.push_back({el[2], m02, m12});
    out.elements.push_back({m01, m12, m02});
    for (int k = 0; k < 4; ++k) out.parent.push_back(e);
  }

  if (project_boundary && mesh.domain == DomainKind::disc_polygon) {
    for (const auto& be : mesh.boundary_edges) {
      const int mid = midpoint.at(std::minmax(be[0], be[1]));
      Vec2& p = out.vertices[mid];
      const double r = norm(p);
      if (r > 0.0) p = (1.0 / r) * p;
    }
  }
  out.finalize();
  return out;
}

double shape_regularity(const Mesh& mesh) {
  double g = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double v = mesh.element_volume[e];
    const double d = mesh.element_diameter[e];
    g = std::max(g, d / std::pow(v, 1.0 / mesh.dim));
  }
  return g;
}

SubdomainSpec SubdomainSpec::axis_square(const Vec2& center, double side) {
  SubdomainSpec s;
  s.kind = Kind::axis_square;
  s.center = center;
  s.side = side;
  return s;
}

SubdomainSpec SubdomainSpec::disc(const Vec2& center, double radius) {
  SubdomainSpec s;
  s.kind = Kind::disc;
  s.center = center;
  s.radius = radius;
  return s;
}

SubdomainSpec SubdomainSpec::element_list(std::vector<int> elements) {
  SubdomainSpec s;
  s.kind = Kind::element_list;
  s.resolved_elements = std::move(elements);
  return s;
}

bool SubdomainSpec::contains(const Vec2& p, int dim) const {
  constexpr double tol = 1e-12;
  switch (kind) {
    case Kind::axis_square: {
      if (std::abs(p[0] - center[0]) > 0.5 * side + tol) return false;
      if (dim > 1 && std::abs(p[1] - center[1]) > 0.5 * side + tol) return false;
      return true;
    }
    case Kind::disc: {
      Vec2 d = p - center;
      if (dim == 1) d[1] = 0.0;
      return norm(d) <= radius + tol;
    }
    case Kind::element_list:
      return false;
  }
  return false;
}

SubdomainSpec mark_subdomain(const Mesh& mesh, const SubdomainSpec& spec) {
  SubdomainSpec out = spec;
  out.resolved_elements.clear();
  if (spec.kind == SubdomainSpec::Kind::element_list) {
    out.resolved_elements = spec.resolved_elements;
    std::sort(out.resolved_elements.begin(), out.resolved_elements.end());
  } else {
    for (int e = 0; e < mesh.n_elements(); ++e) {
      bool inside = true;
      for (int k = 0; k < mesh.verts_per_element(); ++k)
        inside = inside && spec.contains(mesh.vertices[mesh.elements[e][k]], mesh.dim);
      if (inside) out.resolved_elements.push_back(e);
    }
  }
  out.resolved = true;
  out.empty_warning = out.resolved_elements.empty();
  return out;
}

std::vector<int> element_patch(const Mesh& mesh, int element_index) {
  if (element_index < 0 || element_index >= mesh.n_elements())
    throw std::invalid_argument("element_patch: index out of range");
  std::vector<int> out;
  for (int k = 0; k < mesh.verts_per_element(); ++k) {
    const int v = mesh.elements[element_index][k];
    for (int e : mesh.vertex_elements[v]) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  char buf[64];
  out << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_elements() << '\n';
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g", v[0]);
    out << buf;
    if (mesh.dim > 1) {
      std::snprintf(buf, sizeof buf, " %.17g", v[1]);
      out << buf;
    }
    out << '\n';
  }
  for (const auto& el : mesh.elements) {
    out << el[0] << ' ' << el[1];
    if (mesh.dim > 1) out << ' ' << el[2];
    out << '\n';
  }
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out << (mesh.boundary_vertex[v] ? 1 : 0) << (v + 1 < mesh.n_vertices() ? ' ' : '\n');
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_mesh: cannot open " + path);
  write_mesh(mesh, f);
}

Mesh read_mesh(std::istream& in) {
  Mesh m;
  int nv = 0, ne = 0;
  if (!(in >> m.dim >> nv >> ne)) throw std::runtime_error("read_mesh: bad header");
  if (m.dim != 1 && m.dim != 2) throw std::runtime_error("read_mesh: bad dimension");
  m.vertices.resize(nv, {0.0, 0.0});
  for (auto& v : m.vertices) {
    in >> v[0];
    if (m.dim > 1) in >> v[1];
  }
  m.elements.resize(ne, {-1, -1, -1});
  for (auto& el : m.elements) {
    in >> el[0] >> el[1];
    if (m.dim > 1) in >> el[2];
  }
  std::vector<char> flags(nv, 0);
  for (int v = 0; v < nv; ++v) {
    int f = 0;
    in >> f;
    flags[v] = f ? 1 : 0;
  }
  if (!in) throw std::runtime_error("read_mesh: truncated file");
  m.parent.assign(ne, -1);
  m.domain = m.dim == 1 ? DomainKind::interval : DomainKind::generic;
  m.finalize();
  m.boundary_vertex = flags;
  return m;
}

Mesh read_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_mesh: cannot open " + path);
  return read_mesh(f);
}

}  // namespace fraclap
