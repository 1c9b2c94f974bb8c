#ifndef FRACLAP_GEOMETRY_HPP
#define FRACLAP_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace fraclap {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double c, const Vec2& a) { return {c * a[0], c * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
inline double norm2(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }

enum class DomainKind { interval, disc_polygon, generic };

/// Simplicial mesh of an interval or a polygonal disc approximation.
/// Immutable after construction; refinement returns a new mesh with a
/// parent map back into this one.
struct Mesh {
  int dim = 2;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;  // 1D elements use entries 0,1; entry 2 is -1
  std::vector<char> boundary_vertex;
  std::vector<double> element_diameter;
  std::vector<double> element_volume;
  int level = 0;
  DomainKind domain = DomainKind::generic;
  std::vector<int> parent;  // parent element index, -1 on a root mesh

  // derived connectivity, built once in finalize()
  std::vector<std::vector<int>> vertex_elements;
  std::vector<std::array<int, 2>> boundary_edges;  // 2D: (v0,v1) with domain on the left

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int verts_per_element() const { return dim + 1; }
  double max_diameter() const;

  /// Validates volumes/orientation and builds flags and adjacency.
  void finalize();
};

Mesh build_interval_mesh(int n_elements);
Mesh build_disc_mesh(int boundary_segments);
Mesh refine_uniform(const Mesh& mesh, bool project_boundary);
double shape_regularity(const Mesh& mesh);

struct SubdomainSpec {
  enum class Kind { axis_square, disc, element_list };
  Kind kind = Kind::axis_square;
  Vec2 center{0.0, 0.0};
  double side = 0.0;    // axis_square
  double radius = 0.0;  // disc
  std::vector<int> resolved_elements;
  bool resolved = false;
  bool empty_warning = false;

  static SubdomainSpec axis_square(const Vec2& center, double side);
  static SubdomainSpec disc(const Vec2& center, double radius);
  static SubdomainSpec element_list(std::vector<int> elements);

  /// Closed-region membership test (geometric kinds only).
  bool contains(const Vec2& p, int dim) const;
};

/// Conservative element marking: an element is resolved iff all of its
/// vertices satisfy the region predicate.
SubdomainSpec mark_subdomain(const Mesh& mesh, const SubdomainSpec& spec);

/// All elements whose closure intersects the closure of the given element.
std::vector<int> element_patch(const Mesh& mesh, int element_index);

void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& path);

}  // namespace fraclap

#endif
