#ifndef FRACLAP_ASSEMBLY_HPP
#define FRACLAP_ASSEMBLY_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fraclap/geometry.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

struct AssemblyConfig {
  int singular_order = 0;          // points per direction; 0 = default (6 in 1D, 5 in 2D)
  int disjoint_order_near = 4;     // floor for pairs below separation_ratio
  int disjoint_order_far = 2;      // at or beyond separation_ratio
  double separation_ratio = 9.0;
  int disjoint_order_contact = 8;  // cap, used for nearly touching pairs (ratio < contact_ratio)
  double contact_ratio = 1.0;
  double entry_tolerance = 1e-8;   // per-entry quadrature target driving the band model
  int exterior_edge_base_order = 8;
  int exterior_cell_order = 6;
  int exterior_grade_depth = 12;   // geometric bands (ratio 1/4) toward the boundary
  int load_order = 6;
  int workers = 0;                 // 0 = hardware concurrency
  bool interior_only = false;      // drop the complement term (diagnostics)
};

/// Gauss points per direction for a disjoint element pair at distance ratio
/// r = dist/max(diam).  Derived from the tensor-Gauss error model
/// (4r)^(-2n) * r^(-(dim+2s)) <= entry_tolerance, clamped to the configured
/// contact/far orders.
inline int disjoint_points_per_dir(double r, double s, int dim, const AssemblyConfig& cfg) {
  if (r >= cfg.separation_ratio) return cfg.disjoint_order_far;
  if (r < cfg.contact_ratio) return cfg.disjoint_order_contact;
  const double need = (-std::log(cfg.entry_tolerance) + (dim + 2.0 * s) * std::log(r)) /
                      (2.0 * std::log(4.0 * r));
  const int n = static_cast<int>(std::ceil(need));
  return std::clamp(n, cfg.disjoint_order_near, cfg.disjoint_order_contact);
}

/// C(d,s) = -2^(2s) Gamma(s+d/2) / (pi^(d/2) Gamma(-s)); positive on (0,1).
double normalization_constant(int dim, double s);

/// Boundary of the computational domain, as needed by the complement integral.
struct BoundaryGeometry {
  int dim = 2;
  double a = 0.0, b = 0.0;  // 1D interval ends
  std::vector<Vec2> loop;   // 2D: boundary polygon, counterclockwise
};

BoundaryGeometry domain_boundary(const Mesh& mesh);

/// rho_c(x) = int_{complement} |x-y|^(-dim-2s) dy for x strictly inside the
/// domain.  In 2D the integral is reduced to the boundary by the divergence
/// theorem; in 1D it has a closed form.
double exterior_weight(const Vec2& x, const BoundaryGeometry& bd, double s,
                       const AssemblyConfig& config = {});

struct StiffnessSystem {
  Eigen::MatrixXd K;                // free x free, symmetric positive definite
  Eigen::VectorXd F;                // free load vector (attach_load)
  std::vector<int> free_of_vertex;  // -1 for boundary vertices
  std::vector<int> vertex_of_free;
  double s = 0.5;
  double C_ds = 0.0;
  const Mesh* mesh = nullptr;

  int n_free() const { return static_cast<int>(vertex_of_free.size()); }
};

/// Galerkin matrix of the fractional bilinear form on the free hat functions.
StiffnessSystem assemble_stiffness(const Mesh& mesh, double s, const AssemblyConfig& config = {});

/// Load vector over all vertices: F_i = int f phi_i.
Eigen::VectorXd assemble_load(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                              int order = 6);

/// Restricts a full per-vertex load vector onto the system's free indices.
void attach_load(StiffnessSystem& system, const Eigen::VectorXd& full_load);

/// P1 mass matrix over all vertices (closed-form element integrals).
Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh);

void dump_system(const StiffnessSystem& system, const std::string& path);
void read_system_dump(const std::string& path, Eigen::MatrixXd& K, Eigen::VectorXd& F);

}  // namespace fraclap

#endif
