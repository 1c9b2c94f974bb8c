#ifndef FRACLAP_QUADRATURE_HPP
#define FRACLAP_QUADRATURE_HPP

#include <vector>

#include "fraclap/geometry.hpp"

namespace fraclap {

/// Point rule on a reference cell: [0,1] for dim 1, the unit triangle
/// {a >= 0, b >= 0, a+b <= 1} for dim 2.
struct QuadRule {
  int dim = 1;
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Gauss-Legendre rule with `order` points on [0,1]; exact to degree 2*order-1.
QuadRule gauss_interval(int order);

/// Gauss-Jacobi rule with n points for the weight t^beta on [0,1]:
/// sum_i w_i f(t_i) ~= int_0^1 t^beta f(t) dt, exact for f of degree <= 2n-1.
QuadRule gauss_jacobi_interval(int n, double beta);

/// Rule on the unit triangle exact for all polynomials of total degree <= order.
QuadRule gauss_triangle(int order);

enum class PairCase { identical, shared_edge, shared_vertex, disjoint };

/// Rule for double integrals over a pair of reference cells against the
/// kernel |x-y|^(-dim-2s).  Nodes are reference coordinates in each cell;
/// applying the rule to f(x,y) = N(x,y)*|x-y|^(-dim-2s) with a numerator N
/// vanishing quadratically at the touching set converges spectrally in
/// `order` (points per direction).  Vertex/edge conventions:
///   identical      same cell twice
///   shared_edge    local vertices 0,1 of both cells are the shared edge,
///                  in the same order
///   shared_vertex  local vertex 0 of both cells is the shared vertex
struct PairQuadRule {
  PairCase pair_case = PairCase::disjoint;
  int dim = 1;
  std::vector<Vec2> x_ref, y_ref;
  std::vector<double> weights;
  int order = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

PairQuadRule singular_pair_rule(PairCase pair_case, int order, double s, int dim);

/// Composite Gauss rule on [0,1] graded geometrically toward 0, for
/// integrands that are nearly singular at distance `distance_ratio`
/// (distance to the singularity divided by the interval length).
/// Node count grows logarithmically as distance_ratio -> 0.
QuadRule adaptive_edge_rule(double distance_ratio, int base_order);

}  // namespace fraclap

#endif
