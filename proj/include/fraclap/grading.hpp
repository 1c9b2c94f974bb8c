#ifndef FRACLAP_GRADING_HPP
#define FRACLAP_GRADING_HPP

#include <array>
#include <vector>

#include "fraclap/geometry.hpp"

namespace fraclap {

/// Triangular sub-cell in parent reference coordinates.
struct SubCell2 {
  std::array<Vec2, 3> v;
};

/// Geometric bands (scale factor `ratio` per band) toward the local edge
/// (edge k joins local vertices k and (k+1)%3).  depth bands plus the apex
/// cell and the final sliver at the edge.
std::vector<SubCell2> graded_cells_edge(int local_edge, double ratio, int depth);

/// Geometric rings toward the local vertex.
std::vector<SubCell2> graded_cells_vertex(int local_vertex, double ratio, int depth);

/// Uniform quadrisection, 4^depth cells.
std::vector<SubCell2> uniform_cells(int depth);

/// 1D bands on [0,1] graded toward 0 (toward_left) or 1.
std::vector<std::array<double, 2>> graded_cells_1d(bool toward_left, double ratio, int depth);

}  // namespace fraclap

#endif
