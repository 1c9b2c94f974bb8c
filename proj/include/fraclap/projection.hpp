#ifndef FRACLAP_PROJECTION_HPP
#define FRACLAP_PROJECTION_HPP

#include <functional>

#include "fraclap/assembly.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

/// Global L2-orthogonal projection onto S^{1,1} (constrained: onto S^{1,1}_0,
/// boundary coefficients forced to zero).
FemFunction l2_projection(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                          bool constrained, int quad_order = 8);

/// Scott-Zhang style quasi-interpolant: per vertex, the L2 projection of f
/// onto P1 of one fixed incident element (lowest index), read off at the
/// vertex.  Reproduces piecewise linears and depends at each vertex only on
/// f restricted to that element.
FemFunction quasi_interpolant(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                              int quad_order = 4);

/// Variant evaluated per element in reference coordinates (avoids any point
/// lookup; used for products of mesh functions).
FemFunction quasi_interpolant_elemwise(const Mesh& mesh,
                                       const std::function<double(int, const Vec2&)>& f_ref,
                                       int quad_order = 4);

/// Piecewise-linear cutoff: 1 on the inner region, 0 outside the outer one,
/// with the nodal ramp eta(x) = R_out / (R_in + R_out).
struct CutoffFunction {
  SubdomainSpec inner, outer;  // resolved
  Eigen::VectorXd eta;         // nodal values in [0,1]
  double measured_gradient_bound = 0.0;
  double separation = 0.0;  // dist(inner region, complement of outer region)
};

CutoffFunction build_cutoff(const Mesh& mesh, const SubdomainSpec& inner,
                            const SubdomainSpec& outer);

/// Distance from the inner region to the complement of the outer region.
double region_separation(const Mesh& mesh, const SubdomainSpec& inner, const SubdomainSpec& outer);

/// r_l = ||eta v_h - J_h(eta v_h)||_{H^t} / (h^{2-t} ||v_h||_{H^1(omega_eta)})
/// per level, for t in {0,1}.
std::vector<double> superapprox_ratio(const std::vector<const Mesh*>& meshes,
                                      const std::vector<FemFunction>& v_family,
                                      const SubdomainSpec& inner, const SubdomainSpec& outer,
                                      int t);

/// ||Pi f||_{L2(D0)} / ||f||_{L2(Omega)} for f vanishing on D1 (D0 inside D1).
double l2_locality_probe(const Mesh& mesh, const std::function<double(const Vec2&)>& f,
                         const SubdomainSpec& d0, const SubdomainSpec& d1);

}  // namespace fraclap

#endif
