#ifndef FRACLAP_NORMS_HPP
#define FRACLAP_NORMS_HPP

#include <optional>
#include <vector>

#include "fraclap/assembly.hpp"
#include "fraclap/exact.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

struct NormConfig {
  int interior_order = 6;   // plain element rule away from the boundary
  double grade_ratio = 0.25;
  int grade_depth = 12;     // geometric bands toward boundary features
  int workers = 0;
};

/// L2 error over a region (whole domain when region == nullptr), with
/// boundary-layer grading on elements that touch the domain boundary.
/// Empty region -> nullopt.
std::optional<double> l2_error(const ExactSolution& exact, const FemFunction& u_h,
                               const SubdomainSpec* region, const NormConfig& config = {});

/// Broken H1 seminorm error.  A whole-domain request with s <= 1/2 is
/// undefined (the exact gradient is not square-integrable) -> nullopt.
std::optional<double> h1_seminorm_error(const ExactSolution& exact, const FemFunction& u_h,
                                        const SubdomainSpec* region, const NormConfig& config = {});

/// sqrt(a(u,u) - c^T F); a radicand below -1e-10 signals broken
/// quadrature/geometry and throws.
double energy_error(const StiffnessSystem& system, const FemFunction& u_h,
                    const ExactSolution& exact);

/// |v|_{H^t(region)} by pair quadrature over the region's element pairs.
double fractional_seminorm(const FemFunction& v, double t, const SubdomainSpec* region,
                           const AssemblyConfig& config = {});

/// ||I(eta_h (u - u_h))||_{H^t(Omega)} with a piecewise-linear cutoff eta_h
/// that is 1 on the inner region and 0 outside the outer region.
double localized_energy_error(const FemFunction& u_h, const ExactSolution& exact,
                              const SubdomainSpec& inner, const SubdomainSpec& outer, double t,
                              const AssemblyConfig& config = {});

/// Pairwise experimental orders of convergence log(e_k/e_{k+1})/log(h_k/h_{k+1}).
std::vector<double> eoc(const std::vector<double>& values, const std::vector<double>& hs);

/// L2 norm of a piecewise-linear function over a region (exact).
double l2_norm(const FemFunction& v, const SubdomainSpec* region = nullptr);

}  // namespace fraclap

#endif
