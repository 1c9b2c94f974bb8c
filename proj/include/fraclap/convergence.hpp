#ifndef FRACLAP_CONVERGENCE_HPP
#define FRACLAP_CONVERGENCE_HPP

#include <string>
#include <vector>

#include "fraclap/assembly.hpp"
#include "fraclap/norms.hpp"

namespace fraclap {

struct RunConfig {
  int dim = 2;
  std::vector<double> s_list{0.5};
  int levels = 4;
  int boundary_segments = 16;  // 2D base polygon
  int base_refinements = 2;    // applied before level 0
  int interval_elements = 8;   // 1D base mesh
  double subdomain_side = 0.4;
  bool project_boundary = true;
  AssemblyConfig assembly;
  NormConfig norms;
  int dof_cap = 8000;
  bool with_localized_energy = false;
  double localized_outer_side = 1.4;
  unsigned seed = 12345;  // property tests only
  std::string csv_path, svg_path;
};

struct ConvergenceRecord {
  double s = 0.0;
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  double l2_global = 0.0, h1_global = 0.0, l2_local = 0.0, h1_local = 0.0;
  double energy_global = 0.0, energy_local = 0.0;
  double wall_time_seconds = 0.0;
};

std::vector<ConvergenceRecord> run_convergence(const RunConfig& config);

struct RateEntry {
  double s = 0.0;
  std::string norm;
  std::vector<double> eocs;  // pairwise, between successive levels
  double ls_slope = 0.0;     // least-squares slope over the last <= 3 points
};

struct RateTable {
  std::vector<RateEntry> entries;
};

RateTable fit_rates(const std::vector<ConvergenceRecord>& records);
std::string format_rate_table(const RateTable& table);

void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path);
std::vector<ConvergenceRecord> parse_csv(const std::string& path);
void emit_svg(const std::vector<ConvergenceRecord>& records, const std::string& path);

}  // namespace fraclap

#endif
