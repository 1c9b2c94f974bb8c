#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "fraclap/convergence.hpp"

namespace {

bool parse_subdomain(const std::string& text, double& side) {
  double v = 0.0;
  if (std::sscanf(text.c_str(), "square:%lf", &v) == 1 && v > 0.0) {
    side = v;
    return true;
  }
  return false;
}

std::vector<double> parse_s_list(const std::string& text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::stod(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element convergence laboratory for the integral fractional Laplacian"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a convergence study and emit CSV/SVG");
  fraclap::RunConfig cfg;
  std::string s_text = "0.5", subdomain_text = "square:0.4";
  bool no_project = false, localized = false;
  run->add_option("--dim", cfg.dim, "space dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
  run->add_option("--s", s_text, "comma-separated fractional orders in (0,1)");
  run->add_option("--levels", cfg.levels, "number of refinement levels");
  run->add_option("--subdomain", subdomain_text, "local-error region, square:<side>");
  run->add_flag("--no-project-boundary", no_project, "keep refined boundary vertices on the polygon");
  run->add_option("--workers", cfg.assembly.workers, "worker threads (0 = hardware)");
  run->add_option("--csv", cfg.csv_path, "output CSV path")->required();
  run->add_option("--svg", cfg.svg_path, "output SVG plot path");
  run->add_option("--segments", cfg.boundary_segments, "boundary segments of the base disc polygon");
  run->add_option("--base-refinements", cfg.base_refinements, "refinements before level 0 (2D)");
  run->add_option("--interval-elements", cfg.interval_elements, "base interval elements (1D)");
  run->add_option("--dof-cap", cfg.dof_cap, "stop refining beyond this many free dofs");
  run->add_flag("--localized", localized, "also compute the localized energy error (O(N^2) cost)");
  run->add_option("--localized-outer-side", cfg.localized_outer_side,
                  "outer square side for the localized cutoff");
  run->add_option("--singular-order", cfg.assembly.singular_order,
                  "points per direction in the singular pair rules (0 = default)");
  run->set_config("--config", "", "plain text `key = value` file; flags override");

  // rates
  auto* rates = app.add_subcommand("rates", "print EOC table for an existing CSV");
  std::string rates_csv;
  rates->add_option("csv", rates_csv, "CSV produced by `fraclap run`")->required();

  // mesh
  auto* meshcmd = app.add_subcommand("mesh", "build a mesh and write the text format");
  int mesh_dim = 2, mesh_levels = 0, mesh_segments = 16, mesh_interval = 8;
  bool mesh_no_project = false;
  std::string mesh_out;
  meshcmd->add_option("--dim", mesh_dim, "space dimension")->check(CLI::IsMember({1, 2}));
  meshcmd->add_option("--levels", mesh_levels, "uniform refinements")->required();
  meshcmd->add_option("--out", mesh_out, "output path")->required();
  meshcmd->add_option("--segments", mesh_segments, "boundary segments of the base disc polygon");
  meshcmd->add_option("--interval-elements", mesh_interval, "base interval elements (1D)");
  meshcmd->add_flag("--no-project-boundary", mesh_no_project);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfg.s_list = parse_s_list(s_text);
      cfg.project_boundary = !no_project;
      cfg.with_localized_energy = localized;
      if (!parse_subdomain(subdomain_text, cfg.subdomain_side)) {
        std::cerr << "bad --subdomain, expected square:<side>\n";
        return 2;
      }
      cfg.norms.workers = cfg.assembly.workers;
      const auto records = fraclap::run_convergence(cfg);
      std::cout << fraclap::format_rate_table(fraclap::fit_rates(records));
      std::cout << "wrote " << cfg.csv_path;
      if (!cfg.svg_path.empty()) std::cout << " and " << cfg.svg_path;
      std::cout << "\n";
    } else if (*rates) {
      const auto records = fraclap::parse_csv(rates_csv);
      std::cout << fraclap::format_rate_table(fraclap::fit_rates(records));
    } else if (*meshcmd) {
      fraclap::Mesh m = mesh_dim == 2 ? fraclap::build_disc_mesh(mesh_segments)
                                      : fraclap::build_interval_mesh(mesh_interval);
      for (int l = 0; l < mesh_levels; ++l) m = fraclap::refine_uniform(m, !mesh_no_project);
      fraclap::write_mesh(m, mesh_out);
      std::cout << "wrote " << mesh_out << " (" << m.n_vertices() << " vertices, " << m.n_elements()
                << " elements)\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
