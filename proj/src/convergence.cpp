#include "fraclap/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "fraclap/exact.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

namespace {

constexpr const char* kCsvHeader =
    "s,level,h,ndof,l2_global,h1_global,l2_local,h1_local,energy_global,energy_local,"
    "wall_time_seconds";

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::vector<ConvergenceRecord> run_convergence(const RunConfig& config) {
  if (config.levels < 2) throw std::invalid_argument("run_convergence: levels must be >= 2");
  for (double s : config.s_list)
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("run_convergence: every s must be in (0,1)");

  std::vector<Mesh> meshes;
  {
    Mesh m = config.dim == 2 ? build_disc_mesh(config.boundary_segments)
                             : build_interval_mesh(config.interval_elements);
    if (config.dim == 2)
      for (int r = 0; r < config.base_refinements; ++r) m = refine_uniform(m, config.project_boundary);
    for (int l = 0; l < config.levels; ++l) {
      if (l > 0) m = refine_uniform(m, config.project_boundary);
      int nfree = 0;
      for (int v = 0; v < m.n_vertices(); ++v)
        if (!m.boundary_vertex[v]) ++nfree;
      if (nfree > config.dof_cap && !meshes.empty()) break;
      meshes.push_back(m);
    }
  }

  std::vector<ConvergenceRecord> records;
  for (double s : config.s_list) {
    const ExactSolution exact = disc_exact_solution(s, config.dim);
    for (size_t l = 0; l < meshes.size(); ++l) {
      const Mesh& mesh = meshes[l];
      ConvergenceRecord rec;
      rec.s = s;
      rec.level = static_cast<int>(l);
      rec.h = mesh.max_diameter();
      rec.l2_global = rec.h1_global = rec.l2_local = rec.h1_local = nan_value();
      rec.energy_global = rec.energy_local = nan_value();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        AssemblyConfig acfg = config.assembly;
        NormConfig ncfg = config.norms;
        ncfg.workers = acfg.workers;
        StiffnessSystem sys = assemble_stiffness(mesh, s, acfg);
        rec.ndof = sys.n_free();
        attach_load(sys, assemble_load(mesh, [&](const Vec2&) { return exact.rhs_constant; }));
        const FemFunction u_h = solve(sys);

        const SubdomainSpec region =
            mark_subdomain(mesh, SubdomainSpec::axis_square({0.0, 0.0}, config.subdomain_side));
        if (auto v = l2_error(exact, u_h, nullptr, ncfg)) rec.l2_global = *v;
        if (auto v = h1_seminorm_error(exact, u_h, nullptr, ncfg)) rec.h1_global = *v;
        if (auto v = l2_error(exact, u_h, &region, ncfg)) rec.l2_local = *v;
        if (auto v = h1_seminorm_error(exact, u_h, &region, ncfg)) rec.h1_local = *v;
        rec.energy_global = energy_error(sys, u_h, exact);
        if (config.with_localized_energy) {
          try {
            const SubdomainSpec outer =
                SubdomainSpec::axis_square({0.0, 0.0}, config.localized_outer_side);
            rec.energy_local = localized_energy_error(
                u_h, exact, SubdomainSpec::axis_square({0.0, 0.0}, config.subdomain_side), outer, s,
                acfg);
          } catch (const std::invalid_argument&) {
            rec.energy_local = nan_value();  // layer not resolvable at this level
          }
        }
      } catch (const std::exception& ex) {
        std::cerr << "run_convergence: cell s=" << s << " level=" << l << " failed: " << ex.what()
                  << "\n";
      }
      rec.wall_time_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      records.push_back(rec);
    }
  }

  if (!config.csv_path.empty()) emit_csv(records, config.csv_path);
  if (!config.svg_path.empty()) emit_svg(records, config.svg_path);
  return records;
}

namespace {

struct NormColumn {
  const char* name;
  double ConvergenceRecord::*field;
};

constexpr NormColumn kNorms[] = {
    {"l2_global", &ConvergenceRecord::l2_global},   {"h1_global", &ConvergenceRecord::h1_global},
    {"l2_local", &ConvergenceRecord::l2_local},     {"h1_local", &ConvergenceRecord::h1_local},
    {"energy_global", &ConvergenceRecord::energy_global},
    {"energy_local", &ConvergenceRecord::energy_local},
};

std::vector<double> distinct_s(const std::vector<ConvergenceRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records)
    if (std::find(out.begin(), out.end(), r.s) == out.end()) out.push_back(r.s);
  return out;
}

}  // namespace

RateTable fit_rates(const std::vector<ConvergenceRecord>& records) {
  RateTable table;
  for (double s : distinct_s(records)) {
    for (const auto& col : kNorms) {
      std::vector<double> hs, es;
      for (const auto& r : records) {
        if (r.s != s) continue;
        const double v = r.*(col.field);
        if (std::isfinite(v) && v > 0.0 && r.h > 0.0) {
          hs.push_back(r.h);
          es.push_back(v);
        }
      }
      if (hs.size() < 2) continue;
      RateEntry entry;
      entry.s = s;
      entry.norm = col.name;
      entry.eocs = eoc(es, hs);
      const size_t m = std::min<size_t>(3, hs.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (size_t k = hs.size() - m; k < hs.size(); ++k) {
        const double x = std::log(hs[k]), y = std::log(es[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      entry.ls_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      table.entries.push_back(entry);
    }
  }
  return table;
}

std::string format_rate_table(const RateTable& table) {
  std::ostringstream out;
  char buf[128];
  out << "s        norm            pairwise EOCs                          LS slope\n";
  for (const auto& e : table.entries) {
    std::snprintf(buf, sizeof buf, "%-8g %-15s ", e.s, e.norm.c_str());
    out << buf;
    std::string eocs;
    for (double r : e.eocs) {
      std::snprintf(buf, sizeof buf, "%.3f ", r);
      eocs += buf;
    }
    eocs.resize(38, ' ');
    std::snprintf(buf, sizeof buf, "%s %.3f\n", eocs.c_str(), e.ls_slope);
    out << buf;
  }
  return out.str();
}

void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
  f << kCsvHeader << '\n';
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.s, r.level,
                  r.h, r.ndof, r.l2_global, r.h1_global, r.l2_local, r.h1_local, r.energy_global,
                  r.energy_local, r.wall_time_seconds);
    f << buf;
  }
}

std::vector<ConvergenceRecord> parse_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("parse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != kCsvHeader)
    throw std::runtime_error("parse_csv: bad header");
  std::vector<ConvergenceRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ConvergenceRecord r;
    ss >> r.s >> r.level >> r.h >> r.ndof >> r.l2_global >> r.h1_global >> r.l2_local >>
        r.h1_local >> r.energy_global >> r.energy_local >> r.wall_time_seconds;
    if (ss.fail()) throw std::runtime_error("parse_csv: bad row: " + line);
    out.push_back(r);
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                          "#17becf", "#e377c2", "#bcbd22", "#7f7f7f"};

}  // namespace

void emit_svg(const std::vector<ConvergenceRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_svg: no records");
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;  // (h, value)
  };
  std::vector<Series> series;
  for (double s : distinct_s(records)) {
    for (const auto& col : kNorms) {
      Series ser;
      char lbl[64];
      std::snprintf(lbl, sizeof lbl, "%s s=%g", col.name, s);
      ser.label = lbl;
      for (const auto& r : records) {
        const double v = r.*(col.field);
        if (r.s == s && std::isfinite(v) && v > 0.0) ser.pts.push_back({r.h, v});
      }
      if (ser.pts.size() >= 2) series.push_back(std::move(ser));
    }
  }
  if (series.empty()) throw std::runtime_error("emit_svg: nothing to plot");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& ser : series)
    for (const auto& [h, v] : ser.pts) {
      xmin = std::min(xmin, std::log10(h));
      xmax = std::max(xmax, std::log10(h));
      ymin = std::min(ymin, std::log10(v));
      ymax = std::max(ymax, std::log10(v));
    }
  const double xpad = 0.05 * std::max(1e-6, xmax - xmin), ypad = 0.05 * std::max(1e-6, ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  const double W = 900, H = 620, ml = 70, mr = 230, mt = 30, mb = 50;
  auto X = [&](double h) { return ml + (std::log10(h) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (std::log10(v) - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_svg: cannot open " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " " << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  // axes
  f << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  for (int p = static_cast<int>(std::ceil(xmin)); p <= static_cast<int>(std::floor(xmax)); ++p) {
    const double x = ml + (p - xmin) / (xmax - xmin) * (W - ml - mr);
    f << "<line x1=\"" << x << "\" y1=\"" << H - mb << "\" x2=\"" << x << "\" y2=\"" << H - mb + 5
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << x - 12 << "\" y=\"" << H - mb + 20 << "\">1e" << p << "</text>\n";
  }
  for (int p = static_cast<int>(std::ceil(ymin)); p <= static_cast<int>(std::floor(ymax)); ++p) {
    const double y = H - mb - (p - ymin) / (ymax - ymin) * (H - mt - mb);
    f << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << ml - 45 << "\" y=\"" << y + 4 << "\">1e" << p << "</text>\n";
  }
  f << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10 << "\">h</text>\n";
  f << "<text x=\"15\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 15 "
    << (mt + H - mb) / 2 << ")\">error</text>\n";

  // reference-slope guides anchored at each s-group's coarsest data point
  for (double s : distinct_s(records)) {
    double h0 = 0.0, e0 = 0.0;
    for (const auto& ser : series)
      if (ser.label.find("s=" + ([&] {
                           char b[32];
                           std::snprintf(b, sizeof b, "%g", s);
                           return std::string(b);
                         })()) != std::string::npos)
        for (const auto& [h, v] : ser.pts)
          if (h > h0) {
            h0 = h;
            e0 = v;
          }
    if (h0 <= 0.0) continue;
    const double h1 = h0 / 8.0;
    std::vector<std::pair<double, const char*>> slopes = {{0.5 + s, "h^(1/2+s)"}, {1.0, "h^1"}};
    if (s > 0.5) slopes.push_back({s - 0.5, "h^(s-1/2)"});
    for (const auto& [slope, name] : slopes) {
      const double e1 = e0 * std::pow(h1 / h0, slope);
      f << "<line x1=\"" << X(h0) << "\" y1=\"" << Y(e0) << "\" x2=\"" << X(h1) << "\" y2=\""
        << Y(e1) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
      f << "<text x=\"" << X(h1) + 2 << "\" y=\"" << Y(e1) << "\" fill=\"#777777\">" << name
        << "</text>\n";
    }
  }

  int ci = 0;
  for (const auto& ser : series) {
    const char* color = kPalette[ci % 10];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [h, v] : ser.pts) f << X(h) << "," << Y(v) << " ";
    f << "\"/>\n";
    for (const auto& [h, v] : ser.pts)
      f << "<circle cx=\"" << X(h) << "\" cy=\"" << Y(v) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    f << "<text x=\"" << W - mr + 15 << "\" y=\"" << mt + 18 * ci + 12 << "\" fill=\"" << color
      << "\">" << ser.label << "</text>\n";
    ++ci;
  }
  f << "</svg>\n";
}

}  // namespace fraclap
