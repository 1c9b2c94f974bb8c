#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fraclap/convergence.hpp"

using namespace fraclap;

namespace {

bool same_field(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

}  // namespace

TEST_CASE("fit_rates on synthetic records") {
  std::vector<ConvergenceRecord> recs;
  for (int l = 0; l < 4; ++l) {
    ConvergenceRecord r;
    r.s = 0.5;
    r.level = l;
    r.h = std::pow(0.5, l);
    r.ndof = 10 << l;
    r.l2_global = std::pow(r.h, 0.8);
    r.h1_global = std::numeric_limits<double>::quiet_NaN();  // e.g. s <= 1/2
    r.l2_local = std::pow(r.h, 2.0);
    r.h1_local = std::pow(r.h, 1.0);
    r.energy_global = std::pow(r.h, 0.5);
    r.energy_local = std::numeric_limits<double>::quiet_NaN();
    recs.push_back(r);
  }
  const RateTable t = fit_rates(recs);
  bool saw_l2 = false;
  for (const auto& e : t.entries) {
    CHECK(e.norm != "h1_global");   // all-nan column yields no entry
    CHECK(e.norm != "energy_local");
    if (e.norm == "l2_global") {
      saw_l2 = true;
      for (double r : e.eocs) CHECK(r == doctest::Approx(0.8).epsilon(1e-12));
      CHECK(e.ls_slope == doctest::Approx(0.8).epsilon(1e-12));
    }
  }
  CHECK(saw_l2);
  CHECK(!format_rate_table(t).empty());
}

TEST_CASE("csv round trip with nan fields") {
  std::vector<ConvergenceRecord> recs;
  ConvergenceRecord r;
  r.s = 0.3;
  r.level = 2;
  r.h = 0.125;
  r.ndof = 97;
  r.l2_global = 1.2345678901234567e-3;
  r.h1_global = std::numeric_limits<double>::quiet_NaN();
  r.l2_local = 4.5e-5;
  r.h1_local = 6.7e-4;
  r.energy_global = 8.9e-3;
  r.energy_local = std::numeric_limits<double>::quiet_NaN();
  r.wall_time_seconds = 0.25;
  recs.push_back(r);

  const std::string path = "convergence_roundtrip.csv";
  emit_csv(recs, path);
  {
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header ==
          "s,level,h,ndof,l2_global,h1_global,l2_local,h1_local,energy_global,energy_local,"
          "wall_time_seconds");
  }
  const auto back = parse_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(same_field(back[0].s, r.s));
  CHECK(back[0].level == r.level);
  CHECK(same_field(back[0].h, r.h));
  CHECK(back[0].ndof == r.ndof);
  CHECK(same_field(back[0].l2_global, r.l2_global));
  CHECK(same_field(back[0].h1_global, r.h1_global));
  CHECK(same_field(back[0].l2_local, r.l2_local));
  CHECK(same_field(back[0].h1_local, r.h1_local));
  CHECK(same_field(back[0].energy_global, r.energy_global));
  CHECK(same_field(back[0].energy_local, r.energy_local));
  CHECK(same_field(back[0].wall_time_seconds, r.wall_time_seconds));
  std::remove(path.c_str());
}

TEST_CASE("svg emits one polyline per plotted series") {
  std::vector<ConvergenceRecord> recs;
  for (int l = 0; l < 3; ++l) {
    ConvergenceRecord r;
    r.s = 0.5;
    r.level = l;
    r.h = std::pow(0.5, l);
    r.ndof = 8 << l;
    r.l2_global = std::pow(r.h, 1.0);
    r.h1_global = std::numeric_limits<double>::quiet_NaN();
    r.l2_local = std::pow(r.h, 1.1);
    r.h1_local = std::pow(r.h, 0.9);
    r.energy_global = std::pow(r.h, 0.5);
    r.energy_local = std::numeric_limits<double>::quiet_NaN();
    recs.push_back(r);
  }
  const std::string path = "convergence_test.svg";
  emit_svg(recs, path);
  std::ifstream f(path);
  std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  size_t count = 0, pos = 0;
  while ((pos = all.find("<polyline", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  CHECK(count == 4);  // l2_global, l2_local, h1_local, energy_global
  std::remove(path.c_str());
}

TEST_CASE("1D convergence study: global L2 rate near 1/2+s") {
  RunConfig cfg;
  cfg.dim = 1;
  cfg.s_list = {0.5};
  cfg.levels = 5;
  cfg.interval_elements = 8;
  cfg.assembly.workers = 2;
  const auto recs = run_convergence(cfg);
  REQUIRE(recs.size() == 5);
  std::vector<double> es, hs;
  for (const auto& r : recs) {
    CHECK(std::isfinite(r.l2_global));
    CHECK(r.ndof > 0);
    es.push_back(r.l2_global);
    hs.push_back(r.h);
  }
  for (size_t k = 1; k < recs.size(); ++k) {
    CHECK(recs[k].h < recs[k - 1].h);
    CHECK(recs[k].ndof > recs[k - 1].ndof);
  }
  const auto rates = eoc(es, hs);
  CHECK(rates.back() >= 0.85);
  CHECK(rates.back() <= 1.15);
  // h1_global undefined at s = 1/2
  for (const auto& r : recs) CHECK(std::isnan(r.h1_global));
}

TEST_CASE("worker-count independence of the full pipeline") {
  RunConfig c1;
  c1.dim = 1;
  c1.s_list = {0.4};
  c1.levels = 3;
  c1.interval_elements = 4;
  c1.assembly.workers = 1;
  RunConfig c2 = c1;
  c2.assembly.workers = 3;
  const auto r1 = run_convergence(c1);
  const auto r2 = run_convergence(c2);
  REQUIRE(r1.size() == r2.size());
  for (size_t k = 0; k < r1.size(); ++k) {
    CHECK(same_field(r1[k].s, r2[k].s));
    CHECK(r1[k].level == r2[k].level);
    CHECK(same_field(r1[k].h, r2[k].h));
    CHECK(r1[k].ndof == r2[k].ndof);
    CHECK(same_field(r1[k].l2_global, r2[k].l2_global));     // 0 ULP
    CHECK(same_field(r1[k].h1_global, r2[k].h1_global));
    CHECK(same_field(r1[k].l2_local, r2[k].l2_local));
    CHECK(same_field(r1[k].h1_local, r2[k].h1_local));
    CHECK(same_field(r1[k].energy_global, r2[k].energy_global));
    CHECK(same_field(r1[k].energy_local, r2[k].energy_local));
  }
}

TEST_CASE("dof cap truncates the level schedule cleanly") {
  RunConfig cfg;
  cfg.dim = 1;
  cfg.s_list = {0.5};
  cfg.levels = 6;
  cfg.interval_elements = 8;
  cfg.dof_cap = 40;
  cfg.assembly.workers = 1;
  const auto recs = run_convergence(cfg);
  CHECK(recs.size() < 6);
  CHECK(recs.size() >= 2);
  for (const auto& r : recs) {
    CHECK(r.ndof <= 40 * 2);  // never wildly past the cap
    CHECK(std::isfinite(r.l2_global));
  }
  CHECK_THROWS_AS(
      [&] {
        RunConfig bad = cfg;
        bad.levels = 1;
        run_convergence(bad);
      }(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      [&] {
        RunConfig bad = cfg;
        bad.s_list = {1.5};
        run_convergence(bad);
      }(),
      std::invalid_argument);
}
