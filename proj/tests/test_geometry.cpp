#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fraclap/geometry.hpp"

using namespace fraclap;

namespace {

double total_volume(const Mesh& m) {
  double v = 0.0;
  for (double x : m.element_volume) v += x;
  return v;
}

}  // namespace

TEST_CASE("interval mesh") {
  const Mesh m2 = build_interval_mesh(2);
  CHECK(m2.n_vertices() == 3);
  CHECK(m2.n_elements() == 2);
  CHECK(m2.vertices[0][0] == doctest::Approx(-1.0));
  CHECK(m2.vertices[1][0] == doctest::Approx(0.0));
  CHECK(m2.vertices[2][0] == doctest::Approx(1.0));
  CHECK(m2.max_diameter() == doctest::Approx(1.0));
  CHECK(m2.boundary_vertex[0]);
  CHECK(!m2.boundary_vertex[1]);
  CHECK(m2.boundary_vertex[2]);

  const Mesh m4 = build_interval_mesh(4);
  CHECK(m4.max_diameter() == doctest::Approx(0.5));
  for (int v = 0; v < m4.n_vertices(); ++v)
    CHECK(std::abs(m4.vertices[v][0] / 0.5 - std::round(m4.vertices[v][0] / 0.5)) < 1e-14);

  CHECK(shape_regularity(build_interval_mesh(8)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_interval_mesh(1), std::invalid_argument);
}

TEST_CASE("disc mesh build") {
  const Mesh m8 = build_disc_mesh(8);
  CHECK(m8.n_elements() == 8);
  for (int v = 0; v < m8.n_vertices(); ++v)
    if (m8.boundary_vertex[v]) CHECK(std::abs(norm(m8.vertices[v]) - 1.0) <= 1e-12);
  CHECK(shape_regularity(m8) <= 10.0);

  const Mesh m16 = build_disc_mesh(16);
  CHECK(total_volume(m16) == doctest::Approx(8.0 * std::sin(2.0 * M_PI / 16.0)).epsilon(1e-12));
  CHECK_THROWS_AS(build_disc_mesh(4), std::invalid_argument);
}

TEST_CASE("uniform refinement") {
  const Mesh m2 = build_interval_mesh(2);
  const Mesh m4 = refine_uniform(m2, false);
  CHECK(m4.n_elements() == 4);
  CHECK(m4.max_diameter() == doctest::Approx(0.5));
  CHECK(m4.level == m2.level + 1);

  const Mesh d = refine_uniform(build_disc_mesh(16), false);
  CHECK(d.n_elements() == 4 * 16);
  std::vector<double> child_sum(16, 0.0);
  for (int e = 0; e < d.n_elements(); ++e) child_sum[d.parent[e]] += d.element_volume[e];
  const Mesh base = build_disc_mesh(16);
  for (int p = 0; p < 16; ++p)
    CHECK(child_sum[p] == doctest::Approx(base.element_volume[p]).epsilon(1e-13));

  const Mesh dp = refine_uniform(base, true);
  for (int v = 0; v < dp.n_vertices(); ++v)
    if (dp.boundary_vertex[v]) CHECK(std::abs(norm(dp.vertices[v]) - 1.0) <= 1e-12);
  // diameter halving up to the projection perturbation
  const double h0 = base.max_diameter();
  const double h1 = dp.max_diameter();
  CHECK(h1 >= 0.5 * h0 * (1.0 - 1e-12));
  CHECK(h1 <= 0.5 * h0 * (1.0 + 4.0 * h0 * h0));
}

TEST_CASE("shape regularity values") {
  Mesh ref;
  ref.dim = 2;
  ref.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  ref.elements = {{0, 1, 2}};
  ref.parent = {-1};
  ref.finalize();
  CHECK(shape_regularity(ref) == doctest::Approx(2.0).epsilon(1e-14));

  Mesh eq;
  eq.dim = 2;
  eq.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
  eq.elements = {{0, 1, 2}};
  eq.parent = {-1};
  eq.finalize();
  CHECK(shape_regularity(eq) == doctest::Approx(1.0 / std::sqrt(std::sqrt(3.0) / 4.0)).epsilon(1e-13));
}

TEST_CASE("volume conservation and gamma under refinement") {
  Mesh m = build_disc_mesh(16);
  const double area = total_volume(m);
  double gamma = shape_regularity(m);
  for (int l = 0; l < 3; ++l) {
    const Mesh next = refine_uniform(m, false);
    CHECK(total_volume(next) == doctest::Approx(area).epsilon(1e-12));
    const double g2 = shape_regularity(next);
    CHECK(g2 <= gamma + 1e-12);
    gamma = g2;
    m = next;
  }
  // with projection: bounded by 2x parent gamma once h <= 0.25
  Mesh mp = refine_uniform(refine_uniform(build_disc_mesh(16), true), true);
  while (mp.max_diameter() > 0.25) mp = refine_uniform(mp, true);
  const double gp = shape_regularity(mp);
  const Mesh mp2 = refine_uniform(mp, true);
  CHECK(shape_regularity(mp2) <= 2.0 * gp);
}

TEST_CASE("subdomain marking") {
  Mesh m = build_disc_mesh(16);
  for (int l = 0; l < 4; ++l) m = refine_uniform(m, false);
  while (m.max_diameter() > 0.02) m = refine_uniform(m, false);
  REQUIRE(m.max_diameter() <= 0.05);

  const SubdomainSpec sq = mark_subdomain(m, SubdomainSpec::axis_square({0.0, 0.0}, 0.4));
  CHECK(!sq.resolved_elements.empty());
  CHECK(!sq.empty_warning);
  double area = 0.0;
  for (int e : sq.resolved_elements) area += m.element_volume[e];
  CHECK(area >= 0.14);
  CHECK(area <= 0.16);

  const SubdomainSpec all = mark_subdomain(m, SubdomainSpec::disc({0.0, 0.0}, 2.0));
  CHECK(static_cast<int>(all.resolved_elements.size()) == m.n_elements());

  const SubdomainSpec far = mark_subdomain(m, SubdomainSpec::axis_square({10.0, 10.0}, 0.1));
  CHECK(far.resolved_elements.empty());
  CHECK(far.empty_warning);
}

TEST_CASE("subdomain marking is monotone under refinement") {
  Mesh m = build_disc_mesh(16);
  m = refine_uniform(m, false);
  const SubdomainSpec spec = SubdomainSpec::axis_square({0.0, 0.0}, 0.8);
  SubdomainSpec coarse = mark_subdomain(m, spec);
  const Mesh fine = refine_uniform(m, false);
  SubdomainSpec fined = mark_subdomain(fine, spec);
  std::vector<char> fine_marked(fine.n_elements(), 0);
  for (int e : fined.resolved_elements) fine_marked[e] = 1;
  for (int e : coarse.resolved_elements)
    for (int c = 0; c < fine.n_elements(); ++c)
      if (fine.parent[c] == e) CHECK(fine_marked[c]);
}

TEST_CASE("element patch") {
  const Mesh m = build_interval_mesh(8);
  CHECK(element_patch(m, 3).size() == 3);
  CHECK(element_patch(m, 0).size() == 2);

  const Mesh base = build_disc_mesh(8);
  const Mesh d = refine_uniform(base, false);
  // the center child (index 4p+3) touches its three siblings
  const auto patch = element_patch(d, 3);
  for (int sib : {0, 1, 2}) CHECK(std::count(patch.begin(), patch.end(), sib) == 1);

  // symmetry
  for (int e = 0; e < d.n_elements(); ++e) {
    for (int other : element_patch(d, e)) {
      const auto back = element_patch(d, other);
      CHECK(std::count(back.begin(), back.end(), e) == 1);
    }
  }
  CHECK_THROWS_AS(element_patch(m, 99), std::invalid_argument);
}

TEST_CASE("mesh text format round trip") {
  Mesh m = refine_uniform(build_disc_mesh(8), true);
  std::stringstream ss;
  write_mesh(m, ss);
  const Mesh back = read_mesh(ss);
  REQUIRE(back.n_vertices() == m.n_vertices());
  REQUIRE(back.n_elements() == m.n_elements());
  for (int v = 0; v < m.n_vertices(); ++v) {
    CHECK(back.vertices[v][0] == m.vertices[v][0]);
    CHECK(back.vertices[v][1] == m.vertices[v][1]);
    CHECK(back.boundary_vertex[v] == m.boundary_vertex[v]);
  }
  for (int e = 0; e < m.n_elements(); ++e) CHECK(back.element_volume[e] == m.element_volume[e]);

  const Mesh m1 = build_interval_mesh(5);
  std::stringstream s1;
  write_mesh(m1, s1);
  const Mesh b1 = read_mesh(s1);
  CHECK(b1.n_elements() == 5);
  CHECK(b1.dim == 1);
}
