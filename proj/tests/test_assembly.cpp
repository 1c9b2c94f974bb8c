#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fraclap/assembly.hpp"
#include "fraclap/exact.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

using oracle::oracle_stiffness;
using oracle::scaled_copy;
using oracle::square_mesh_4x2;

}  // namespace

TEST_CASE("normalization constant") {
  CHECK(normalization_constant(1, 0.5) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
  CHECK(normalization_constant(2, 0.5) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-13));
  // reflection-formula route: Gamma(-s) = -pi / (s sin(pi s) Gamma(s))
  const double s = 0.25;
  const double gneg = -M_PI / (s * std::sin(M_PI * s) * std::tgamma(s));
  const double ref = -std::pow(2.0, 2.0 * s) * std::tgamma(s + 1.0) / (M_PI * gneg);
  CHECK(normalization_constant(2, s) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(normalization_constant(1, 0.3) > 0.0);
  CHECK_THROWS_AS(normalization_constant(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(normalization_constant(3, 0.5), std::invalid_argument);
}

TEST_CASE("exterior weight, 1D closed form") {
  const Mesh m = build_interval_mesh(4);
  const BoundaryGeometry bd = domain_boundary(m);
  for (double s : {0.2, 0.5, 0.8})
    CHECK(exterior_weight({0.0, 0.0}, bd, s) == doctest::Approx(1.0 / s).epsilon(1e-14));
  CHECK(exterior_weight({0.5, 0.0}, bd, 0.5) ==
        doctest::Approx((std::pow(0.5, -1.0) + std::pow(1.5, -1.0)) / 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(exterior_weight({1.0, 0.0}, bd, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(exterior_weight({2.0, 0.0}, bd, 0.5), std::invalid_argument);
}

TEST_CASE("exterior weight, 2D disc polygon") {
  const Mesh m = build_disc_mesh(64);
  const BoundaryGeometry bd = domain_boundary(m);
  for (double s : {0.3, 0.5, 0.7}) {
    // center value: pi/s for the exact disc; 64-gon within polygon error
    CHECK(exterior_weight({0.0, 0.0}, bd, s) ==
          doctest::Approx(M_PI / s).epsilon(1e-3));
  }
  // central symmetry
  for (const Vec2 x : {Vec2{0.3, 0.2}, Vec2{0.77, 0.1}, Vec2{0.05, -0.6}}) {
    const double a = exterior_weight(x, bd, 0.4);
    const double b = exterior_weight({-x[0], -x[1]}, bd, 0.4);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  // independent polar-reduction oracle at generic points
  for (const Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.31, -0.22}, Vec2{0.9, 0.05}}) {
    for (double s : {0.25, 0.6}) {
      const double ref = oracle::exterior_weight_polar(x, bd.loop, s);
      CHECK(exterior_weight(x, bd, s) == doctest::Approx(ref).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(exterior_weight({2.0, 0.0}, bd, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(exterior_weight({1.0, 0.0}, bd, 0.5), std::invalid_argument);
}

TEST_CASE("load vector") {
  const Mesh m = build_interval_mesh(8);
  const Eigen::VectorXd F = assemble_load(m, [](const Vec2&) { return 1.0; });
  for (int v = 0; v < m.n_vertices(); ++v)
    if (!m.boundary_vertex[v]) CHECK(F[v] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(F.sum() == doctest::Approx(2.0).epsilon(1e-12));

  const Mesh d = refine_uniform(build_disc_mesh(16), false);
  const Eigen::VectorXd Fd = assemble_load(d, [](const Vec2&) { return 1.0; });
  CHECK(Fd.sum() == doctest::Approx(8.0 * std::sin(2.0 * M_PI / 16.0)).epsilon(1e-12));

  // f = 2^(2s) Gamma(1+s)^2 at s = 1/2 is pi/2
  const ExactSolution ex = disc_exact_solution(0.5, 2);
  CHECK(ex.rhs_constant == doctest::Approx(M_PI / 2.0).epsilon(1e-14));
}

TEST_CASE("mass matrix") {
  const Mesh m = build_interval_mesh(8);
  const auto M = assemble_mass(m);
  const double h = 0.25;
  CHECK(M.coeff(3, 3) == doctest::Approx(2.0 * h / 3.0).epsilon(1e-14));
  CHECK(M.coeff(3, 4) == doctest::Approx(h / 6.0).epsilon(1e-14));
  CHECK(Eigen::MatrixXd(M).sum() == doctest::Approx(2.0).epsilon(1e-12));
  // row sums reproduce int phi_i
  const Eigen::VectorXd F = assemble_load(m, [](const Vec2&) { return 1.0; });
  const Eigen::VectorXd rows = M * Eigen::VectorXd::Ones(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) CHECK(rows[v] == doctest::Approx(F[v]).epsilon(1e-13));

  const Mesh d = refine_uniform(build_disc_mesh(8), true);
  const auto Md = assemble_mass(d);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Md);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("stiffness oracle equivalence, 1D four elements") {
  const Mesh m = build_interval_mesh(4);
  for (double s : {0.25, 0.5, 0.75}) {
    CAPTURE(s);
    const StiffnessSystem sys = assemble_stiffness(m, s);
    const Eigen::MatrixXd ref = oracle_stiffness(m, s);
    REQUIRE(sys.K.rows() == ref.rows());
    for (int i = 0; i < ref.rows(); ++i)
      for (int j = 0; j < ref.cols(); ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(sys.K(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-6));
      }
  }
}

TEST_CASE("stiffness oracle equivalence, 2D sixteen elements") {
  const Mesh sq = square_mesh_4x2();
  for (double s : {0.3, 0.5, 0.75}) {
    CAPTURE(s);
    const StiffnessSystem sys = assemble_stiffness(sq, s);
    const Eigen::MatrixXd ref = oracle_stiffness(sq, s);
    REQUIRE(sys.K.rows() == 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(sys.K(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-6));
      }
  }
  // disc fan: single free dof at the center, exercises the disc exterior path
  const Mesh fan = build_disc_mesh(16);
  const double s = 0.5;
  const StiffnessSystem sys = assemble_stiffness(fan, s);
  const Eigen::MatrixXd ref = oracle_stiffness(fan, s);
  REQUIRE(sys.K.rows() == 1);
  CHECK(sys.K(0, 0) == doctest::Approx(ref(0, 0)).epsilon(1e-6));
}

TEST_CASE("single free hat, full-form oracle") {
  // 1D, two elements, one hat at 0
  const Mesh m = build_interval_mesh(2);
  const double s = 0.5;
  const StiffnessSystem sys = assemble_stiffness(m, s);
  REQUIRE(sys.K.rows() == 1);
  const Eigen::MatrixXd ref = oracle_stiffness(m, s);
  CHECK(sys.K(0, 0) == doctest::Approx(ref(0, 0)).epsilon(1e-6));
}

TEST_CASE("stiffness symmetry and SPD") {
  const Mesh d = refine_uniform(build_disc_mesh(8), true);
  const StiffnessSystem sys = assemble_stiffness(d, 0.6);
  CHECK((sys.K - sys.K.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(sys.K);
  CHECK(llt.info() == Eigen::Success);
  for (int i = 0; i < sys.K.rows(); ++i) CHECK(sys.K(i, i) > 0.0);
}

TEST_CASE("stiffness scaling law") {
  // K(c*mesh) = c^(dim-2s) K(mesh) entrywise
  {
    const Mesh m = build_interval_mesh(8);
    for (double s : {0.3, 0.5, 0.7}) {
      for (double c : {0.5, 2.0}) {
        const StiffnessSystem k1 = assemble_stiffness(m, s);
        const StiffnessSystem k2 = assemble_stiffness(scaled_copy(m, c), s);
        const double factor = std::pow(c, 1.0 - 2.0 * s);
        for (int i = 0; i < k1.K.rows(); ++i)
          for (int j = 0; j < k1.K.cols(); ++j)
            CHECK(k2.K(i, j) == doctest::Approx(factor * k1.K(i, j)).epsilon(1e-7));
      }
    }
  }
  {
    const Mesh m = refine_uniform(build_disc_mesh(8), false);
    const double s = 0.4, c = 2.0;
    const StiffnessSystem k1 = assemble_stiffness(m, s);
    const StiffnessSystem k2 = assemble_stiffness(scaled_copy(m, c), s);
    const double factor = std::pow(c, 2.0 - 2.0 * s);
    for (int i = 0; i < k1.K.rows(); ++i)
      for (int j = 0; j < k1.K.cols(); ++j)
        CHECK(k2.K(i, j) == doctest::Approx(factor * k1.K(i, j)).epsilon(1e-7));
  }
}

TEST_CASE("assembly determinism across worker counts") {
  const Mesh d = refine_uniform(build_disc_mesh(8), true);
  AssemblyConfig c1, c3;
  c1.workers = 1;
  c3.workers = 3;
  const StiffnessSystem s1 = assemble_stiffness(d, 0.5, c1);
  const StiffnessSystem s3 = assemble_stiffness(d, 0.5, c3);
  REQUIRE(s1.K.rows() == s3.K.rows());
  for (int i = 0; i < s1.K.rows(); ++i)
    for (int j = 0; j < s1.K.cols(); ++j) CHECK(s1.K(i, j) == s3.K(i, j));  // bitwise
}

TEST_CASE("system binary dump round trip") {
  const Mesh m = build_interval_mesh(4);
  StiffnessSystem sys = assemble_stiffness(m, 0.5);
  attach_load(sys, assemble_load(m, [](const Vec2&) { return 1.0; }));
  const std::string path = "dump_test.frlk";
  dump_system(sys, path);
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
  read_system_dump(path, K, F);
  CHECK((K - sys.K).cwiseAbs().maxCoeff() == 0.0);
  CHECK((F - sys.F).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
