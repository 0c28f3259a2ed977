#include "doctest.h"

#include "aniso/oracle.hpp"

#include <cmath>

using namespace aniso;

namespace {
Vec vec1(double a) {
  Vec v(1);
  v[0] = a;
  return v;
}
}  // namespace

TEST_CASE("finite differences") {
  const auto half_sq = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  CHECK(finite_diff_gradient(half_sq, vec1(3.0), 1e-6)[0] ==
        doctest::Approx(3.0).epsilon(1e-6));

  const auto constant = [](const Vec&) { return 7.0; };
  CHECK(finite_diff_gradient(constant, vec1(1.0), 1e-6).norm() == 0.0);

  const auto barrier = [](const Vec& x) {
    return std::abs(x[0]) < 1.0 ? 0.0 : kInf;
  };
  CHECK_THROWS_AS(finite_diff_gradient(barrier, vec1(1.0 - 1e-9), 1e-6), StencilError);
}

TEST_CASE("finite differences are second order on cubics") {
  const auto cubic = [](const Vec& x) { return x[0] * x[0] * x[0]; };
  const Vec x = vec1(0.7);
  const double exact = 3.0 * 0.49;
  const double e1 = std::abs(finite_diff_gradient(cubic, x, 1e-3)[0] - exact);
  const double e2 = std::abs(finite_diff_gradient(cubic, x, 5e-4)[0] - exact);
  CHECK(e2 == doctest::Approx(e1 / 4.0).epsilon(0.05));
}

TEST_CASE("grid argmin on a shifted parabola") {
  const auto fn = [](const Vec& z) { return (z[0] - 1.0) * (z[0] - 1.0); };
  const GridSpec grid = GridSpec::uniform(-2.0, 2.0, 401);
  const GridResult r = grid_argmin(fn, grid);
  CHECK(r.argmins.size() == 1);
  CHECK(r.argmins[0][0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.min_value == doctest::Approx(0.0));
}

TEST_CASE("grid argmin finds both symmetric minima of the double well") {
  const auto fn = [](const Vec& z) {
    const double s = z[0] * z[0] - 1.0;
    return s * s;
  };
  const GridSpec grid = GridSpec::uniform(-2.0, 2.0, 401);
  const GridResult r = grid_argmin(fn, grid);
  REQUIRE(r.argmins.size() == 2);
  CHECK(r.argmins[0][0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(r.argmins[1][0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("grid argmin with refinement on |z| + half (2 - z)^2") {
  const auto fn = [](const Vec& z) {
    return std::abs(z[0]) + 0.5 * (2.0 - z[0]) * (2.0 - z[0]);
  };
  GridSpec grid = GridSpec::uniform(-1.0, 3.0, 4001);
  grid.refine_levels = 2;
  const GridResult r = grid_argmin(fn, grid);
  REQUIRE(r.argmins.size() == 1);
  CHECK(r.argmins[0][0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.min_value == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("refinement accuracy improves one grid cell per level") {
  const auto fn = [](const Vec& z) {
    return (z[0] - 0.123456) * (z[0] - 0.123456);
  };
  for (int levels = 0; levels <= 2; ++levels) {
    GridSpec grid = GridSpec::uniform(-2.0, 2.0, 401);
    grid.refine_levels = levels;
    const GridResult r = grid_argmin(fn, grid);
    const double cell = 4.0 / 400 / std::pow(10.0, levels);
    CHECK(std::abs(r.argmins[0][0] - 0.123456) <= cell);
  }
}

TEST_CASE("grid argmin rejects infeasible and invalid grids") {
  const auto inf_fn = [](const Vec&) { return kInf; };
  CHECK_THROWS_AS(grid_argmin(inf_fn, GridSpec::uniform(-1, 1, 11)), EmptyFeasibleError);

  GridSpec bad = GridSpec::uniform(-1, 1, 2);
  const auto fn = [](const Vec& z) { return z.squaredNorm(); };
  CHECK_THROWS_AS(grid_argmin(fn, bad), std::invalid_argument);

  GridSpec huge = GridSpec::uniform(-1, 1, 3000, 3);
  CHECK_THROWS_AS(grid_argmin(fn, huge), std::invalid_argument);
}

TEST_CASE("local convexity constants") {
  BasePotential quad(PotentialKind::quad, 2);
  const auto c = local_convexity_constants(quad, Vec::Constant(2, -1.0),
                                           Vec::Constant(2, 1.0), 50);
  CHECK(c.mu_hat == doctest::Approx(1.0));
  CHECK(c.gamma_hat == doctest::Approx(1.0));

  BasePotential logp(PotentialKind::log, 1);
  const auto cl = local_convexity_constants(logp, vec1(-0.5), vec1(0.5), 200);
  CHECK(cl.mu_hat >= 2.0);
  CHECK(cl.admissible());

  BasePotential cubic0(PotentialKind::cubic, 1);
  const auto cc = local_convexity_constants(cubic0, vec1(-0.5), vec1(0.5), 200);
  CHECK_FALSE(cc.admissible());

  CHECK_THROWS_AS(local_convexity_constants(logp, vec1(-2.0), vec1(0.5), 10),
                  std::invalid_argument);
}
