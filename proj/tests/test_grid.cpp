#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gstate/grid.hpp"
#include "gstate/operators.hpp"
#include "oracles.hpp"

using namespace gstate;

namespace {

Vector sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  Vector v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.nodes()[i]);
  return v;
}

double lowest_eigenvalue(const DiscreteOperator& op) { return lowest_eigenpairs(op.scaled(), 1).values[0]; }

}  // namespace

TEST_CASE("quadrature reproduces ball volumes and moments") {
  const auto ball = RadialGrid::unit_ball(3, 400);
  // cells stop half a spacing short of the boundary node
  const double inner = 1.0 - 0.5 * ball.spacing();
  CHECK(ball.spacing() == doctest::Approx(1.0 / 400.5).epsilon(1e-15));
  CHECK(ball.integrate(Vector::Ones(400)) == doctest::Approx(4.0 * std::numbers::pi * std::pow(inner, 3) / 3.0).epsilon(1e-12));
  // 1 - r^2 vanishes at the boundary: int_{B_1} (1 - r^2) = 8 pi / 15
  CHECK(ball.integrate(sample(ball, [](double r) { return 1.0 - r * r; })) ==
        doctest::Approx(8.0 * std::numbers::pi / 15.0).epsilon(1e-5));
  CHECK(ball.integrate(Vector::Zero(400)) == 0.0);

  const auto line = RadialGrid::whole_space(1, 300, 7.5);
  CHECK(line.weights().sum() == doctest::Approx(2.0 * (7.5 - 0.5 * line.spacing())).epsilon(1e-13));
  for (int dim = 1; dim <= 4; ++dim) {
    const auto g = RadialGrid::whole_space(dim, 100, 2.0);
    const double volume = sphere_area(dim) * std::pow(2.0 - 0.5 * g.spacing(), dim) / dim;
    CHECK(g.weights().sum() == doctest::Approx(volume).epsilon(1e-12));
    CHECK((g.weights().array() > 0.0).all());
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(RadialGrid::unit_ball(3, 2), ValidationError);
  CHECK_THROWS_AS(RadialGrid::whole_space(0, 10, 1.0), ValidationError);
  CHECK_THROWS_AS(RadialGrid::whole_space(1, 10, -1.0), ValidationError);
  const auto g = RadialGrid::whole_space(2, 10, 1.0);
  CHECK_THROWS_AS(g.integrate(Vector::Ones(9)), ValidationError);
  for (int i = 0; i + 1 < g.size(); ++i) CHECK(g.nodes()[i] < g.nodes()[i + 1]);
  CHECK(g.nodes()[g.size() - 1] < g.outer_radius());
}

TEST_CASE("origin value and boundary slope extrapolation") {
  const auto g = RadialGrid::unit_ball(3, 200);
  const Vector u = sample(g, [](double r) { return 1.0 - r * r; });
  CHECK(g.value_at_origin(u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.boundary_slope(u) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("Dirichlet ball eigenvalues match Bessel zeros") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(oracle::ball_first_eigenvalue(3) == doctest::Approx(pi2).epsilon(1e-14));
  const double e3 = lowest_eigenvalue(build_radial_laplacian(RadialGrid::unit_ball(3, 2000)));
  CHECK(std::abs(e3 - pi2) / pi2 < 1e-5);
  const double j01 = oracle::ball_first_eigenvalue(2);
  CHECK(std::sqrt(j01) == doctest::Approx(2.404825557695773).epsilon(1e-12));
  const double e2 = lowest_eigenvalue(build_radial_laplacian(RadialGrid::unit_ball(2, 2000)));
  CHECK(std::abs(e2 - j01) / j01 < 1e-5);
}

TEST_CASE("ball eigenvalue error decreases under refinement") {
  const double exact = oracle::ball_first_eigenvalue(3);
  double previous = 0.0;
  for (int n : {50, 100, 200, 400}) {
    const double err = std::abs(lowest_eigenvalue(build_radial_laplacian(RadialGrid::unit_ball(3, n))) - exact);
    if (previous > 0.0) CHECK(previous / err > 3.5);  // second order
    previous = err;
  }
}

TEST_CASE("operators are symmetric in the weighted inner product and positive") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  const auto g3 = RadialGrid::unit_ball(3, 300);
  const auto g1 = RadialGrid::whole_space(1, 300, 10.0);
  for (const auto& [grid, op] : {std::pair{g3, build_radial_laplacian(g3)}, std::pair{g1, build_radial_laplacian(g1)},
                                 std::pair{g1, build_fractional_laplacian_1d(g1, 0.3)}}) {
    for (int trial = 0; trial < 5; ++trial) {
      Vector u(grid.size()), w(grid.size());
      for (int i = 0; i < grid.size(); ++i) {
        u[i] = normal(rng);
        w[i] = normal(rng);
      }
      const double lhs = grid.inner(op.apply(u), w);
      const double rhs = grid.inner(u, op.apply(w));
      CHECK(std::abs(lhs - rhs) < 1e-10 * grid.norm(u) * grid.norm(w) * op.scaled().norm_inf());
    }
    CHECK(lowest_eigenvalue(op) > -1e-10);
  }
  CHECK(lowest_eigenvalue(build_radial_laplacian(g3)) > 0.0);
}

TEST_CASE("Laplacian of a constant vanishes away from the outer boundary") {
  const auto g = RadialGrid::whole_space(3, 100, 5.0);
  const Vector au = build_radial_laplacian(g).apply(Vector::Ones(100));
  CHECK(au.head(99).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(au[99] > 0.0);
}

TEST_CASE("radial Laplacian is second order on a smooth profile") {
  // -Delta exp(-r^2) = (2N - 4 r^2) exp(-r^2)
  for (int dim : {1, 2, 3}) {
    double previous = 0.0;
    for (int n : {200, 400, 800}) {
      const auto g = RadialGrid::whole_space(dim, n, 8.0);
      const Vector u = sample(g, [](double r) { return std::exp(-r * r); });
      const Vector exact = sample(g, [dim](double r) { return (2.0 * dim - 4.0 * r * r) * std::exp(-r * r); });
      const double err = g.norm(build_radial_laplacian(g).apply(u) - exact);
      if (previous > 0.0) CHECK(previous / err > 3.5);
      previous = err;
    }
  }
}

TEST_CASE("fractional Laplacian matches the singular-integral oracle") {
  const double s = 0.5;
  const auto g = RadialGrid::whole_space(1, 2000, 20.0);
  const auto op = build_fractional_laplacian_1d(g, s);
  auto gauss = [](double x) { return std::exp(-x * x); };
  const Vector au = op.apply(sample(g, gauss));
  const double x0 = g.nodes()[0];
  const double reference = oracle::fractional_laplacian_1d(gauss, x0, s);
  CHECK(std::abs(au[0] - reference) / std::abs(reference) < 1e-3);
  // closed form at the origin: (-Delta)^s exp(-x^2) (0) = 4^s Gamma(s + 1/2) / sqrt(pi)
  const double at_zero = std::pow(4.0, s) * std::tgamma(s + 0.5) / std::sqrt(std::numbers::pi);
  CHECK(oracle::fractional_laplacian_1d(gauss, 0.0, s) == doctest::Approx(at_zero).epsilon(1e-8));
  CHECK(op.apply(Vector::Zero(2000)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fractional Laplacian approaches the classical one as s -> 1") {
  const auto g = RadialGrid::whole_space(1, 600, 6.0);
  auto bump = [](double x) { return std::abs(x) < 3.0 ? std::pow(std::cos(std::numbers::pi * x / 6.0), 4) : 0.0; };
  const Vector u = sample(g, bump);
  const Vector classical = build_radial_laplacian(g).apply(u);
  const Vector frac = build_fractional_laplacian_1d(g, 0.999).apply(u);
  CHECK(g.norm(frac - classical) / g.norm(classical) < 1e-2);

  const Vector w = fractional_difference_weights(1.0, 4);
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == doctest::Approx(-1.0));
  CHECK(w[2] == doctest::Approx(0.0));
}

TEST_CASE("fractional Laplacian input validation") {
  const auto line = RadialGrid::whole_space(1, 50, 5.0);
  CHECK_THROWS_AS(build_fractional_laplacian_1d(line, 1.0), ValidationError);
  CHECK_THROWS_AS(build_fractional_laplacian_1d(line, 0.0), ValidationError);
  CHECK_THROWS_AS(build_fractional_laplacian_1d(RadialGrid::unit_ball(1, 50), 0.5), ValidationError);
  CHECK_THROWS_AS(build_fractional_laplacian_1d(RadialGrid::whole_space(2, 50, 5.0), 0.5), ValidationError);
}
