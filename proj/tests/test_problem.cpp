#include <cmath>
#include <random>

#include "doctest.h"
#include "gstate/hypotheses.hpp"
#include "gstate/problem.hpp"
#include "oracles.hpp"

using namespace gstate;

namespace {

Vector sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  Vector v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.nodes()[i]);
  return v;
}

Vector random_profile(const RadialGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.5, 1.5), width(0.5, 2.0);
  const double a = amp(rng), w = width(rng);
  return sample(grid, [&](double r) { return a * std::exp(-r * r / (w * w)) * (1.0 + 0.3 * std::cos(r)); });
}

}  // namespace

TEST_CASE("energy and mass of the sech profile") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 16384, 30.0));
  const Vector u = sample(model.grid(), [](double x) { return oracle::soliton(1.0, x); });
  CHECK(eval_mass(model.grid(), u) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(model.kinetic_energy(u) == doctest::Approx(oracle::soliton_kinetic(1.0)).epsilon(1e-5));
  const double e = eval_energy(model, u);
  CHECK(std::abs(e + 2.0 / 3.0) / (2.0 / 3.0) < 1e-5);
  CHECK(eval_energy(model, Vector::Zero(model.grid().size())) == 0.0);
  CHECK(eval_action(model, u, -1.0) == doctest::Approx(e + 2.0));
}

TEST_CASE("mass is quadratic and invariant under mass-preserving dilation") {
  const auto g = RadialGrid::whole_space(1, 4000, 40.0);
  const Vector u = sample(g, [](double x) { return std::exp(-x * x); });
  CHECK(eval_mass(g, 3.0 * u) == doctest::Approx(9.0 * eval_mass(g, u)).epsilon(1e-14));
  CHECK(eval_mass(g, Vector::Zero(4000)) == 0.0);
  for (double tau : {0.5, 2.0, 3.0}) {
    const Vector ut = sample(g, [tau](double x) { return std::sqrt(tau) * std::exp(-tau * tau * x * x); });
    CHECK(std::abs(eval_mass(g, ut) - eval_mass(g, u)) / eval_mass(g, u) < 1e-8);
  }
}

TEST_CASE("tiny ball eigenfunction has nearly linear energy") {
  const Model model(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, 400));
  const auto eig = lowest_eigenpairs(model.kinetic().scaled(), 1);
  const Vector e1 = model.kinetic().from_scaled(eig.vectors.col(0));
  // nonlinear part is O(eps^p) against O(eps^2): relative size eps^{p-2} = 1e-5
  const double eps = 1e-10;
  const Vector u = eps * e1 / model.grid().norm(e1);
  const double linear = 0.5 * eig.values[0] * model.grid().inner(u, u);
  CHECK(std::abs(eval_energy(model, u) - linear) / linear < 1e-4);
  CHECK(model.linear_threshold() == doctest::Approx(eig.values[0]));
}

TEST_CASE("action gradient is the derivative of the action") {
  std::mt19937_64 rng(11);
  for (const auto& spec : {frac_power(1.0, 1, 4.0), frac_power(0.6, 1, 3.0), nls_potential(3, 3.0, "well", 2.0),
                           appendix_a(1.0, 1, 4.0, 3.0), ball_hardy(3, 1.0, 2.5)}) {
    const auto grid = spec.domain == DomainKind::UnitBall ? RadialGrid::unit_ball(spec.dim, 200)
                                                          : RadialGrid::whole_space(spec.dim, 200, 10.0);
    const Model model(spec, grid);
    const double lambda = -0.7;
    CHECK(eval_action_gradient(model, Vector::Zero(200), lambda).cwiseAbs().maxCoeff() == 0.0);
    for (int trial = 0; trial < 4; ++trial) {
      const Vector u = random_profile(grid, rng);
      const Vector w = random_profile(grid, rng) - 0.5 * random_profile(grid, rng);
      const double exact = grid.inner(eval_action_gradient(model, u, lambda), w);
      double previous = 0.0;
      for (double eps : {1e-2, 5e-3, 2.5e-3}) {
        const double fd = (eval_action(model, u + eps * w, lambda) - eval_action(model, u - eps * w, lambda)) / (2 * eps);
        const double err = std::abs(fd - exact);
        CHECK(err <= 20.0 * eps * eps * std::abs(exact) + 1e-10 * std::abs(exact));
        if (previous > 1e-10 * std::abs(exact)) CHECK(previous / err > 3.0);
        previous = err;
      }
    }
  }
}

TEST_CASE("odd nonlinearity gives an odd gradient") {
  const Model model(frac_power(1.0, 1, 3.0), RadialGrid::whole_space(1, 100, 10.0));
  std::mt19937_64 rng(3);
  const Vector u = random_profile(model.grid(), rng);
  CHECK((eval_action_gradient(model, -u, -1.0) + eval_action_gradient(model, u, -1.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("preset parameter validation") {
  CHECK_NOTHROW(ball_hardy(3, 1.0, 2.5));
  CHECK_THROWS_AS(ball_hardy(3, 1.0, 3.0), ValidationError);  // p >= 2 + 2(2-k)/N = 8/3
  CHECK_THROWS_AS(ball_hardy(2, 1.0, 2.5), ValidationError);
  CHECK_THROWS_AS(ball_hardy(3, 2.0, 2.5), ValidationError);
  CHECK_THROWS_AS(frac_power(1.0, 1, 6.0), ValidationError);
  CHECK_THROWS_AS(frac_power(0.5, 2, 2.5), ValidationError);
  CHECK_NOTHROW(frac_power(1.0, 2, 3.0, "decay", 0.25));
  CHECK_THROWS_AS(frac_power(1.0, 2, 3.6, "decay", 0.25), ValidationError);  // 2 + (2 theta + 4)/N = 3.5
  CHECK_THROWS_AS(appendix_a(1.0, 1, 4.0, 4.0), ValidationError);
  CHECK_NOTHROW(nls_potential(1, 8.0));
  CHECK_FALSE(nls_potential(1, 8.0).bounded_below_on_spheres);
  PresetParams bad;
  bad.id = "nope";
  CHECK_THROWS_AS(make_problem(bad), ValidationError);
  CHECK_THROWS_AS(Model(ball_hardy(3, 1.0, 2.5), RadialGrid::whole_space(3, 50, 5.0)), ValidationError);
  const Model m(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 10, 5.0));
  Vector nan = Vector::Zero(10);
  nan[3] = std::nan("");
  CHECK_THROWS_AS(eval_energy(m, nan), ValidationError);
}

TEST_CASE("hypothesis checker") {
  SUBCASE("constant weight passes (h) with theta = 0") {
    const auto report = check_hypotheses(frac_power(1.0, 1, 4.0));
    CHECK(report.get("h").verdict == Verdict::Pass);
    CHECK(report.theta_estimate == doctest::Approx(0.0));
  }
  SUBCASE("decaying weight has theta = -2a") {
    const auto report = check_hypotheses(frac_power(1.0, 2, 3.0, "decay", 0.25));
    CHECK(report.theta_estimate == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(report.get("h").verdict == Verdict::Pass);
  }
  SUBCASE("cubic in 1D satisfies (f1), (f2), (f3)") {
    const auto report = check_hypotheses(frac_power(1.0, 1, 4.0));
    CHECK(report.get("f1").verdict == Verdict::Pass);
    CHECK(report.get("f2").verdict == Verdict::Pass);
    CHECK(report.get("f2'").verdict == Verdict::Fail);
    CHECK(report.get("f2'").witness.has_value());
    CHECK(report.get("f3").verdict == Verdict::Pass);
    CHECK(report.get("H2").verdict == Verdict::Pass);
    CHECK(report.get("H3'").verdict == Verdict::Pass);
    CHECK(report.get("H4").verdict == Verdict::Pass);
    CHECK(report.get("V").verdict == Verdict::Inconclusive);
    CHECK(report.get("H1").verdict == Verdict::Fail);
  }
  SUBCASE("septic power in 1D satisfies (f2')") {
    const auto report = check_hypotheses(nls_potential(1, 8.0));
    CHECK(report.get("f2'").verdict == Verdict::Pass);
    CHECK(report.get("f2").verdict == Verdict::Fail);
  }
  SUBCASE("potential well satisfies (V) and (H1)") {
    const auto report = check_hypotheses(nls_potential(1, 4.0, "well", 1.0));
    CHECK(report.get("V").verdict == Verdict::Pass);
    CHECK(report.get("H1").verdict == Verdict::Pass);
    CHECK(report.get("H3").verdict == Verdict::Pass);
  }
  SUBCASE("asymmetric nonlinearity is not odd") {
    const auto report = check_hypotheses(appendix_a(1.0, 1, 4.0, 3.0));
    const auto& f1 = report.get("f1");
    REQUIRE(f1.verdict == Verdict::Fail);
    REQUIRE(f1.witness.has_value());
    CHECK(f1.witness->violation > 1e-9);
  }
  SUBCASE("Hardy weight is unbounded at the origin") {
    const auto report = check_hypotheses(ball_hardy(3, 1.0, 2.5));
    CHECK(report.get("h").verdict == Verdict::Fail);
    CHECK(report.theta_estimate == doctest::Approx(-1.0));
  }
  SUBCASE("missing derivative handles are never a pass") {
    auto spec = frac_power(1.0, 1, 4.0);
    spec.weight.derivative = nullptr;
    spec.nonlinearity.F_r = nullptr;
    const auto report = check_hypotheses(spec);
    CHECK(report.get("h").verdict == Verdict::Inconclusive);
    CHECK(report.get("f1").verdict == Verdict::Inconclusive);
  }
}
