#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gstate/mass_min.hpp"
#include "oracles.hpp"

using namespace gstate;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const Model& cubic_model() {
  static const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 4096, 30.0));
  return model;
}

const Model& asymmetric_model() {
  static const Model model(appendix_a(1.0, 1, 4.0, 3.0), RadialGrid::whole_space(1, 4096, 30.0));
  return model;
}

}  // namespace

TEST_CASE("constrained minimum of the cubic problem") {
  const Model& model = cubic_model();
  for (double c : {1.0, 2.0}) {
    const MinimizerResult r = minimize_on_sphere(model, c);
    REQUIRE(r.converged);
    CHECK(rel(r.m, oracle::cubic_ground_energy(c)) < 1e-4);
    CHECK(rel(r.lambda, oracle::cubic_multiplier(c)) < 1e-4);
    CHECK(rel(eval_mass(model.grid(), r.u), c) < 1e-10);
    CHECK(std::abs(r.multiplier_check - r.lambda) < 1e-8 * std::abs(r.lambda));
    CHECK(r.max_projection_error < 1e-12);
    CHECK(r.distinct_minima.size() == 1);
    CHECK(r.morse_index == 1);
    CHECK(r.u.minCoeff() > 0.0);
    for (int i = 0; i + 1 < r.u.size(); ++i) CHECK(r.u[i + 1] <= r.u[i] + 1e-10);
  }
}

TEST_CASE("doubling the scale lowers the level at least proportionally") {
  const Model& model = cubic_model();
  const double m1 = minimize_on_sphere(model, 0.5).m;
  const double m4 = minimize_on_sphere(model, 2.0).m;
  CHECK(m4 <= 4.0 * m1);
}

TEST_CASE("minimization contract") {
  const Model super(nls_potential(1, 8.0), RadialGrid::whole_space(1, 200, 20.0));
  CHECK_THROWS_AS(minimize_on_sphere(super, 1.0), ValidationError);
  CHECK_THROWS_AS(minimize_on_sphere(cubic_model(), 0.0), ValidationError);
  CHECK_THROWS_AS(mass_curve(cubic_model(), {}), ValidationError);
  CHECK_THROWS_AS(mass_curve(cubic_model(), {1.0, 0.5}), ValidationError);
  CHECK(scaling_exponent(1.0, 1, 4.0) == doctest::Approx(3.0));
  CHECK(scaling_exponent(1.0, 1, 3.0) == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(scaling_exponent(1.0, 1, 6.0), ValidationError);
  CHECK_THROWS_AS(counterexample_crossing(1.0, 1, 4.0, 4.0, cubic_model().grid()), ValidationError);
}

TEST_CASE("mass curve of the cubic problem") {
  const Model& model = cubic_model();
  std::vector<double> cs;
  for (int i = 0; i < 6; ++i) cs.push_back(0.5 * std::pow(8.0, i / 5.0));
  const MassCurve curve = mass_curve(model, cs);
  REQUIRE(curve.m.size() == cs.size());
  CHECK(curve.kinks.empty());

  // least-squares slope of log(-m) against log c
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double x = std::log(cs[i]), y = std::log(-curve.m[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  CHECK(std::abs((n * sxy - sx * sy) / (n * sxx - sx * sx) - 3.0) < 1e-3);

  for (std::size_t i = 0; i < cs.size(); ++i) {
    CHECK(curve.m[i] < 0.0);
    CHECK(curve.lambda[i] < 0.0);
    CHECK(rel(curve.dq_center[i], curve.lambda[i]) < 1e-3);
    CHECK(rel(curve.lambda[i], oracle::cubic_multiplier(cs[i])) < 1e-3);
    CHECK(curve.n_clusters[i] == 1);
    if (i > 0) CHECK(curve.m[i] < curve.m[i - 1] + 1e-10);
    // one-sided quotients bracket the multiplier
    CHECK(curve.dq_right[i] <= curve.lambda[i] + 10 * curve.dq_right_err[i]);
    CHECK(curve.lambda[i] <= curve.dq_left[i] + 10 * curve.dq_left_err[i]);
  }

  SUBCASE("expression check reduces to 3 m / c") {
    const ExpressionReport rep = m_expression_check(model, curve);
    REQUIRE(rep.conclusive);
    CHECK(rep.max_ode_residual < 1e-3);
    CHECK(rep.max_lambda_residual < 1e-3);
    for (double w : rep.weight_term) CHECK(w == 0.0);
    for (std::size_t i = 0; i < rep.c.size(); ++i) CHECK(rel(rep.expression[i], 3.0 * curve.m[i] / rep.c[i]) < 1e-12);
  }
}

TEST_CASE("strict subadditivity on random pairs") {
  const Model& model = cubic_model();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pick(0.3, 1.5);
  MinimizeOptions opts;
  opts.multistart = 3;
  opts.compute_morse = false;
  for (int t = 0; t < 3; ++t) {
    const double c1 = pick(rng), c2 = pick(rng);
    const double joint = minimize_on_sphere(model, c1 + c2, opts).m;
    const double split = minimize_on_sphere(model, c1, opts).m + minimize_on_sphere(model, c2, opts).m;
    CHECK(joint < split);
  }
}

TEST_CASE("single sample gives no derivative or kink claims") {
  const MassCurve curve = mass_curve(cubic_model(), {1.0});
  CHECK(std::isnan(curve.dq_left[0]));
  CHECK(std::isnan(curve.dq_right[0]));
  CHECK(curve.kinks.empty());
  CHECK_FALSE(m_expression_check(cubic_model(), curve).conclusive);
}

TEST_CASE("asymmetric power problem has a kink at the crossing") {
  const Model& model = asymmetric_model();
  const CrossingResult cr = counterexample_crossing(1.0, 1, 4.0, 3.0, model.grid());
  CHECK(rel(cr.m_plus_1, oracle::unit_mass_level_quartic()) < 1e-4);
  CHECK(rel(cr.m_minus_1, oracle::unit_mass_level_cubic()) < 1e-4);
  const double c_hat = std::pow(oracle::unit_mass_level_cubic() / oracle::unit_mass_level_quartic(), 1.0 / (3.0 - 5.0 / 3.0));
  CHECK(rel(cr.c_hat_scaling, c_hat) < 1e-4);
  CHECK(rel(cr.c_hat, c_hat) < 1e-4);
  const double gap = (3.0 - 5.0 / 3.0) * std::abs(oracle::unit_mass_level_quartic() * std::pow(c_hat, 3.0)) / c_hat;
  CHECK(rel(cr.dq_left - cr.dq_right, gap) < 1e-3);

  const auto at_hat = lambda_set_scan(model, cr.c_hat);
  CHECK(at_hat.second - at_hat.first > 1.0);
  const auto away = lambda_set_scan(model, 0.6);
  CHECK(away.first == away.second);

  std::vector<double> cs = {0.7, 0.8, 0.9, cr.c_hat, 1.05, 1.2};
  const MassCurve curve = mass_curve(model, cs);
  REQUIRE(curve.kinks.size() == 1);
  CHECK(curve.kinks[0].at_sample);
  CHECK(curve.kinks[0].c == cr.c_hat);
  CHECK(curve.kinks[0].gap > 10.0 * curve.kinks[0].error);
  CHECK(curve.n_clusters[3] == 2);

  SUBCASE("a kink between samples is located by the branch switch") {
    const MassCurve coarse = mass_curve(model, {0.8, 0.9, 1.0, 1.1});
    REQUIRE(coarse.kinks.size() == 1);
    CHECK_FALSE(coarse.kinks[0].at_sample);
    CHECK(coarse.kinks[0].lower == 1);
    CHECK(std::abs(coarse.kinks[0].c - cr.c_hat) < 1e-3);
  }
}

TEST_CASE("ball minimizer has index one") {
  const Model model(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, 300));
  MinimizeOptions opts;
  opts.multistart = 4;
  const MinimizerResult r = minimize_on_sphere(model, 1.0, opts);
  REQUIRE(r.converged);
  CHECK(r.morse_index == 1);
  CHECK(r.lambda < model.linear_threshold());
}

TEST_CASE("expression check needs the classical operator") {
  const Model frac(frac_power(0.7, 1, 3.0), RadialGrid::whole_space(1, 100, 30.0));
  MassCurve curve;
  CHECK_THROWS_AS(m_expression_check(frac, curve), ValidationError);
}
