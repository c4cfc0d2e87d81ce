#include <cmath>

#include "doctest.h"
#include "gstate/diagnostics.hpp"
#include "oracles.hpp"

using namespace gstate;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const IdentityReport& find(const std::vector<IdentityReport>& reps, const std::string& id) {
  for (const auto& r : reps)
    if (r.id == id) return r;
  FAIL("identity " << id << " missing");
  return reps.front();
}

}  // namespace

TEST_CASE("soliton satisfies the dilation identities") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 16384, 30.0));
  const Solution sol = solve_ground_state(model, -1.0);
  const auto reps = identity_suite(model, sol, branch_tangent(model, sol));
  for (const auto& r : reps) CHECK_MESSAGE(r.pass, r.id << " residual " << r.rel_residual);
  const auto& mult = find(reps, "pohozaev_multiplier");
  CHECK(rel(mult.lhs, -8.0) < 1e-5);
  CHECK(rel(mult.rhs, -1.5 * oracle::soliton_quartic(1.0)) < 1e-5);
  const auto& tan = find(reps, "tangent_pohozaev");
  CHECK(rel(tan.rhs, -2.0) < 1e-4);

  SUBCASE("a perturbed profile fails") {
    Solution bad = sol;
    bad.u *= 1.01;
    CHECK_FALSE(find(pohozaev_residual(model, bad), "pohozaev_whole_space").pass);
  }
  SUBCASE("the zero state passes trivially") {
    Solution zero = sol;
    zero.u.setZero();
    for (const auto& r : pohozaev_residual(model, zero)) {
      CHECK(r.lhs == 0.0);
      CHECK(r.rhs == 0.0);
      CHECK(r.pass);
    }
    CHECK(tangent_pohozaev_check(model, zero, Vector::Zero(zero.u.size())).pass);
  }
}

TEST_CASE("interior identity residuals converge at second order") {
  for (const auto& spec : {frac_power(1.0, 1, 4.0), nls_potential(3, 3.0, "well", 1.0), appendix_a(1.0, 1, 4.0, 3.0)}) {
    double previous = 0.0, previous_tangent = 0.0;
    for (int n : {2000, 4000}) {
      const Model model(spec, RadialGrid::whole_space(spec.dim, n, 30.0));
      const Solution sol = solve_ground_state(model, -1.0);
      const double res = pohozaev_residual(model, sol).front().rel_residual;
      const double tan = tangent_pohozaev_check(model, sol, branch_tangent(model, sol)).rel_residual;
      if (previous > 0.0) {
        CHECK(previous / res > 3.5);
        CHECK(previous_tangent / tan > 3.5);
      }
      previous = res;
      previous_tangent = tan;
    }
  }
}

TEST_CASE("dilation identity with a potential on a fine grid") {
  const Model model(nls_potential(3, 3.0, "well", 1.0), RadialGrid::whole_space(3, 12000, 30.0));
  const Solution sol = solve_ground_state(model, -1.0);
  const auto reps = pohozaev_residual(model, sol);
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].id == "pohozaev_whole_space");
  CHECK(reps[0].pass);
}

TEST_CASE("fractional dilation identities") {
  SUBCASE("pass at s = 0.9") {
    const Model model(frac_power(0.9, 1, 3.0), RadialGrid::whole_space(1, 2400, 20.0));
    const Solution sol = solve_ground_state(model, -1.0);
    const auto reps = pohozaev_residual(model, sol);
    CHECK(find(reps, "pohozaev_fractional_lambda").rel_residual < 1e-5);
    CHECK(find(reps, "pohozaev_fractional_kinetic").rel_residual < 1e-5);
  }
  SUBCASE("converge under refinement at s = 0.7") {
    double previous = 0.0;
    for (int n : {400, 800}) {
      const Model model(frac_power(0.7, 1, 3.0), RadialGrid::whole_space(1, n, 40.0));
      const double res = find(pohozaev_residual(model, solve_ground_state(model, -1.0)), "pohozaev_fractional_lambda")
                             .rel_residual;
      if (previous > 0.0) CHECK(previous / res > 3.0);
      previous = res;
    }
  }
}

TEST_CASE("ball boundary identities") {
  const Model model(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, 1600));
  const Solution sol = solve_ground_state(model, 0.0);
  REQUIRE(sol.converged);
  const Vector v = branch_tangent(model, sol);
  const auto reps = identity_suite(model, sol, v);
  for (const auto& r : reps) CHECK_MESSAGE(r.pass, r.id << " residual " << r.rel_residual);
  // (N/2 - (2-k)/(p-2)) = -1/2 and lambda = 0 make the flux product negative
  CHECK(find(reps, "ball_tangent_flux_closed").lhs < 0.0);

  SUBCASE("linear in the tangent") {
    const auto doubled = ball_tangent_checks(model, sol, 2.0 * v);
    const auto single = ball_tangent_checks(model, sol, v);
    CHECK(doubled[0].lhs == doctest::Approx(2.0 * single[0].lhs).epsilon(1e-12));
    CHECK(doubled[1].rel_residual != doctest::Approx(0.0));
  }
  SUBCASE("second order convergence of the boundary terms") {
    double previous = 0.0;
    for (int n : {400, 800}) {
      const Model m(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, n));
      const double res = pohozaev_residual(m, solve_ground_state(m, 0.0)).front().rel_residual;
      if (previous > 0.0) CHECK(previous / res > 3.5);
      previous = res;
    }
  }
}

TEST_CASE("identity contracts") {
  const Model whole(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 500, 20.0));
  const Solution sol = solve_ground_state(whole, -1.0);
  CHECK_THROWS_WITH_AS(ball_tangent_checks(whole, sol, sol.u), "ball only", ValidationError);
  CHECK_THROWS_AS(tangent_pohozaev_check(whole, sol, Vector()), ValidationError);
}

TEST_CASE("Gagliardo-Nirenberg constant and coercivity") {
  const double C = estimate_gn_constant(1.0, 1, 4.0);
  CHECK(rel(C, oracle::gn_constant_1d_quartic()) < 1e-6);
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 4096, 40.0));
  const Solution sol = solve_ground_state(model, -2.0);
  const IdentityReport at_soliton = gn_coercivity_check(model, sol.u, C);
  CHECK(std::abs(at_soliton.ratio - 1.0) < 0.02);
  // even extension of a shifted soliton is two separated copies: ratio 2 / (2^{3/2} 2^{1/2}) = 1/2
  Vector pair(model.grid().size());
  for (int i = 0; i < pair.size(); ++i) pair[i] = oracle::power_soliton(4.0, 2.0, model.grid().nodes()[i] - 15.0);
  const IdentityReport low = gn_coercivity_check(model, pair, C);
  CHECK(low.pass);
  CHECK(std::abs(low.ratio - 0.5) < 0.01);
  CHECK(gn_coercivity_check(model, Vector::Zero(pair.size()), C).pass);
}

TEST_CASE("Nehari level bound") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 4096, 30.0));
  const Solution sol = solve_ground_state(model, -1.0);

  // two separated bumps projected onto the Nehari manifold
  Vector two(model.grid().size());
  for (int i = 0; i < two.size(); ++i) {
    const double r = model.grid().nodes()[i];
    two[i] = std::exp(-(r - 6.0) * (r - 6.0)) + std::exp(-r * r);
  }
  Solution other;
  other.lambda = -1.0;
  other.u = nehari_project(model, two, -1.0);
  const double c_other = eval_mass(model.grid(), other.u);

  const double lo = 0.9 * std::min(2.0, c_other), hi = 1.1 * std::max(2.0, c_other);
  std::vector<double> cs;
  for (int i = 0; i < 6; ++i) cs.push_back(lo + (hi - lo) * i / 5.0);
  MinimizeOptions mo;
  mo.multistart = 2;
  mo.compute_morse = false;
  CurveOptions co;
  co.minimize = mo;
  const MassCurve curve = mass_curve(model, cs, co);

  const IdentityReport eq = nehari_bound_check(model, sol, curve);
  CHECK(eq.pass);
  CHECK(eq.equality);
  CHECK(rel(eq.lhs, 4.0 / 3.0) < 1e-4);

  const IdentityReport strict = nehari_bound_check(model, other, curve);
  CHECK(strict.pass);
  CHECK_FALSE(strict.equality);
  CHECK(strict.lhs > strict.rhs);

  Solution far = sol;
  far.u *= 2.0;
  CHECK(nehari_bound_check(model, far, curve).inconclusive);
}

TEST_CASE("tangent sign pattern follows the mass monotonicity") {
  StepControl ctrl;
  ctrl.compute_morse = false;
  const Model sub(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 1000, 40.0));
  const IdentityReport a = tangent_sign_pattern(sub, continue_branch(sub, -2.0, -0.5, ctrl));
  CHECK(a.pass);
  CHECK(a.lhs < 0.0);
  CHECK(a.ratio == 1.0);
  const Model super(nls_potential(1, 8.0), RadialGrid::whole_space(1, 1000, 40.0));
  const IdentityReport b = tangent_sign_pattern(super, continue_branch(super, -2.0, -0.5, ctrl));
  CHECK_FALSE(b.pass);
  CHECK(b.ratio == 0.0);
  CHECK_THROWS_AS(tangent_sign_pattern(sub, Branch{}), ValidationError);
}
