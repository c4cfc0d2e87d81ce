#include <cmath>

#include "doctest.h"
#include "gstate/spectrum.hpp"
#include "oracles.hpp"

using namespace gstate;

TEST_CASE("soliton has Morse index one") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 2048, 30.0));
  const Solution sol = solve_ground_state(model, -1.0);
  REQUIRE(sol.converged);
  const SpectrumReport rep = morse_index(model, sol);
  CHECK(rep.morse_index == 1);
  CHECK(rep.nondegenerate);
  CHECK(rep.lowest_eigs[0] < 0.0);
  CHECK(rep.lowest_eigs[1] > 0.0);
  for (int i = 1; i < rep.lowest_eigs.size(); ++i) CHECK(rep.lowest_eigs[i] >= rep.lowest_eigs[i - 1]);

  // <L u, u> = (2 - p) int |u|^p
  const double lhs = linearized_form(model, sol, sol.u);
  const double rhs = -2.0 * model.grid().integrate(sol.u.array().pow(4).matrix());
  CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-8);

  // eigenvectors come back in nodal form
  const DiscreteOperator L = linearized_operator(model, sol);
  const Vector v = rep.lowest_vectors.col(0);
  CHECK((L.apply(v) - rep.lowest_eigs[0] * v).norm() < 1e-8 * L.apply(v).norm());
  CHECK(model.grid().norm(v) == doctest::Approx(1.0));
}

TEST_CASE("linear limit is positive definite below the threshold") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 500, 20.0));
  Solution zero;
  zero.lambda = -0.5;
  zero.u = Vector::Zero(500);
  const SpectrumReport rep = morse_index(model, zero);
  CHECK(rep.morse_index == 0);
  CHECK(rep.lowest_eigs[0] > 0.5);
  CHECK(rep.lowest_eigs[0] < 0.5 + 0.1);
}

TEST_CASE("linearized operator is symmetric in the weighted inner product") {
  const Model model(frac_power(1.0, 1, 4.0), RadialGrid::whole_space(1, 300, 20.0));
  const Solution sol = solve_ground_state(model, -1.0);
  const Eigen::MatrixXd L = linearized_operator(model, sol).nodal_matrix();
  const Eigen::MatrixXd WL = model.grid().weights().asDiagonal() * L;
  CHECK((WL - WL.transpose()).cwiseAbs().maxCoeff() < 1e-12 * WL.cwiseAbs().maxCoeff());
}

TEST_CASE("ball ground state is non-degenerate with index one") {
  const Model model(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, 400));
  for (double lambda : {-20.0, 0.0, model.linear_threshold() - 0.2}) {
    const Solution sol = solve_ground_state(model, lambda);
    REQUIRE(sol.converged);
    const SpectrumReport rep = morse_index(model, sol);
    CHECK(rep.morse_index == 1);
    CHECK(rep.nondegenerate);
  }
}

TEST_CASE("tiny state near the bifurcation point keeps index one") {
  const Model model(ball_hardy(3, 1.0, 2.5), RadialGrid::unit_ball(3, 300));
  const double lambda = model.linear_threshold() - 1e-3;
  const Solution sol = solve_ground_state(model, lambda);
  REQUIRE(sol.converged);
  CHECK(sol.mass < 1e-3);
  const SpectrumReport rep = morse_index(model, sol);
  CHECK(rep.morse_index == 1);
}

TEST_CASE("fractional soliton has Morse index one") {
  const Model model(frac_power(0.7, 1, 3.0), RadialGrid::whole_space(1, 600, 60.0));
  const Solution sol = solve_ground_state(model, -1.0);
  REQUIRE(sol.converged);
  const SpectrumReport rep = morse_index(model, sol);
  CHECK(rep.morse_index == 1);
  CHECK(rep.nondegenerate);
  const double lhs = linearized_form(model, sol, sol.u);
  const double rhs = -1.0 * model.grid().integrate(sol.u.cwiseAbs().array().pow(3).matrix());
  CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-8);
}
