#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gstate/problem.hpp"

namespace gstate {

struct NewtonOptions {
  double tol = 1e-10;  // on ||residual|| / ||u|| in the weighted norm
  int max_iters = 50;
  double cond_limit = 1e12;
  int sign = 1;  // +1: keep iterates >= 0 while damping, -1: <= 0, 0: no clipping
};

struct Solution {
  double lambda = 0.0;
  Vector u;
  double residual_norm = std::numeric_limits<double>::infinity();
  double mass = 0.0;  // int u^2 (= 2 Q(u))
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Scale u onto the Nehari manifold {<D Phi_lambda(v), v> = 0}. Throws
/// ValidationError("not in Nehari cone") when no positive scaling exists.
Vector nehari_project(const Model& model, const Vector& u, double lambda);

/// Damped Newton iteration for D Phi_lambda(u) = 0 with Armijo backtracking on
/// ||residual||^2. Returns a flagged, non-converged Solution when max_iters is
/// exhausted; throws DegeneracyError("degenerate point") on a singular Jacobian.
Solution newton_solve(const Model& model, double lambda, const Vector& u0, const NewtonOptions& opts = {});

/// Radial bump of roughly the right width for frequency lambda (positive, or
/// negative when sign = -1), before any Nehari scaling.
Vector initial_guess(const Model& model, double lambda, double width_factor = 1.0, int sign = 1);

/// Bump through nehari_project, then newton_solve. Rejects lambda at or above
/// the bottom of the linear spectrum.
Solution solve_ground_state(const Model& model, double lambda, const NewtonOptions& opts = {});

/// Solve L_lambda v = u for the branch tangent v = du/dlambda.
Vector branch_tangent(const Model& model, const Solution& sol, double cond_limit = 1e12);

/// Strict sign alternations among entries with |v| > 1e-9 ||v||_inf.
int sign_changes(const Vector& v);

struct StepControl {
  double initial_step = 0.05;
  double min_step = 1e-7;
  double max_step = 1.0;
  double max_relative_step = 0.2;  // step <= this * distance of lambda to the linear threshold
  double growth = 1.5;
  int fast_iterations = 4;  // grow the step when the corrector needs at most this many
  int max_nodes = 5000;
  bool compute_morse = true;
  NewtonOptions newton;
};

struct BranchNode {
  Solution sol;
  Vector tangent;
  double mass_derivative = 0.0;    // d/dlambda int u^2 = 2 int u v
  double tangent_at_origin = 0.0;  // v(0), sign recorded rather than assumed
  int sign_changes = 0;
  int morse_index = -1;  // -1 when not computed
};

struct Branch {
  std::vector<BranchNode> nodes;  // lambda strictly increasing
  double lambda_start = 0.0;
  double lambda_end = 0.0;
  bool truncated = false;
  std::string reason;
};

/// Natural-parameter predictor (u + dlambda v) / Newton corrector continuation
/// from lambda_start to lambda_end. The step halves on corrector failure and grows
/// after fast convergence; repeated failure at min_step truncates the branch.
Branch continue_branch(const Model& model, double lambda_start, double lambda_end, const StepControl& ctrl = {});

/// Continue from an already converged seed solution.
Branch continue_from(const Model& model, const Solution& seed, double lambda_end, const StepControl& ctrl = {});

}  // namespace gstate
