#include "gstate/solve.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "gstate/spectrum.hpp"

namespace gstate {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Vector clip(const Vector& u, int sign) {
  if (sign > 0) return u.cwiseMax(0.0);
  if (sign < 0) return u.cwiseMin(0.0);
  return u;
}

double residual_floor(const Model& model, double lambda, double tol) {
  const double scale = model.kinetic().scaled().norm_inf() + model.potential().cwiseAbs().maxCoeff() + std::abs(lambda);
  return std::max(tol, 8.0 * kEps * scale);
}

Solution make_solution(const Model& model, double lambda, const Vector& u, double residual, bool converged, int iters) {
  Solution s;
  s.lambda = lambda;
  s.u = u;
  s.residual_norm = residual;
  s.mass = model.grid().inner(u, u);
  s.energy = eval_energy(model, u);
  s.converged = converged;
  s.iterations = iters;
  return s;
}

}  // namespace

Vector nehari_project(const Model& model, const Vector& u, double lambda) {
  check_finite(u);
  const RadialGrid& g = model.grid();
  if (g.norm(u) == 0.0) throw ValidationError("not in Nehari cone: u = 0");
  const double quad =
      model.kinetic_energy(u) + g.integrate((model.potential().array() - lambda).matrix().cwiseProduct(u.cwiseAbs2()));
  if (!(quad > 0.0)) throw ValidationError("not in Nehari cone: quadratic part of the action is not positive");
  const ProblemSpec& spec = model.spec();
  if (spec.pure_power) {
    const double growth = g.integrate(model.weight().cwiseProduct(u.cwiseAbs().array().pow(spec.p).matrix()));
    if (!(growth > 0.0)) throw ValidationError("not in Nehari cone: nonlinear term vanishes");
    return std::pow(quad / growth, 1.0 / (spec.p - 2.0)) * u;
  }
  // <D Phi(t u), t u> / t^2 = quad - int f(r, t u) u / t, which is negative for large t
  // when f is superlinear. Scan for a sign change, then bracket.
  auto phi = [&](double t) { return quad - g.integrate(model.f(t * u).cwiseProduct(u)) / t; };
  double lo = 0.0, hi = 0.0;
  double prev_t = 1e-6, prev = phi(prev_t);
  for (double t = 1e-6 * 1.5; t < 1e8; t *= 1.5) {
    const double cur = phi(t);
    if (prev > 0.0 && cur <= 0.0) {
      lo = prev_t;
      hi = t;
      break;
    }
    prev_t = t;
    prev = cur;
  }
  if (hi == 0.0) throw ValidationError("not in Nehari cone: no positive scaling reaches the Nehari manifold");
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(phi, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (root.first + root.second) * u;
}

Solution newton_solve(const Model& model, double lambda, const Vector& u0, const NewtonOptions& opts) {
  check_finite(u0);
  if (u0.size() != model.grid().size()) throw ValidationError("initial guess has wrong length");
  const RadialGrid& g = model.grid();
  const DiscreteOperator& A = model.kinetic();
  const double rel_tol = residual_floor(model, lambda, opts.tol);

  Vector u = u0;
  Vector res = eval_action_gradient(model, u, lambda);
  double rnorm = g.norm(res);
  int it = 0;
  for (;; ++it) {
    const double unorm = g.norm(u);
    if (unorm > 0.0 && rnorm <= opts.tol * unorm) return make_solution(model, lambda, u, rnorm, true, it);
    // Under the round-off floor the residual no longer shows the error; one more
    // full step removes what is left of it.
    const bool at_floor = unorm > 0.0 && rnorm <= rel_tol * unorm;
    if (!at_floor && it >= opts.max_iters) break;
    if (unorm == 0.0) break;

    const SymMatrix jac = model.linear_part(Vector::Constant(u.size(), -lambda) - model.f_t(u));
    const LinearSolver solver(jac);
    if (solver.singular() || solver.rcond() < 1.0 / opts.cond_limit)
      throw DegeneracyError("degenerate point: linearization at lambda = " + std::to_string(lambda) +
                            " has rcond " + std::to_string(solver.rcond()));
    const Vector step = A.from_scaled(solver.solve(A.to_scaled(-res)));
    if (at_floor) {
      const Vector last = clip(u + step, opts.sign);
      const Vector last_res = eval_action_gradient(model, last, lambda);
      const double last_norm = g.norm(last_res);
      if (std::isfinite(last_norm) && last_norm <= 2.0 * rel_tol * g.norm(last))
        return make_solution(model, lambda, last, last_norm, true, it + 1);
      return make_solution(model, lambda, u, rnorm, true, it);
    }

    const double merit = 0.5 * rnorm * rnorm;
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vector trial = clip(u + t * step, opts.sign);
      const Vector trial_res = eval_action_gradient(model, trial, lambda);
      const double trial_norm = g.norm(trial_res);
      if (std::isfinite(trial_norm) && 0.5 * trial_norm * trial_norm <= (1.0 - 1e-4 * t) * merit) {
        u = trial;
        res = trial_res;
        rnorm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ++it;
      break;
    }
  }
  return make_solution(model, lambda, u, rnorm, false, it);
}

Vector initial_guess(const Model& model, double lambda, double width_factor, int sign) {
  const RadialGrid& g = model.grid();
  const double gap = std::max(model.linear_threshold() - lambda, 1e-8);
  const double s = model.spec().s;
  double width = width_factor * std::pow(gap, -0.5 / s);
  Vector u(g.size());
  if (g.kind() == DomainKind::UnitBall) {
    width = std::min(width, 1.0);
    for (int i = 0; i < g.size(); ++i) {
      const double r = g.nodes()[i];
      u[i] = (1.0 - r * r) * std::exp(-r * r / (width * width));
    }
  } else {
    width = std::min(width, 0.25 * g.outer_radius());
    for (int i = 0; i < g.size(); ++i) {
      const double r = g.nodes()[i] / width;
      u[i] = std::exp(-r * r);
    }
  }
  return sign < 0 ? Vector(-u) : u;
}

Solution solve_ground_state(const Model& model, double lambda, const NewtonOptions& opts) {
  const double threshold = model.linear_threshold();
  if (!(lambda < threshold))
    throw ValidationError("lambda = " + std::to_string(lambda) + " must lie below the bottom of the linear spectrum (" +
                          std::to_string(threshold) + ")");
  const int sign = opts.sign == 0 ? 1 : opts.sign;
  Solution best;
  for (double width : {1.0, 0.5, 2.0}) {
    const Vector u0 = nehari_project(model, initial_guess(model, lambda, width, sign), lambda);
    best = newton_solve(model, lambda, u0, opts);
    if (best.converged) return best;
  }
  return best;
}

Vector branch_tangent(const Model& model, const Solution& sol, double cond_limit) {
  if (sol.u.size() != model.grid().size()) throw ValidationError("solution has wrong length");
  if (model.grid().norm(sol.u) == 0.0) throw ValidationError("branch tangent requires a nontrivial solution");
  const SymMatrix jac = model.linear_part(Vector::Constant(sol.u.size(), -sol.lambda) - model.f_t(sol.u));
  const LinearSolver solver(jac);
  if (solver.singular() || solver.rcond() < 1.0 / cond_limit)
    throw DegeneracyError("tangent unreliable near degeneracy (rcond " + std::to_string(solver.rcond()) + ")");
  const DiscreteOperator& A = model.kinetic();
  return A.from_scaled(solver.solve(A.to_scaled(sol.u)));
}

int sign_changes(const Vector& v) {
  if (v.size() == 0) return 0;
  const double band = 1e-9 * v.cwiseAbs().maxCoeff();
  int changes = 0, last = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= band) continue;
    const int s = v[i] > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

namespace {

BranchNode make_node(const Model& model, const Solution& sol, const StepControl& ctrl) {
  BranchNode node;
  node.sol = sol;
  node.tangent = branch_tangent(model, sol, ctrl.newton.cond_limit);
  node.mass_derivative = 2.0 * model.grid().inner(sol.u, node.tangent);
  node.tangent_at_origin = model.grid().value_at_origin(node.tangent);
  node.sign_changes = sign_changes(node.tangent);
  if (ctrl.compute_morse) node.morse_index = morse_count(model, sol);
  return node;
}

}  // namespace

Branch continue_from(const Model& model, const Solution& seed, double lambda_end, const StepControl& ctrl) {
  if (!seed.converged) throw ValidationError("continuation needs a converged seed solution");
  if (!(ctrl.initial_step > 0.0 && ctrl.min_step > 0.0 && ctrl.max_step >= ctrl.min_step))
    throw ValidationError("step sizes must be positive with max_step >= min_step");
  const double threshold = model.linear_threshold();
  if (!(lambda_end < threshold)) throw ValidationError("lambda_end must lie below the bottom of the linear spectrum");
  Branch branch;
  branch.lambda_start = seed.lambda;
  branch.lambda_end = lambda_end;
  branch.nodes.push_back(make_node(model, seed, ctrl));
  const double direction = lambda_end >= seed.lambda ? 1.0 : -1.0;
  double step = ctrl.initial_step;

  while (std::abs(lambda_end - branch.nodes.back().sol.lambda) > 1e-14 * (1.0 + std::abs(lambda_end))) {
    if (static_cast<int>(branch.nodes.size()) >= ctrl.max_nodes) {
      branch.truncated = true;
      branch.reason = "node budget exhausted";
      break;
    }
    const BranchNode& last = branch.nodes.back();
    const double lam0 = last.sol.lambda;
    const double cap = std::min(ctrl.max_step, ctrl.max_relative_step * (threshold - lam0));
    step = std::min(step, cap);
    double lam1 = lam0 + direction * step;
    if ((lambda_end - lam1) * direction <= 0.0) lam1 = lambda_end;
    const double dl = lam1 - lam0;
    Solution next;
    bool ok = false;
    std::string failure;
    try {
      next = newton_solve(model, lam1, last.sol.u + dl * last.tangent, ctrl.newton);
      ok = next.converged;
      if (!ok) failure = "corrector did not converge";
    } catch (const Error& e) {
      failure = e.what();
    }
    if (ok) {
      try {
        branch.nodes.push_back(make_node(model, next, ctrl));
      } catch (const DegeneracyError& e) {
        branch.truncated = true;
        branch.reason = std::string("fold or degeneracy detected: ") + e.what();
        break;
      }
      if (next.iterations <= ctrl.fast_iterations) step *= ctrl.growth;
    } else {
      step = 0.5 * std::abs(dl);
      if (step < ctrl.min_step) {
        branch.truncated = true;
        branch.reason = "step below minimum at lambda = " + std::to_string(lam0) + ": " + failure;
        break;
      }
    }
  }
  if (direction < 0.0) std::reverse(branch.nodes.begin(), branch.nodes.end());
  return branch;
}

Branch continue_branch(const Model& model, double lambda_start, double lambda_end, const StepControl& ctrl) {
  if (lambda_start == lambda_end) throw ValidationError("empty lambda range");
  const Solution seed = solve_ground_state(model, lambda_start, ctrl.newton);
  if (!seed.converged)
    throw ConvergenceError("no converged seed at lambda = " + std::to_string(lambda_start) + " (residual " +
                           std::to_string(seed.residual_norm) + ")");
  return continue_from(model, seed, lambda_end, ctrl);
}

}  // namespace gstate
