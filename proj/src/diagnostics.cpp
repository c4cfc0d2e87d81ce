#include "gstate/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace gstate {

namespace {

constexpr double kWholeSpaceTol = 1e-6;
constexpr double kFractionalTol = 1e-5;
constexpr double kBallTol = 1e-4;
constexpr double kTangentTol = 1e-4;
constexpr double kBallFluxTol = 1e-3;

void require_solution(const Model& model, const Solution& sol) {
  if (sol.u.size() != model.grid().size()) throw ValidationError("solution does not match the grid");
  check_finite(sol.u);
}

void require_tangent(const Model& model, const Vector& v) {
  if (v.size() == 0) throw ValidationError("tangent v not supplied");
  if (v.size() != model.grid().size()) throw ValidationError("tangent does not match the grid");
  check_finite(v);
}

Vector abs_pow(const Vector& u, double p) { return u.cwiseAbs().array().pow(p).matrix(); }

}  // namespace

IdentityReport make_report(const std::string& id, double lhs, double rhs, double tol, const std::string& note) {
  IdentityReport r;
  r.id = id;
  r.lhs = lhs;
  r.rhs = rhs;
  r.tol = tol;
  r.rel_residual = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-14});
  r.pass = r.rel_residual < tol;
  r.note = note;
  return r;
}

std::vector<IdentityReport> pohozaev_residual(const Model& model, const Solution& sol) {
  require_solution(model, sol);
  const ProblemSpec& spec = model.spec();
  const RadialGrid& g = model.grid();
  const Vector& u = sol.u;
  const Vector& r = g.nodes();
  const double N = spec.dim;
  const double lambda = sol.lambda;
  const double K = model.kinetic_energy(u);
  const double mass = g.inner(u, u);
  std::vector<IdentityReport> out;

  if (g.kind() == DomainKind::UnitBall) {
    const double flux = g.boundary_slope(u);
    // the lambda term sits on the left so that neither side vanishes identically
    const double lhs = 0.5 * (N - 2.0) * K + 0.5 * sphere_area(spec.dim) * flux * flux - 0.5 * lambda * N * mass;
    const double rhs = N * g.integrate(model.F(u)) + g.integrate(r.cwiseProduct(model.F_r(u)));
    out.push_back(make_report("pohozaev_ball", lhs, rhs, kBallTol, "boundary flux from a one-sided 3-point stencil"));
    return out;
  }

  if (spec.s == 1.0) {
    const Vector u2 = u.cwiseAbs2();
    const double lhs = 0.5 * (N - 2.0) * K + 0.5 * N * g.integrate(model.potential().cwiseProduct(u2)) +
                       0.5 * g.integrate(r.cwiseProduct(model.potential_slope()).cwiseProduct(u2)) -
                       0.5 * lambda * N * mass;
    const double rhs = N * g.integrate(model.F(u)) + g.integrate(r.cwiseProduct(model.F_r(u)));
    out.push_back(make_report("pohozaev_whole_space", lhs, rhs, kWholeSpaceTol));
    if (!model.has_potential()) {
      const double rhs2 = g.integrate((N - 2.0) * model.f(u).cwiseProduct(u) - 2.0 * N * model.F(u) -
                                      2.0 * r.cwiseProduct(model.F_r(u)));
      out.push_back(make_report("pohozaev_multiplier", 2.0 * lambda * mass, rhs2, kWholeSpaceTol));
    }
  }

  if (spec.family == Family::FractionalPower) {
    const double s = spec.s, p = spec.p;
    const Vector up = abs_pow(u, p);
    const Vector& h = model.weight();
    const Vector rh = r.cwiseProduct(model.weight_slope());
    const double tol = s == 1.0 ? kWholeSpaceTol : kFractionalTol;
    const double rhs_l = g.integrate(((2.0 * N / p - (N - 2.0 * s)) * h + (2.0 / p) * rh).cwiseProduct(up));
    out.push_back(make_report("pohozaev_fractional_lambda", -2.0 * s * lambda * mass, rhs_l, tol));
    const double rhs_k = g.integrate(((p - 2.0) / p * N * h - (2.0 / p) * rh).cwiseProduct(up));
    out.push_back(make_report("pohozaev_fractional_kinetic", 2.0 * s * K, rhs_k, tol));
  }
  return out;
}

IdentityReport tangent_pohozaev_check(const Model& model, const Solution& sol, const Vector& v) {
  require_solution(model, sol);
  require_tangent(model, v);
  if (model.grid().kind() != DomainKind::WholeSpace || model.spec().s != 1.0)
    throw ValidationError("tangent_pohozaev applies to the whole-space problem with s = 1");
  const RadialGrid& g = model.grid();
  const Vector& u = sol.u;
  const Vector& r = g.nodes();
  const double N = model.spec().dim;
  const Vector uv = u.cwiseProduct(v);
  const Vector integrand = 0.5 * (N + 4.0) * model.f(u).cwiseProduct(v) + r.cwiseProduct(model.f_r(u)).cwiseProduct(v) -
                           0.5 * N * model.f_t(u).cwiseProduct(uv) -
                           (2.0 * model.potential() + r.cwiseProduct(model.potential_slope())).cwiseProduct(uv);
  return make_report("tangent_pohozaev", g.integrate(integrand), -2.0 * sol.lambda * g.integrate(uv), kTangentTol);
}

std::vector<IdentityReport> ball_tangent_checks(const Model& model, const Solution& sol, const Vector& v) {
  require_solution(model, sol);
  if (model.grid().kind() != DomainKind::UnitBall) throw ValidationError("ball only");
  require_tangent(model, v);
  const RadialGrid& g = model.grid();
  const Vector& u = sol.u;
  const double N = model.spec().dim;
  const double omega = sphere_area(model.spec().dim);
  const double flux = omega * g.boundary_slope(u) * g.boundary_slope(v);
  const double mass = g.inner(u, u);
  const double uv = g.inner(u, v);
  const Vector fu = model.f(u);
  std::vector<IdentityReport> out;

  const double interior = 2.0 * g.inner(fu, v) + g.integrate(g.nodes().cwiseProduct(model.f_r(u)).cwiseProduct(v));
  out.push_back(make_report("ball_tangent_flux", flux, 0.5 * N * mass + 2.0 * sol.lambda * uv + interior, kBallFluxTol));
  if (model.spec().family == Family::BallInhomogeneous) {
    const double p = model.spec().p, k = model.spec().k;
    const double closed = (0.5 * N - (2.0 - k) / (p - 2.0)) * mass + 2.0 * sol.lambda * uv;
    out.push_back(make_report("ball_tangent_flux_closed", flux, closed, kBallFluxTol));
  }
  const double weighted = g.inner(fu - model.f_t(u).cwiseProduct(u), v);
  out.push_back(make_report("ball_tangent_weighted", weighted, mass, kBallFluxTol,
                            "unconditional: follows from the equations for u and v alone"));
  return out;
}

IdentityReport gn_coercivity_check(const Model& model, const Vector& u, double gn_constant) {
  const ProblemSpec& spec = model.spec();
  if (!spec.pure_power) throw ValidationError("coercivity check needs a pure power nonlinearity");
  if (u.size() != model.grid().size()) throw ValidationError("profile does not match the grid");
  check_finite(u);
  const RadialGrid& g = model.grid();
  const double s = spec.s, N = spec.dim, p = spec.p;
  const double b = N * (p - 2.0) / (4.0 * s);
  const double a = p / 2.0 - b;
  const double h_sup = model.weight().cwiseAbs().maxCoeff();
  const double lhs = g.integrate(model.weight().cwiseProduct(abs_pow(u, p)));
  const double mass = g.inner(u, u);
  const double rhs = mass == 0.0 ? 0.0 : gn_constant * h_sup * std::pow(mass, a) * std::pow(model.kinetic_energy(u), b);
  IdentityReport r = make_report("gagliardo_nirenberg", lhs, rhs, 0.0);
  r.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
  r.pass = lhs <= rhs * (1.0 + 1e-12);
  r.note = "inequality; ratio = lhs / rhs";
  return r;
}

double estimate_gn_constant(double s, int dim, double p, int n, double outer_radius) {
  const ProblemSpec spec = frac_power(s, dim, p);
  const double b = dim * (p - 2.0) / (4.0 * s);
  const double a = p / 2.0 - b;
  auto ratio_on = [&](int cells) {
    const Model model(spec, RadialGrid::whole_space(dim, cells, outer_radius));
    const Solution sol = solve_ground_state(model, -1.0);
    if (!sol.converged) throw ConvergenceError("ground state for the constant estimate did not converge");
    const RadialGrid& g = model.grid();
    return g.integrate(abs_pow(sol.u, p)) / (std::pow(g.inner(sol.u, sol.u), a) * std::pow(model.kinetic_energy(sol.u), b));
  };
  const double coarse = ratio_on(n), fine = ratio_on(2 * n);
  return (4.0 * fine - coarse) / 3.0;
}

IdentityReport nehari_bound_check(const Model& model, const Solution& sol, const MassCurve& curve, double equality_tol) {
  require_solution(model, sol);
  const double c = eval_mass(model.grid(), sol.u);
  const double lhs = eval_action(model, sol.u, sol.lambda);
  const auto& cs = curve.c;
  if (cs.empty() || c < cs.front() || c > cs.back()) {
    IdentityReport r = make_report("nehari_level_bound", lhs, std::numeric_limits<double>::quiet_NaN(), equality_tol);
    r.pass = false;
    r.inconclusive = true;
    r.note = "mass outside the sampled curve range";
    return r;
  }
  std::size_t i = std::upper_bound(cs.begin(), cs.end(), c) - cs.begin();
  i = std::min(std::max<std::size_t>(i, 1), cs.size() - 1) - 1;
  double m;
  if (cs.size() == 1) {
    m = curve.m[0];
  } else {
    const double h = cs[i + 1] - cs[i], t = (c - cs[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    m = h00 * curve.m[i] + h10 * h * curve.lambda[i] + h01 * curve.m[i + 1] + h11 * h * curve.lambda[i + 1];
  }
  const double rhs = m - sol.lambda * c;
  IdentityReport r = make_report("nehari_level_bound", lhs, rhs, equality_tol);
  r.equality = r.rel_residual < equality_tol;
  r.pass = lhs >= rhs - equality_tol * std::abs(rhs);
  r.note = "inequality; equality expected when u is the constrained minimizer";
  return r;
}

IdentityReport tangent_sign_pattern(const Model& model, const Branch& branch) {
  if (branch.nodes.empty()) throw ValidationError("empty branch");
  double worst = -std::numeric_limits<double>::infinity();
  int conforming = 0;
  for (const auto& node : branch.nodes) {
    require_tangent(model, node.tangent);
    const double uv = model.grid().inner(node.sol.u, node.tangent);
    worst = std::max(worst, uv);
    const bool rhs_ok = node.sol.lambda >= 0.0 || -2.0 * node.sol.lambda * uv < 0.0;
    if (uv < 0.0 && rhs_ok) ++conforming;
  }
  IdentityReport r;
  r.id = "tangent_sign_pattern";
  r.lhs = worst;
  r.rhs = 0.0;
  r.rel_residual = std::numeric_limits<double>::quiet_NaN();
  r.ratio = static_cast<double>(conforming) / branch.nodes.size();
  r.pass = conforming == static_cast<int>(branch.nodes.size());
  r.note = std::to_string(conforming) + " of " + std::to_string(branch.nodes.size()) + " nodes have int u v < 0";
  return r;
}

std::vector<IdentityReport> identity_suite(const Model& model, const Solution& sol, const std::optional<Vector>& tangent) {
  std::vector<IdentityReport> out = pohozaev_residual(model, sol);
  if (tangent) {
    if (model.grid().kind() == DomainKind::UnitBall) {
      for (auto& r : ball_tangent_checks(model, sol, *tangent)) out.push_back(std::move(r));
    } else if (model.spec().s == 1.0) {
      out.push_back(tangent_pohozaev_check(model, sol, *tangent));
    }
  }
  return out;
}

}  // namespace gstate
