#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gstate/mass_min.hpp"
#include "gstate/solve.hpp"

namespace gstate {

/// Identity names:
///   pohozaev_whole_space      dilation identity with potential, s = 1 on R^N
///   pohozaev_multiplier       the same with V = 0, solved for lambda int u^2
///   pohozaev_fractional_lambda, pohozaev_fractional_kinetic   order-2s pure power
///   pohozaev_ball             dilation identity with boundary flux on the unit ball
///   tangent_pohozaev          lambda-derivative of the dilation identity (whole space)
///   ball_tangent_flux         boundary flux u'(1) v'(1) against interior terms
///   ball_tangent_flux_closed  the same after eliminating the weighted term
///   ball_tangent_weighted     (2 - p) int h u^{p-1} v = int u^2
///   gagliardo_nirenberg       coercivity inequality with the estimated constant
///   nehari_level_bound        Phi_lambda(u) >= m(c) - lambda c
///   tangent_sign_pattern      int u v < 0 and -2 lambda int u v < 0 on every node of a branch
struct IdentityReport {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_residual = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|, 1e-14)
  double tol = 0.0;
  bool pass = false;
  bool inconclusive = false;
  bool equality = false;  // nehari_level_bound: lhs == rhs within tolerance
  double ratio = std::numeric_limits<double>::quiet_NaN();  // gagliardo_nirenberg: lhs / rhs
  std::string note;
};

IdentityReport make_report(const std::string& id, double lhs, double rhs, double tol, const std::string& note = "");

/// Dilation identities that apply to the problem family of `model`.
std::vector<IdentityReport> pohozaev_residual(const Model& model, const Solution& sol);

/// lambda-derivative of the dilation identity on R^N (s = 1):
///   int ((N+4)/2 f v + r f_r v - N/2 f_t u v - (2V + r V') u v) = -2 lambda int u v.
IdentityReport tangent_pohozaev_check(const Model& model, const Solution& sol, const Vector& v);

/// Boundary-flux identities of the ball family for the pair (u, v = du/dlambda).
std::vector<IdentityReport> ball_tangent_checks(const Model& model, const Solution& sol, const Vector& v);

/// int h |u|^p <= C ||h||_inf (2c)^{p/2 - N(p-2)/(4s)} (int |(-Delta)^{s/2} u|^2)^{N(p-2)/(4s)}, c = Q(u).
IdentityReport gn_coercivity_check(const Model& model, const Vector& u, double gn_constant);

/// Sharp constant of the inequality above for h = 1, from the ground state at
/// lambda = -1 on grids of n and 2n cells, Richardson-extrapolated.
double estimate_gn_constant(double s, int dim, double p, int n = 2048, double outer_radius = 40.0);

/// Phi_lambda(u) >= m(c) - lambda c with m interpolated from the curve (cubic
/// Hermite, slopes lambda(c)). Inconclusive outside the sampled range.
IdentityReport nehari_bound_check(const Model& model, const Solution& sol, const MassCurve& curve,
                                  double equality_tol = 1e-4);

/// Sign pattern of the tangent on a subcritical branch: int u v < 0 at every
/// node and, where lambda < 0, -2 lambda int u v < 0 as well. lhs is the
/// largest int u v seen, rhs = 0; ratio is the fraction of nodes that conform.
IdentityReport tangent_sign_pattern(const Model& model, const Branch& branch);

/// Every applicable identity for a converged solution and, when given, its tangent.
std::vector<IdentityReport> identity_suite(const Model& model, const Solution& sol,
                                           const std::optional<Vector>& tangent = std::nullopt);

}  // namespace gstate
