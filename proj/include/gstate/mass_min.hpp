#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gstate/problem.hpp"

namespace gstate {

struct MinimizeOptions {
  int multistart = 8;
  std::uint64_t seed = 20240611;
  int start_sign = 0;       // 0: positive starts, plus negative ones when f is not odd; +1 / -1: only that sign
  double flow_tol = 1e-5;   // projected gradient / ||u|| at which the flow hands over to Newton
  double polish_tol = 1e-9; // Euler-Lagrange residual / ||u|| after the polish
  int max_flow_steps = 20000;
  int max_polish_iters = 40;
  double cluster_tol = 1e-6;  // on (m, lambda), relative to max(1, |value|)
  double energy_tol = 1e-8;   // clusters within this of the best m achieve m(c)
  bool compute_morse = true;
  int jobs = 1;
};

/// A distinct local minimum found by the multistart.
struct Cluster {
  double m = 0.0;
  double lambda = 0.0;
  Vector u;
  int hits = 0;
};

struct MinimizerResult {
  double c = 0.0;
  Vector u;  // best minimizer, Q(u) = c
  double m = 0.0;
  double lambda = 0.0;             // multiplier from the polish
  double multiplier_check = 0.0;   // <D E(u), u> / int u^2
  double residual = 0.0;           // ||D E(u) - lambda u|| / ||u||
  bool converged = false;
  int multistart_count = 0;
  std::vector<Cluster> distinct_minima;  // sorted by m
  int morse_index = -1;
  double max_projection_error = 0.0;  // max |Q(u) - c| / c after a flow step
  double max_kinetic = 0.0;           // sup of the kinetic term along the flow
};

/// Polished critical point of E on S_c: bordered Newton on (u, lambda).
struct Polished {
  Vector u;
  double m = 0.0;
  double lambda = 0.0;
  double residual = 0.0;
  bool converged = false;
};

/// Bordered Newton for A u + V u - f(u) = lambda u, Q(u) = c, started from u0
/// rescaled onto S_c and the multiplier guess lambda0.
Polished polish_on_sphere(const Model& model, const Vector& u0, double c, double lambda0, double tol = 1e-9,
                          int max_iters = 40);

/// m(c) = inf E on S_c = {Q(u) = c} by a projected semi-implicit gradient flow
/// from a batch of radial bumps, each finished by polish_on_sphere, with the
/// results clustered on (m, lambda). Throws ValidationError when E is unbounded
/// below on S_c.
MinimizerResult minimize_on_sphere(const Model& model, double c, const MinimizeOptions& opts = {});

struct Kink {
  double c = 0.0;       // location estimate
  int lower = 0;        // sample index range [lower, upper] that brackets it
  int upper = 0;
  bool at_sample = false;
  double gap = 0.0;     // dq_left - dq_right
  double error = 0.0;   // error estimate of the gap
};

struct MassCurve {
  std::vector<double> c;
  std::vector<double> m;
  std::vector<double> lambda;
  // one-sided difference quotients of m from side probes at c -/+ delta and
  // c -/+ delta/2, Richardson-extrapolated; NaN for a single-sample grid
  std::vector<double> dq_left;
  std::vector<double> dq_right;
  std::vector<double> dq_left_err;
  std::vector<double> dq_right_err;
  std::vector<double> dq_center;  // (m(c + delta) - m(c - delta)) / (2 delta)
  std::vector<int> n_clusters;    // clusters achieving m(c)
  std::vector<int> morse_index;
  std::vector<MinimizerResult> minimizers;
  std::vector<Kink> kinks;
  double probe_fraction = 1e-3;
};

struct CurveOptions {
  MinimizeOptions minimize;
  double probe_fraction = 1e-3;  // delta = probe_fraction * c
  double kink_factor = 3.0;      // gap must exceed this many error estimates
  int jobs = 1;                  // samples in parallel
};

/// m(c) on an increasing grid, with one-sided derivatives and kink detection.
MassCurve mass_curve(const Model& model, const std::vector<double>& c_grid, const CurveOptions& opts = {});

/// Smallest and largest multiplier among minimizers achieving m(c).
std::pair<double, double> lambda_set_scan(const Model& model, double c, const MinimizeOptions& opts = {});

/// Exponent alpha in m(c) = c^alpha m(1) for the pure power |u|^p with the
/// order-2s kinetic term in dimension N.
double scaling_exponent(double s, int dim, double p);

struct CrossingResult {
  double m_plus_1 = 0.0;   // min of E over positive states on S_1
  double m_minus_1 = 0.0;  // min over negative states on S_1
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double c_hat_scaling = 0.0;  // crossing of the two power laws
  double c_hat = 0.0;          // crossing of the discrete branches
  double m_hat = 0.0;
  double lambda_plus = 0.0;    // branch multipliers at c_hat
  double lambda_minus = 0.0;
  double dq_left = 0.0;        // one-sided slopes of min(m+, m-) at c_hat
  double dq_right = 0.0;
  double dq_left_scaling = 0.0;
  double dq_right_scaling = 0.0;
  bool bounded = true;  // false when the crossing falls outside the sampled range
};

/// Crossing of the positive and negative ground-state levels of the
/// asymmetric power problem F = t^p (t >= 0), |t|^q (t < 0).
CrossingResult counterexample_crossing(double s, int dim, double p, double q, const RadialGrid& grid,
                                       const MinimizeOptions& opts = {});

struct ExpressionReport {
  std::vector<double> c;
  std::vector<double> derivative;       // m'(c) by centered side-probe differences
  std::vector<double> expression;       // closed expression from m, c and int h' r |u|^p
  std::vector<double> pohozaev_lambda;  // multiplier recovered from the Pohozaev combination
  std::vector<double> weight_term;      // int h'(|x|) |x| |u_c|^p
  double max_ode_residual = 0.0;
  double max_lambda_residual = 0.0;
  bool conclusive = false;
  std::string note;
};

/// Compare m'(c) with the expression
///   alpha_D m / c + (p - 2) / (p (4 + 2N - Np) c) int h' r |u|^p,
///   alpha_D = (2N - (N - 2) p) / (4 + 2N - Np),
/// and with the multiplier from the Pohozaev combination, on a computed curve.
/// Needs s = 1 and a pure power.
ExpressionReport m_expression_check(const Model& model, const MassCurve& curve);

}  // namespace gstate
