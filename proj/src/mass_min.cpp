#include "gstate/mass_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gstate/spectrum.hpp"
#include "gstate/parallel.hpp"

namespace gstate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEps = std::numeric_limits<double>::epsilon();

Vector to_sphere(const RadialGrid& g, const Vector& u, double c) {
  const double q = eval_mass(g, u);
  if (!(q > 0.0)) throw ValidationError("cannot scale the zero function onto a mass sphere");
  return std::sqrt(c / q) * u;
}

// <D E(u), u> / int u^2
double multiplier(const Model& model, const Vector& u) {
  const RadialGrid& g = model.grid();
  const double num = model.kinetic_energy(u) + g.integrate(model.potential().cwiseProduct(u.cwiseAbs2())) -
                     g.integrate(model.f(u).cwiseProduct(u));
  return num / g.inner(u, u);
}

double residual_floor(const Model& model, double mu, double tol) {
  const double scale = model.kinetic().scaled().norm_inf() + model.potential().cwiseAbs().maxCoeff() + std::abs(mu);
  return std::max(tol, 8.0 * kEps * scale);
}

struct FlowResult {
  Vector u;
  double max_projection_error = 0.0;
  double max_kinetic = 0.0;
};

// Linearly implicit projected gradient flow
//   (1/tau + A + V + sigma) u* = u/tau + (mu + sigma) u + f(u),   u <- u* on S_c,
// with tau adapted so that E never increases between accepted steps.
FlowResult gradient_flow(const Model& model, const Vector& u0, double c, const MinimizeOptions& opts) {
  const RadialGrid& g = model.grid();
  const DiscreteOperator& A = model.kinetic();
  const double floor_shift = -model.linear_threshold() + 1e-2;
  FlowResult out;
  Vector u = to_sphere(g, u0, c);
  double energy = eval_energy(model, u);
  double tau = 1.0;
  for (int step = 0; step < opts.max_flow_steps; ++step) {
    const double mu = multiplier(model, u);
    const Vector grad = eval_action_gradient(model, u, mu);
    if (g.norm(grad) <= opts.flow_tol * g.norm(u)) break;
    const double sigma = std::max(-mu, floor_shift);
    const Vector rhs_base = (mu + sigma) * u + model.f(u);
    bool accepted = false;
    while (tau > 1e-12) {
      const LinearSolver solver(model.linear_part(Vector::Constant(u.size(), sigma + 1.0 / tau)));
      const Vector rhs = rhs_base + u / tau;
      const Vector next = to_sphere(g, A.from_scaled(solver.solve(A.to_scaled(rhs))), c);
      const double e_next = eval_energy(model, next);
      if (std::isfinite(e_next) && e_next <= energy + 1e-14 * std::abs(energy)) {
        out.max_projection_error = std::max(out.max_projection_error, std::abs(eval_mass(g, next) - c) / c);
        u = next;
        energy = e_next;
        tau = std::min(1.5 * tau, 1e6);
        accepted = true;
        break;
      }
      tau *= 0.25;
    }
    out.max_kinetic = std::max(out.max_kinetic, model.kinetic_energy(u));
    if (!accepted) break;
  }
  out.u = u;
  return out;
}

Vector bump(const Model& model, double width, int sign) {
  const RadialGrid& g = model.grid();
  Vector u(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double r = g.nodes()[i];
    const double gauss = std::exp(-r * r / (width * width));
    u[i] = g.kind() == DomainKind::UnitBall ? (1.0 - r * r) * gauss : gauss;
  }
  return sign < 0 ? Vector(-u) : u;
}

bool same_cluster(const Cluster& a, double m, double lambda, double tol) {
  return std::abs(a.m - m) <= tol * std::max(1.0, std::abs(m)) &&
         std::abs(a.lambda - lambda) <= tol * std::max(1.0, std::abs(lambda));
}

// Lowest energy among the polished continuations of the given clusters to mass c.
struct Probe {
  double m = kNaN;
  double lambda = kNaN;
};

Probe probe(const Model& model, const std::vector<Cluster>& clusters, double c, const MinimizeOptions& opts) {
  Probe best;
  for (const auto& cl : clusters) {
    const Polished p = polish_on_sphere(model, cl.u, c, cl.lambda, opts.polish_tol, opts.max_polish_iters);
    if (p.converged && !(p.m >= best.m)) {
      best.m = p.m;
      best.lambda = p.lambda;
    }
  }
  return best;
}

// Track one branch of constrained critical points from (u, lambda) at mass c_from
// to c_to in small geometric steps so that Newton stays on the branch.
Polished follow_branch(const Model& model, const Vector& u, double lambda, double c_from, double c_to,
                       const MinimizeOptions& opts) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(std::log(c_to / c_from)) / std::log(1.02))));
  Polished cur{u, 0.0, lambda, 0.0, true};
  for (int k = 1; k <= steps; ++k) {
    const double c = c_from * std::pow(c_to / c_from, static_cast<double>(k) / steps);
    cur = polish_on_sphere(model, cur.u, c, cur.lambda, opts.polish_tol, opts.max_polish_iters);
    if (!cur.converged) break;
  }
  return cur;
}

const Cluster& best_cluster(const MinimizerResult& r) {
  if (r.distinct_minima.empty()) throw ConvergenceError("no converged minimizer at c = " + std::to_string(r.c));
  return r.distinct_minima.front();
}

}  // namespace

Polished polish_on_sphere(const Model& model, const Vector& u0, double c, double lambda0, double tol, int max_iters) {
  const RadialGrid& g = model.grid();
  const DiscreteOperator& A = model.kinetic();
  Polished out;
  Vector u = to_sphere(g, u0, c);
  double mu = lambda0;
  Vector res = eval_action_gradient(model, u, mu);
  double rnorm = g.norm(res);
  for (int it = 0;; ++it) {
    if (rnorm <= residual_floor(model, mu, tol) * g.norm(u)) {
      out.converged = true;
      break;
    }
    if (it >= max_iters) break;
    const LinearSolver solver(model.linear_part(Vector::Constant(u.size(), -mu) - model.f_t(u)));
    if (solver.singular()) break;
    const Vector y = A.from_scaled(solver.solve(A.to_scaled(res)));
    const Vector z = A.from_scaled(solver.solve(A.to_scaled(u)));
    const double uz = g.inner(u, z);
    if (uz == 0.0) break;
    const double dmu = (c - eval_mass(g, u) + g.inner(u, y)) / uz;
    const Vector du = -y + dmu * z;
    bool moved = false;
    for (double t = 1.0; t > 1e-3; t *= 0.5) {
      const Vector trial = u + t * du;
      if (eval_mass(g, trial) <= 0.0) continue;
      const Vector ut = to_sphere(g, trial, c);
      const double mt = mu + t * dmu;
      const Vector rt = eval_action_gradient(model, ut, mt);
      const double nt = g.norm(rt);
      if (std::isfinite(nt) && nt < std::max(rnorm, 1e-300) * (t == 1.0 ? 10.0 : 1.0)) {
        u = ut;
        mu = mt;
        res = rt;
        rnorm = nt;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.u = u;
  out.lambda = mu;
  out.m = eval_energy(model, u);
  out.residual = rnorm / g.norm(u);
  return out;
}

MinimizerResult minimize_on_sphere(const Model& model, double c, const MinimizeOptions& opts) {
  if (!model.spec().bounded_below_on_spheres)
    throw ValidationError("E unbounded below on S_c (mass-supercritical exponent); use the branch tools instead");
  if (!(c > 0.0)) throw ValidationError("mass c must be positive");
  if (opts.multistart < 1) throw ValidationError("multistart must be >= 1");

  const int count = opts.multistart;
  const bool both_signs = opts.start_sign == 0 && !model.spec().nonlinearity.odd;
  const double base = model.grid().kind() == DomainKind::UnitBall ? 0.5 : 1.0;
  const double span = 4.0;

  struct Run {
    Polished pol;
    FlowResult flow;
  };
  std::vector<Run> runs(count);
  detail::parallel_for(count, opts.jobs, [&](int j) {
    std::mt19937_64 rng(opts.seed + 7919ULL * static_cast<std::uint64_t>(j));
    std::normal_distribution<double> jitter(0.0, 0.05);
    const double frac = count == 1 ? 0.5 : static_cast<double>(j) / (count - 1);
    const double width = base * std::pow(span, 2.0 * frac - 1.0) * std::exp(jitter(rng));
    const int sign = opts.start_sign != 0 ? opts.start_sign : (both_signs && j % 2 == 1 ? -1 : 1);
    runs[j].flow = gradient_flow(model, bump(model, width, sign), c, opts);
    runs[j].pol = polish_on_sphere(model, runs[j].flow.u, c, multiplier(model, runs[j].flow.u), opts.polish_tol,
                                   opts.max_polish_iters);
  });

  MinimizerResult res;
  res.c = c;
  res.multistart_count = count;
  std::vector<int> order(count);
  for (int j = 0; j < count; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return runs[a].pol.m < runs[b].pol.m; });
  for (int j : order) {
    const Run& run = runs[j];
    res.max_projection_error = std::max(res.max_projection_error, run.flow.max_projection_error);
    res.max_kinetic = std::max(res.max_kinetic, run.flow.max_kinetic);
    if (!run.pol.converged) continue;
    bool merged = false;
    for (auto& cl : res.distinct_minima) {
      if (same_cluster(cl, run.pol.m, run.pol.lambda, opts.cluster_tol)) {
        ++cl.hits;
        merged = true;
        break;
      }
    }
    if (!merged) res.distinct_minima.push_back(Cluster{run.pol.m, run.pol.lambda, run.pol.u, 1});
  }

  if (res.distinct_minima.empty()) {
    const Run& best = runs[order.front()];
    res.u = best.pol.u;
    res.m = best.pol.m;
    res.lambda = best.pol.lambda;
    res.residual = best.pol.residual;
    res.converged = false;
  } else {
    const Cluster& best = res.distinct_minima.front();
    res.u = best.u;
    res.m = best.m;
    res.lambda = best.lambda;
    res.residual =
        model.grid().norm(eval_action_gradient(model, best.u, best.lambda)) / model.grid().norm(best.u);
    res.converged = true;
  }
  res.multiplier_check = multiplier(model, res.u);
  if (opts.compute_morse) {
    Solution sol;
    sol.lambda = res.lambda;
    sol.u = res.u;
    sol.converged = res.converged;
    res.morse_index = morse_count(model, sol);
  }
  return res;
}

MassCurve mass_curve(const Model& model, const std::vector<double>& c_grid, const CurveOptions& opts) {
  if (c_grid.empty()) throw ValidationError("empty c grid");
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    if (!(c_grid[i] > 0.0)) throw ValidationError("c grid must be positive");
    if (i > 0 && !(c_grid[i] > c_grid[i - 1])) throw ValidationError("c grid must be strictly increasing");
  }
  if (!(opts.probe_fraction > 0.0 && opts.probe_fraction < 0.5)) throw ValidationError("probe fraction out of range");
  const int n = static_cast<int>(c_grid.size());
  const MinimizeOptions& mo = opts.minimize;

  MassCurve curve;
  curve.c = c_grid;
  curve.probe_fraction = opts.probe_fraction;
  curve.minimizers.resize(n);
  curve.dq_left.assign(n, kNaN);
  curve.dq_right.assign(n, kNaN);
  curve.dq_left_err.assign(n, kNaN);
  curve.dq_right_err.assign(n, kNaN);
  curve.dq_center.assign(n, kNaN);
  const bool probes = n >= 2;

  detail::parallel_for(n, opts.jobs, [&](int i) {
    const double c = c_grid[i];
    MinimizerResult r = minimize_on_sphere(model, c, mo);
    if (!r.converged) throw ConvergenceError("minimization did not converge at c = " + std::to_string(c));
    if (probes) {
      const double d = opts.probe_fraction * c;
      const Probe l1 = probe(model, r.distinct_minima, c - d, mo), l2 = probe(model, r.distinct_minima, c - 0.5 * d, mo);
      const Probe r1 = probe(model, r.distinct_minima, c + d, mo), r2 = probe(model, r.distinct_minima, c + 0.5 * d, mo);
      const double ql1 = (r.m - l1.m) / d, ql2 = (r.m - l2.m) / (0.5 * d);
      const double qr1 = (r1.m - r.m) / d, qr2 = (r2.m - r.m) / (0.5 * d);
      curve.dq_left[i] = 2.0 * ql2 - ql1;
      curve.dq_left_err[i] = std::abs(ql1 - ql2);
      curve.dq_right[i] = 2.0 * qr2 - qr1;
      curve.dq_right_err[i] = std::abs(qr1 - qr2);
      curve.dq_center[i] = (r1.m - l1.m) / (2.0 * d);
    }
    curve.minimizers[i] = std::move(r);
  });

  for (int i = 0; i < n; ++i) {
    const MinimizerResult& r = curve.minimizers[i];
    curve.m.push_back(r.m);
    curve.lambda.push_back(r.lambda);
    curve.morse_index.push_back(r.morse_index);
    int achieving = 0;
    for (const auto& cl : r.distinct_minima)
      if (cl.m <= r.m + mo.energy_tol * std::max(1.0, std::abs(r.m))) ++achieving;
    curve.n_clusters.push_back(achieving);
  }
  if (!probes) return curve;

  // kinks at samples: one-sided quotients disagree beyond their error estimate
  std::vector<Kink> sample_kinks;
  for (int i = 0; i < n; ++i) {
    const double gap = curve.dq_left[i] - curve.dq_right[i];
    const double err = curve.dq_left_err[i] + curve.dq_right_err[i];
    const double floor = 1e-7 * std::max(1.0, std::abs(curve.lambda[i]));
    if (std::isfinite(gap) && std::abs(gap) > opts.kink_factor * err + floor)
      sample_kinks.push_back(Kink{curve.c[i], i, i, true, gap, err});
  }
  // kinks inside intervals: the minimizing branch at c_i is no longer minimal at c_{i+1}
  std::vector<Kink> interval_kinks;
  for (int i = 0; i + 1 < n; ++i) {
    const Cluster& a = best_cluster(curve.minimizers[i]);
    const Cluster& b = best_cluster(curve.minimizers[i + 1]);
    const double lo = curve.c[i], hi = curve.c[i + 1];
    const double tol_e = mo.energy_tol * std::max(1.0, std::abs(curve.m[i + 1]));
    const Polished a_hi = follow_branch(model, a.u, a.lambda, lo, hi, mo);
    if (!a_hi.converged || a_hi.m <= curve.m[i + 1] + tol_e) continue;
    const Polished b_lo = follow_branch(model, b.u, b.lambda, hi, lo, mo);
    // secant on E_a - E_b, both branches followed to each iterate
    double where = std::numeric_limits<double>::quiet_NaN();
    if (b_lo.converged) {
      double c0 = lo, d0 = curve.m[i] - b_lo.m, c1 = hi, d1 = a_hi.m - curve.m[i + 1];
      Polished pa = a_hi, pb{b.u, b.m, b.lambda, 0.0, true};
      double ca = hi, cb = hi;
      for (int it = 0; it < 30 && d1 != d0; ++it) {
        const double c2 = std::clamp(c1 - d1 * (c1 - c0) / (d1 - d0), lo, hi);
        pa = follow_branch(model, pa.u, pa.lambda, ca, c2, mo);
        pb = follow_branch(model, pb.u, pb.lambda, cb, c2, mo);
        if (!pa.converged || !pb.converged) break;
        ca = cb = c2;
        c0 = c1;
        d0 = d1;
        c1 = c2;
        d1 = pa.m - pb.m;
        where = c2;
        if (std::abs(c1 - c0) < 1e-12 * c1) break;
      }
    }
    if (!std::isfinite(where)) {
      // tangent lines of the two branches
      where = (curve.m[i + 1] - curve.m[i] + curve.lambda[i] * lo - curve.lambda[i + 1] * hi) /
              (curve.lambda[i] - curve.lambda[i + 1]);
      where = std::clamp(where, lo, hi);
    }
    interval_kinks.push_back(Kink{where, i, i + 1, false, a_hi.lambda - curve.lambda[i + 1], 0.0});
  }
  for (const auto& k : sample_kinks) curve.kinks.push_back(k);
  for (const auto& k : interval_kinks) {
    const bool adjacent = std::any_of(sample_kinks.begin(), sample_kinks.end(),
                                      [&](const Kink& s) { return s.lower == k.lower || s.lower == k.upper; });
    if (!adjacent) curve.kinks.push_back(k);
  }
  std::sort(curve.kinks.begin(), curve.kinks.end(), [](const Kink& a, const Kink& b) { return a.c < b.c; });
  return curve;
}

std::pair<double, double> lambda_set_scan(const Model& model, double c, const MinimizeOptions& opts) {
  const MinimizerResult r = minimize_on_sphere(model, c, opts);
  if (!r.converged) throw ConvergenceError("minimization did not converge at c = " + std::to_string(c));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& cl : r.distinct_minima) {
    if (cl.m > r.m + opts.energy_tol * std::max(1.0, std::abs(r.m))) continue;
    lo = std::min(lo, cl.lambda);
    hi = std::max(hi, cl.lambda);
  }
  return {lo, hi};
}

double scaling_exponent(double s, int dim, double p) {
  const double den = 4.0 * s - dim * (p - 2.0);
  if (den == 0.0) throw ValidationError("mass-critical exponent has no scaling law");
  return (2.0 * s * p - dim * (p - 2.0)) / den;
}

CrossingResult counterexample_crossing(double s, int dim, double p, double q, const RadialGrid& grid,
                                       const MinimizeOptions& opts) {
  if (p == q) throw ValidationError("counterexample needs p != q");
  const Model model(appendix_a(s, dim, p, q), grid);
  CrossingResult out;
  MinimizeOptions plus = opts, minus = opts;
  plus.start_sign = 1;
  minus.start_sign = -1;
  plus.compute_morse = minus.compute_morse = false;
  const MinimizerResult rp = minimize_on_sphere(model, 1.0, plus);
  const MinimizerResult rm = minimize_on_sphere(model, 1.0, minus);
  if (!rp.converged || !rm.converged) throw ConvergenceError("pure-power minimization did not converge at c = 1");
  out.m_plus_1 = rp.m;
  out.m_minus_1 = rm.m;
  out.alpha_plus = scaling_exponent(s, dim, p);
  out.alpha_minus = scaling_exponent(s, dim, q);
  out.c_hat_scaling = std::pow(rm.m / rp.m, 1.0 / (out.alpha_plus - out.alpha_minus));
  const double m_s = std::pow(out.c_hat_scaling, out.alpha_plus) * rp.m;
  const double slope_p = out.alpha_plus * m_s / out.c_hat_scaling, slope_m = out.alpha_minus * m_s / out.c_hat_scaling;
  out.dq_left_scaling = std::max(slope_p, slope_m);
  out.dq_right_scaling = std::min(slope_p, slope_m);
  if (!(out.c_hat_scaling > 1e-3 && out.c_hat_scaling < 1e3)) {
    out.bounded = false;
    return out;
  }

  // follow both branches from c = 1 to the predicted crossing, then refine by secants
  Polished bp{rp.u, rp.m, rp.lambda, 0.0, true}, bm{rm.u, rm.m, rm.lambda, 0.0, true};
  const auto follow = [&](Polished& b, double c) {
    b = polish_on_sphere(model, b.u, c, b.lambda, opts.polish_tol, opts.max_polish_iters);
    if (!b.converged) throw ConvergenceError("branch polish failed at c = " + std::to_string(c));
  };
  const int steps = 8;
  for (int k = 1; k <= steps; ++k) {
    const double c = std::pow(out.c_hat_scaling, static_cast<double>(k) / steps);
    follow(bp, c);
    follow(bm, c);
  }
  double c0 = out.c_hat_scaling, g0 = bp.m - bm.m;
  double c1 = c0 * (1.0 + 1e-3);
  for (int it = 0; it < 40; ++it) {
    follow(bp, c1);
    follow(bm, c1);
    const double g1 = bp.m - bm.m;
    if (g1 == 0.0 || std::abs(c1 - c0) < 1e-14 * c1) break;
    const double c2 = c1 - g1 * (c1 - c0) / (g1 - g0);
    c0 = c1;
    g0 = g1;
    c1 = c2;
  }
  follow(bp, c1);
  follow(bm, c1);
  out.c_hat = c1;
  out.m_hat = 0.5 * (bp.m + bm.m);
  out.lambda_plus = bp.lambda;
  out.lambda_minus = bm.lambda;
  out.dq_left = std::max(bp.lambda, bm.lambda);
  out.dq_right = std::min(bp.lambda, bm.lambda);
  return out;
}

ExpressionReport m_expression_check(const Model& model, const MassCurve& curve) {
  const ProblemSpec& spec = model.spec();
  if (spec.s != 1.0 || !spec.pure_power) throw ValidationError("expression check needs s = 1 and a pure power");
  const int N = spec.dim;
  const double p = spec.p;
  const double den = 4.0 + 2.0 * N - N * p;
  if (den == 0.0) throw ValidationError("expression check is singular at the mass-critical exponent");
  const double alpha = (2.0 * N - (N - 2.0) * p) / den;
  const RadialGrid& g = model.grid();
  const Vector rhp = g.nodes().cwiseProduct(model.weight_slope());

  ExpressionReport rep;
  for (std::size_t i = 0; i < curve.c.size(); ++i) {
    if (!std::isfinite(curve.dq_center[i])) continue;
    const double c = curve.c[i];
    const Vector& u = curve.minimizers[i].u;
    const Vector up = u.cwiseAbs().array().pow(p).matrix();
    const double w = g.integrate(rhp.cwiseProduct(up));
    const double expr = alpha * curve.m[i] / c + (p - 2.0) / (p * den * c) * w;
    const double poh = ((N - 2.0) / N * model.kinetic_energy(u) - 2.0 / p * g.integrate(model.weight().cwiseProduct(up)) -
                        2.0 / (p * N) * w) /
                       g.inner(u, u);
    const double d = curve.dq_center[i];
    rep.c.push_back(c);
    rep.derivative.push_back(d);
    rep.expression.push_back(expr);
    rep.pohozaev_lambda.push_back(poh);
    rep.weight_term.push_back(w);
    rep.max_ode_residual = std::max(rep.max_ode_residual, std::abs(d - expr) / std::abs(d));
    rep.max_lambda_residual = std::max(rep.max_lambda_residual, std::abs(d - poh) / std::abs(d));
  }
  rep.conclusive = !rep.c.empty();
  rep.note = rep.conclusive ? "" : "insufficient curve resolution: no centered derivative available";
  return rep;
}

}  // namespace gstate
