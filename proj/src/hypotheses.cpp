#include "gstate/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace gstate {

namespace {

constexpr double kTol = 1e-9;

using Fn2 = std::function<double(double, double)>;

enum class Order { NonIncreasing, NonDecreasing, Increasing, Decreasing };

// Accumulates the outcome of the pieces that make up one condition.
class Tally {
 public:
  explicit Tally(std::string name) { result_.name = std::move(name); }

  void violation(double r, double t, double amount, const std::string& what) {
    if (!worst_ || amount > worst_->violation) {
      worst_ = Witness{r, t, amount};
      what_ = what;
    }
  }
  void flat(const std::string& what) {
    if (flat_.empty()) flat_ = what;
  }
  void missing(const std::string& what) {
    if (missing_.empty()) missing_ = what;
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }

  ConditionResult finish() {
    if (worst_) {
      result_.verdict = Verdict::Fail;
      result_.witness = worst_;
      result_.detail = what_;
    } else if (!missing_.empty()) {
      result_.verdict = Verdict::Inconclusive;
      result_.detail = missing_;
    } else if (!flat_.empty()) {
      result_.verdict = Verdict::Inconclusive;
      result_.detail = flat_;
    } else {
      result_.verdict = Verdict::Pass;
      result_.detail = "pass (sampled)";
    }
    if (!notes_.empty()) result_.detail += " [" + notes_ + "]";
    return result_;
  }

 private:
  ConditionResult result_;
  std::optional<Witness> worst_;
  std::string what_, flat_, missing_, notes_;
};

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1));
  return out;
}

double rel(double diff, double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  return diff / scale;
}

// Checks that g is monotone along r (axis 0) or t (axis 1) on the lattice.
void monotone(Tally& tally, const Fn2& g, const std::vector<double>& rs, const std::vector<double>& ts, int axis,
              Order order, const std::string& label) {
  const bool strict = order == Order::Increasing || order == Order::Decreasing;
  const double sign = (order == Order::NonIncreasing || order == Order::Decreasing) ? -1.0 : 1.0;
  const auto& outer = axis == 0 ? ts : rs;
  const auto& inner = axis == 0 ? rs : ts;
  for (double o : outer) {
    double prev = axis == 0 ? g(inner[0], o) : g(o, inner[0]);
    for (std::size_t i = 1; i < inner.size(); ++i) {
      const double cur = axis == 0 ? g(inner[i], o) : g(o, inner[i]);
      const double step = sign * rel(cur - prev, cur, prev);
      const double r = axis == 0 ? inner[i] : o;
      const double t = axis == 0 ? o : inner[i];
      if (!std::isfinite(cur)) {
        tally.violation(r, t, std::numeric_limits<double>::infinity(), label + ": non-finite value");
      } else if (step < -kTol) {
        tally.violation(r, t, -step, label + " violated");
      } else if (strict && step <= kTol) {
        tally.flat(label + ": flat within tolerance, strictness not resolved");
      }
      prev = cur;
    }
  }
}

// Checks lhs(r,t) <= rhs(r,t) (or < when strict) on the lattice.
void inequality(Tally& tally, const Fn2& lhs, const Fn2& rhs, const std::vector<double>& rs,
                const std::vector<double>& ts, bool strict, const std::string& label) {
  for (double r : rs)
    for (double t : ts) {
      const double a = lhs(r, t), b = rhs(r, t);
      const double excess = rel(a - b, a, b);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        tally.violation(r, t, std::numeric_limits<double>::infinity(), label + ": non-finite value");
      } else if (excess > kTol) {
        tally.violation(r, t, excess, label + " violated");
      } else if (strict && excess >= -kTol) {
        tally.flat(label + ": equality within tolerance, strictness not resolved");
      }
    }
}

void zero_at_origin_and_odd(Tally& tally, const Nonlinearity& nl, const std::vector<double>& rs,
                            const std::vector<double>& ts) {
  for (double r : rs) {
    const double f0 = nl.f(r, 0.0);
    if (std::abs(f0) > kTol * std::max(1.0, std::abs(nl.f(r, ts.back()))))
      tally.violation(r, 0.0, std::abs(f0), "f(r, 0) = 0 violated");
    for (double t : ts) {
      const double a = nl.f(r, t), b = nl.f(r, -t);
      const double defect = rel(std::abs(a + b), a, b);
      if (defect > kTol) tally.violation(r, t, defect, "oddness f(r, -t) = -f(r, t) violated");
    }
  }
}

// Local exponent e with f ~ t^{e-1} near t.
double local_exponent(const Fn2& f, double r, double t) {
  return 1.0 + std::log(f(r, 2.0 * t) / f(r, t)) / std::log(2.0);
}

ConditionResult check_h(const ProblemSpec& spec, const std::vector<double>& rs, std::optional<double> theta) {
  Tally tally("h");
  const auto& h = spec.weight;
  if (!h.value || !h.derivative) {
    tally.missing("weight or its derivative not supplied");
    return tally.finish();
  }
  const double h0 = h.value(0.0);
  if (!std::isfinite(h0)) tally.violation(0.0, 0.0, std::numeric_limits<double>::infinity(), "h not bounded at r = 0");
  for (double r : rs) {
    const double v = h.value(r);
    if (!(v > 0.0)) tally.violation(r, 0.0, std::abs(v) + kTol * 2, "h > 0 violated");
  }
  const std::vector<double> dummy{0.0};
  monotone(tally, [&](double r, double) { return h.value(r); }, rs, dummy, 0, Order::NonIncreasing,
           "h non-increasing");
  monotone(tally, [&](double r, double) { return r * h.derivative(r) / h.value(r); }, rs, dummy, 0,
           Order::NonIncreasing, "r h'/h non-increasing");
  if (!theta || !std::isfinite(*theta)) tally.missing("theta estimate not finite");
  return tally.finish();
}

ConditionResult check_V(const ProblemSpec& spec, const std::vector<double>& rs) {
  Tally tally("V");
  const std::vector<double> dummy{0.0};
  if (!spec.potential) {
    tally.flat("V = 0: 2V + rV' is constant, strict increase does not hold");
    return tally.finish();
  }
  const auto& V = *spec.potential;
  if (!V.derivative) {
    tally.missing("V' not supplied");
    return tally.finish();
  }
  monotone(tally, [&](double r, double) { return 2.0 * V.value(r) + r * V.derivative(r); }, rs, dummy, 0,
           Order::Increasing, "2V + rV' increasing");
  tally.note("lambda_1 being an eigenvalue is checked by the solver, not here");
  return tally.finish();
}

bool has_all(const Nonlinearity& nl) { return nl.f && nl.f_t && nl.f_r && nl.F && nl.F_r; }

ConditionResult check_f1(const ProblemSpec& spec, const std::vector<double>& rs, const std::vector<double>& ts) {
  Tally tally("f1");
  const auto& nl = spec.nonlinearity;
  if (!has_all(nl)) {
    tally.missing("nonlinearity handles incomplete");
    return tally.finish();
  }
  const double N = spec.dim;
  zero_at_origin_and_odd(tally, nl, rs, ts);
  monotone(tally, nl.f, rs, ts, 0, Order::NonIncreasing, "f decreasing in r");
  monotone(tally, nl.f, rs, ts, 1, Order::Increasing, "f increasing in t");
  inequality(
      tally, [&](double r, double t) { return (N - 2.0) * nl.f(r, t) * t; },
      [&](double r, double t) { return 2.0 * N * nl.F(r, t) + 2.0 * r * nl.F_r(r, t); }, rs, ts, false,
      "(N-2) f t <= 2N F + 2r F_r");
  tally.note("monotonicity in r tested non-strictly");
  return tally.finish();
}

ConditionResult check_f2(const ProblemSpec& spec, const std::vector<double>& rs, const std::vector<double>& ts,
                         bool primed) {
  Tally tally(primed ? "f2'" : "f2");
  const auto& nl = spec.nonlinearity;
  if (!has_all(nl)) {
    tally.missing("nonlinearity handles incomplete");
    return tally.finish();
  }
  const double N = spec.dim;
  auto g = [&](double r, double t) {
    return (1.0 + 4.0 / N) * nl.f(r, t) / t + (2.0 / N) * r * nl.f_r(r, t) / t - nl.f_t(r, t);
  };
  if (primed) {
    monotone(tally, g, rs, ts, 0, Order::NonDecreasing, "g non-decreasing in r");
    monotone(tally, g, rs, ts, 1, Order::Decreasing, "g decreasing in t");
  } else {
    monotone(tally, g, rs, ts, 0, Order::NonIncreasing, "g non-increasing in r");
    monotone(tally, g, rs, ts, 1, Order::Increasing, "g increasing in t");
  }
  return tally.finish();
}

ConditionResult check_f3(const ProblemSpec& spec, const std::vector<double>& rs) {
  Tally tally("f3");
  const auto& f = spec.nonlinearity.f;
  if (!f) {
    tally.missing("f not supplied");
    return tally.finish();
  }
  const double N = spec.dim;
  const double critical = N > 2 ? 2.0 * N / (N - 2.0) : std::numeric_limits<double>::infinity();
  const double t_small = 1e-6, t_large = 1e6;
  double p_lo = 1e300, p_hi = -1e300, q_lo = 1e300, q_hi = -1e300;
  for (double r : rs) {
    const double pe = local_exponent(f, r, t_small), qe = local_exponent(f, r, t_large);
    p_lo = std::min(p_lo, pe);
    p_hi = std::max(p_hi, pe);
    q_lo = std::min(q_lo, qe);
    q_hi = std::max(q_hi, qe);
    if (!(pe > 2.0 && pe < critical)) tally.violation(r, t_small, std::abs(pe - 2.0) + kTol * 2, "p in (2, 2*) violated");
    if (!(qe > 2.0 && qe < critical)) tally.violation(r, t_large, std::abs(qe - 2.0) + kTol * 2, "q in (2, 2*) violated");
  }
  if (p_hi - p_lo > 1e-3 || q_hi - q_lo > 1e-3) tally.flat("exponents vary with r; uniformity not resolved");
  const double p = p_lo, q = q_lo;
  const double m1_inf = f(rs.back(), t_small) / std::pow(t_small, p - 1.0);
  const double m2_0 = f(rs.front(), t_large) / std::pow(t_large, q - 1.0);
  if (!(m1_inf > 0.0 && std::isfinite(m1_inf)))
    tally.violation(rs.back(), t_small, 1.0, "m1(infinity) in (0, inf) violated");
  if (!(m2_0 > 0.0 && std::isfinite(m2_0))) tally.violation(rs.front(), t_large, 1.0, "m2(0) in (0, inf) violated");
  const double m2_small_r = f(1e-9, t_large) / std::pow(t_large, q - 1.0);
  if (!std::isfinite(m2_small_r) || m2_small_r > 1e3 * m2_0)
    tally.violation(1e-9, t_large, 1.0, "m2(r) does not converge as r -> 0");
  tally.note("p ~ " + std::to_string(p) + ", q ~ " + std::to_string(q));
  return tally.finish();
}

ConditionResult check_H1(const ProblemSpec& spec) {
  Tally tally("H1");
  if (!spec.potential) {
    tally.violation(0.0, 0.0, 1.0, "V(0) < 0 violated (V = 0)");
    return tally.finish();
  }
  const auto& V = spec.potential->value;
  const double v0 = V(0.0), vinf = V(1e6);
  if (!(v0 < 0.0)) tally.violation(0.0, 0.0, std::abs(v0) + 1.0, "V(0) < 0 violated");
  if (std::abs(vinf) > 1e-9 * std::max(1.0, std::abs(v0))) tally.violation(1e6, 0.0, std::abs(vinf), "V -> 0 violated");
  tally.note("evenness holds by radial construction");
  return tally.finish();
}

ConditionResult check_H2(const ProblemSpec& spec, const std::vector<double>& rs, const std::vector<double>& ts) {
  Tally tally("H2");
  const auto& nl = spec.nonlinearity;
  if (!has_all(nl)) {
    tally.missing("nonlinearity handles incomplete");
    return tally.finish();
  }
  zero_at_origin_and_odd(tally, nl, rs, ts);
  for (double r : rs) {
    const double small = nl.f_t(r, 1e-8), ref = std::max(1.0, std::abs(nl.f_t(r, 1.0)));
    if (std::abs(small) > 1e-6 * ref) tally.violation(r, 1e-8, std::abs(small) / ref, "f_t(x, t) -> 0 as t -> 0 violated");
  }
  inequality(
      tally, [&](double r, double t) { return -nl.f(r, t) * t; },
      [&](double r, double t) { return 2.0 * nl.F(r, t) + 2.0 * r * nl.F_r(r, t); }, rs, ts, false,
      "-f t <= 2F + 2r F_r");
  return tally.finish();
}

void superlinear(Tally& tally, const Nonlinearity& nl, const std::vector<double>& rs, const std::vector<double>& ts) {
  inequality(
      tally, [&](double r, double t) { return -nl.f(r, t); }, [](double, double) { return 0.0; }, rs, ts, true,
      "f > 0");
  inequality(
      tally, [&](double r, double t) { return nl.f(r, t); }, [&](double r, double t) { return nl.f_t(r, t) * t; }, rs,
      ts, true, "f_t t > f");
}

ConditionResult check_H3(const ProblemSpec& spec, const std::vector<double>& rs, const std::vector<double>& ts,
                         bool primed) {
  Tally tally(primed ? "H3'" : "H3");
  const auto& nl = spec.nonlinearity;
  if (!has_all(nl)) {
    tally.missing("nonlinearity handles incomplete");
    return tally.finish();
  }
  auto V = [&](double r) { return (!primed && spec.potential) ? spec.potential->value(r) : 0.0; };
  auto dV = [&](double r) { return (!primed && spec.potential) ? spec.potential->derivative(r) : 0.0; };
  inequality(
      tally, [&](double r, double t) { return nl.f_r(r, t) - dV(r) * t; }, [](double, double) { return 0.0; }, rs, ts,
      false, primed ? "f_x <= 0" : "f_x - V' t <= 0");
  if (!primed) {
    // Some x0 on the lattice across which f - V t drops strictly for every t.
    bool found = false;
    for (std::size_t j = 0; j + 1 < rs.size() && !found; ++j) {
      bool all = true;
      for (double t : ts) {
        const double a = nl.f(rs[j], t) - V(rs[j]) * t, b = nl.f(rs[j + 1], t) - V(rs[j + 1]) * t;
        if (!(rel(a - b, a, b) > kTol)) {
          all = false;
          break;
        }
      }
      found = all;
    }
    if (!found) tally.flat("no x0 found on the lattice across which f - V t drops strictly");
  } else {
    tally.note("second clause of (i) not checked");
  }
  superlinear(tally, nl, rs, ts);
  return tally.finish();
}

ConditionResult check_H4(const ProblemSpec& spec, const std::vector<double>& rs, const std::vector<double>& ts) {
  Tally tally("H4");
  const auto& f = spec.nonlinearity.f;
  if (!f) {
    tally.missing("f not supplied");
    return tally.finish();
  }
  const double t0 = 1e-6;
  const double sigma = 0.5 * (local_exponent(f, rs.front(), t0) - 2.0);
  if (!(sigma > 0.0)) {
    tally.violation(rs.front(), t0, std::abs(sigma) + 2 * kTol, "sigma > 0 violated");
    return tally.finish();
  }
  double amin = 1e300;
  for (double r : rs) amin = std::min(amin, f(r, t0) * std::pow(2.0, sigma) / std::pow(t0, 2.0 * sigma + 1.0));
  if (!(amin > 0.0)) tally.violation(rs.back(), t0, 1.0, "A(x) >= A > 0 violated");
  const double far = 1e6;
  const std::vector<double> upper(ts.begin() + ts.size() / 2, ts.end());
  const std::vector<double> rfar{far};
  monotone(tally, [&](double r, double t) { return f(r, t) / t; }, rfar, upper, 1, Order::Increasing,
           "f(x, t)/t growing for large x");
  tally.note("sigma ~ " + std::to_string(sigma));
  return tally.finish();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

const ConditionResult& HypothesisReport::get(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw ValidationError("no hypothesis named '" + name + "'");
}

std::optional<double> estimate_theta(const RadialFunction& h) {
  if (!h.value || !h.derivative) return std::nullopt;
  auto g = [&](double r) { return r * h.derivative(r) / h.value(r); };
  const double r = 1e6;
  const double estimate = (4.0 * g(2.0 * r) - g(r)) / 3.0;
  if (!std::isfinite(estimate)) return std::nullopt;
  return estimate;
}

HypothesisReport check_hypotheses(const ProblemSpec& spec, const SampleBox& box) {
  if (!(box.r_min > 0.0 && box.r_max > box.r_min && box.t_min > 0.0 && box.t_max > box.t_min && box.nr >= 2 &&
        box.nt >= 2))
    throw ValidationError("sample box must have 0 < min < max and at least 2 samples per axis");
  const auto rs = log_space(box.r_min, box.r_max, box.nr);
  const auto ts = log_space(box.t_min, box.t_max, box.nt);
  HypothesisReport report;
  const auto theta = estimate_theta(spec.weight);
  report.theta_estimate = theta.value_or(std::numeric_limits<double>::quiet_NaN());
  report.conditions.push_back(check_h(spec, rs, theta));
  report.conditions.push_back(check_V(spec, rs));
  report.conditions.push_back(check_f1(spec, rs, ts));
  report.conditions.push_back(check_f2(spec, rs, ts, false));
  report.conditions.push_back(check_f2(spec, rs, ts, true));
  report.conditions.push_back(check_f3(spec, rs));
  report.conditions.push_back(check_H1(spec));
  report.conditions.push_back(check_H2(spec, rs, ts));
  report.conditions.push_back(check_H3(spec, rs, ts, false));
  report.conditions.push_back(check_H3(spec, rs, ts, true));
  report.conditions.push_back(check_H4(spec, rs, ts));
  return report;
}

}  // namespace gstate
