#pragma once

// Adaptive Dormand-Prince RK5(4) integration with a 4th-order dense output
// on every accepted step, plus divergence evaluation and quadrature of the
// divergence along a stored trajectory segment.

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>

#include "core.hpp"

namespace hybridcycles {

/// Autonomous vector field. `eval` is required; `divergence` and `jacobian`
/// (columns d f / d x_j) are optional analytic extras used when present.
struct VectorFieldDef {
  int dimension = 0;
  std::function<State(const State&)> eval;
  std::function<double(const State&)> divergence;
  std::function<std::vector<State>(const State&)> jacobian;

  void validate() const {
    if (dimension <= 0)
      throw std::invalid_argument("VectorFieldDef: dimension must be positive");
    if (!eval) throw std::invalid_argument("VectorFieldDef: eval missing");
  }
};

struct IntegratorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double h_init = 0.0;  // 0 picks a starting step automatically
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 10000000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("IntegratorOptions: tolerances must be > 0");
    if (!(h_min > 0.0) || !(h_min <= h_max))
      throw std::invalid_argument("IntegratorOptions: need 0 < h_min <= h_max");
    if (max_steps <= 0)
      throw std::invalid_argument("IntegratorOptions: max_steps must be > 0");
  }
};

/// Stepper failure with a machine-readable kind so callers can translate
/// blow-ups into trajectory terminations.
class FlowError : public NumericalError {
 public:
  enum class Kind { step_count, step_underflow, non_finite };
  Kind kind;
  FlowError(Kind k, const std::string& msg) : NumericalError(msg), kind(k) {}
};

/// One accepted step with its dense-output polynomial coefficients.
struct StepRecord {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State, 5> rcont;
};

inline State dense_eval(const StepRecord& rec, double t) {
  const double th = (t - rec.t0) / rec.h;
  const double th1 = 1.0 - th;
  const std::size_t n = rec.rcont[0].size();
  State out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = rec.rcont[0][i] +
             th * (rec.rcont[1][i] +
                   th1 * (rec.rcont[2][i] +
                          th * (rec.rcont[3][i] + th1 * rec.rcont[4][i])));
  return out;
}

/// A maximal reset-free piece of trajectory: accepted-step nodes plus the
/// dense interpolant between them. Node times are strictly increasing and
/// the interpolant reproduces node states exactly.
struct ContinuousSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  int dimension = 0;
  std::vector<std::pair<double, State>> nodes;  // nodes[i] starts steps[i]
  std::vector<StepRecord> steps;

  const State& start_state() const { return nodes.front().second; }
  const State& end_state() const { return nodes.back().second; }

  State eval_at(double t) const {
    const double span = std::max(1.0, std::fabs(t_end - t_start));
    if (t < t_start - 1e-9 * span || t > t_end + 1e-9 * span)
      throw std::invalid_argument("eval_at: time outside segment");
    t = std::clamp(t, t_start, t_end);
    if (steps.empty()) return nodes.front().second;
    // last step whose start time is <= t
    std::size_t lo = 0, hi = steps.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (steps[mid].t0 <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return dense_eval(steps[lo], t);
  }

  /// Cut the segment at an interior time (used when an event lands mid-step).
  /// The dense record of the cut step is kept; times past t_star are dropped.
  void truncate_at(double t_star, const State& x_star) {
    while (nodes.size() > 1 && nodes.back().first >= t_star)
      nodes.pop_back();
    while (!steps.empty() && steps.back().t0 >= t_star) steps.pop_back();
    nodes.emplace_back(t_star, x_star);
    t_end = t_star;
  }
};

inline State eval_at(const ContinuousSegment& seg, double t) {
  return seg.eval_at(t);
}

namespace detail {

// Dormand-Prince RK5(4) tableau.
inline constexpr double A21 = 0.2;
inline constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
inline constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0,
                        A43 = 32.0 / 9.0;
inline constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0,
                        A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0;
inline constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0,
                        A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0,
                        A65 = -5103.0 / 18656.0;
inline constexpr double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0,
                        A74 = 125.0 / 192.0, A75 = -2187.0 / 6784.0,
                        A76 = 11.0 / 84.0;
inline constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0,
                        E4 = 71.0 / 1920.0, E5 = -17253.0 / 339200.0,
                        E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;
// Dense-output weights for the rcont5 polynomial coefficient.
inline constexpr double D1 = -12715105075.0 / 11282082432.0;
inline constexpr double D3 = 87487479700.0 / 32700410799.0;
inline constexpr double D4 = -10690763975.0 / 1880347072.0;
inline constexpr double D5 = 701980252875.0 / 199316789632.0;
inline constexpr double D6 = -1453857185.0 / 822651844.0;
inline constexpr double D7 = 69997945.0 / 29380423.0;

inline double scaled_rms(const State& v, const State& sc) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double q = v[i] / sc[i];
    s += q * q;
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double initial_step(const VectorFieldDef& f, const State& y,
                           const State& k1, double span,
                           const IntegratorOptions& opts) {
  const std::size_t n = y.size();
  State sc(n);
  for (std::size_t i = 0; i < n; ++i)
    sc[i] = opts.abs_tol + opts.rel_tol * std::fabs(y[i]);
  const double d0 = scaled_rms(y, sc);
  const double d1 = scaled_rms(k1, sc);
  double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * (d0 / d1);
  h0 = std::min(h0, span);
  State y1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h0 * k1[i];
  const State k2 = f.eval(y1);
  State dk(n);
  for (std::size_t i = 0; i < n; ++i) dk[i] = k2[i] - k1[i];
  const double d2 = scaled_rms(dk, sc) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, span, opts.h_max});
}

}  // namespace detail

/// Advance `seg` (already holding its start node) until `t_end`. After every
/// accepted step `after_step(seg)` runs; returning true stops integration
/// early. Throws FlowError on step-budget, underflow, or blow-up.
template <typename AfterStep>
void integrate_segment(const VectorFieldDef& f, ContinuousSegment& seg,
                       double t_end, const IntegratorOptions& opts,
                       AfterStep&& after_step) {
  f.validate();
  opts.validate();
  const std::size_t n = static_cast<std::size_t>(f.dimension);
  if (seg.nodes.empty() || seg.nodes.back().second.size() != n)
    throw std::invalid_argument("integrate_segment: bad start node");

  double t = seg.nodes.back().first;
  State y = seg.nodes.back().second;
  if (!all_finite(y))
    throw std::invalid_argument("integrate_segment: non-finite start state");
  if (t_end <= t) return;

  constexpr double safe = 0.9, beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 5.0, facc2 = 0.1;  // step-ratio clamps

  State k1 = f.eval(y);
  double h = opts.h_init > 0.0
                 ? std::min(opts.h_init, t_end - t)
                 : detail::initial_step(f, y, k1, t_end - t, opts);
  double facold = 1e-4;
  bool rejected = false;
  long nstep = 0;

  State k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), ytmp(n), err(n), sc(n);

  while (true) {
    const double span = std::max(1.0, std::fabs(t_end));
    if (t_end - t <= 1e-14 * span) return;
    h = std::min({h, opts.h_max, t_end - t});
    const bool last = (t + h >= t_end);
    if (h < opts.h_min || t + h == t)
      throw FlowError(FlowError::Kind::step_underflow,
                      "step size underflow at t=" + std::to_string(t));
    if (++nstep > opts.max_steps)
      throw FlowError(FlowError::Kind::step_count,
                      "step budget exceeded at t=" + std::to_string(t));

    using namespace detail;
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * A21 * k1[i];
    k2 = f.eval(ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    k3 = f.eval(ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    k4 = f.eval(ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] =
          y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    k5 = f.eval(ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] +
                            A64 * k4[i] + A65 * k5[i]);
    k6 = f.eval(ytmp);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] +
                          A75 * k5[i] + A76 * k6[i]);
    k7 = f.eval(y1);

    bool finite = all_finite(y1) && all_finite(k7);
    double errval = 0.0;
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) {
        sc[i] = opts.abs_tol +
                opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                      E6 * k6[i] + E7 * k7[i]);
      }
      errval = detail::scaled_rms(err, sc);
      finite = std::isfinite(errval);
    }
    if (!finite) {
      // retry with a much smaller step before declaring a blow-up
      h *= 0.1;
      rejected = true;
      if (h < opts.h_min)
        throw FlowError(FlowError::Kind::non_finite,
                        "non-finite state at t=" + std::to_string(t));
      continue;
    }

    const double fac11 = std::pow(errval, expo1);
    if (errval <= 1.0) {
      // accept: store the dense polynomial for this step
      StepRecord rec;
      rec.t0 = t;
      rec.h = h;
      rec.rcont[0] = y;
      rec.rcont[1].resize(n);
      rec.rcont[2].resize(n);
      rec.rcont[3].resize(n);
      rec.rcont[4].resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = y1[i] - y[i];
        const double bspl = h * k1[i] - dy;
        rec.rcont[1][i] = dy;
        rec.rcont[2][i] = bspl;
        rec.rcont[3][i] = dy - h * k7[i] - bspl;
        rec.rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] +
                               D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
      }
      seg.steps.push_back(std::move(rec));
      t += h;
      y = y1;
      seg.nodes.emplace_back(t, y);
      seg.t_end = t;
      std::swap(k1, k7);

      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      if (rejected) hnew = std::min(hnew, h);
      rejected = false;
      facold = std::max(errval, 1e-4);
      h = hnew;

      if (after_step(seg)) return;
      if (last) return;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      rejected = true;
    }
  }
}

/// Integrate x' = f(x) from x0 over [0, T] and return the dense trajectory.
inline ContinuousSegment flow(const VectorFieldDef& f, const State& x0,
                              double T, const IntegratorOptions& opts = {}) {
  if (!(T > 0.0)) throw std::invalid_argument("flow: horizon must be > 0");
  if (static_cast<int>(x0.size()) != f.dimension)
    throw std::invalid_argument("flow: state dimension mismatch");
  ContinuousSegment seg;
  seg.t_start = 0.0;
  seg.t_end = 0.0;
  seg.dimension = f.dimension;
  seg.nodes.emplace_back(0.0, x0);
  integrate_segment(f, seg, T, opts,
                    [](const ContinuousSegment&) { return false; });
  return seg;
}

/// Divergence of f at x: analytic when provided, otherwise central
/// differences with a scale-aware default step.
inline double divergence_at(const VectorFieldDef& f, const State& x,
                            double h = 0.0) {
  if (f.divergence) {
    const double v = f.divergence(x);
    if (!std::isfinite(v))
      throw NumericalError("divergence_at: non-finite analytic value");
    return v;
  }
  const double hh = h > 0.0 ? h : std::max(1e-6, 1e-6 * norm(x));
  double sum = 0.0;
  State xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + hh;
    xm[i] = x[i] - hh;
    const State fp = f.eval(xp);
    const State fm = f.eval(xm);
    sum += (fp[i] - fm[i]) / (2.0 * hh);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  if (!std::isfinite(sum))
    throw NumericalError("divergence_at: non-finite finite-difference value");
  return sum;
}

/// Integral of the divergence along a stored segment, by trapezoid rule on
/// the dense interpolant with subdivision doubling until the total settles.
inline double divergence_integral(const VectorFieldDef& f,
                                  const ContinuousSegment& seg) {
  if (seg.steps.empty()) return 0.0;
  auto total_with = [&](int m) {
    double total = 0.0;
    for (const StepRecord& rec : seg.steps) {
      const double a = rec.t0;
      const double b = std::min(rec.t0 + rec.h, seg.t_end);
      if (b <= a) continue;
      const double dt = (b - a) / m;
      double acc =
          0.5 * (divergence_at(f, seg.eval_at(a)) +
                 divergence_at(f, seg.eval_at(b)));
      for (int j = 1; j < m; ++j)
        acc += divergence_at(f, seg.eval_at(a + j * dt));
      total += acc * dt;
    }
    return total;
  };
  double prev = total_with(1);
  for (int m = 2; m <= 256; m *= 2) {
    const double cur = total_with(m);
    if (std::fabs(cur - prev) <= 1e-9 * std::max(1.0, std::fabs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace hybridcycles
