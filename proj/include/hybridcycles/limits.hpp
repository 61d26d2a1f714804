#pragma once

// Limit-set machinery for one-dimensional reductions: classification of
// interval return maps, exact cycle detection over finite impact sets, a
// scalar hybrid-flow driver, and omega-limit estimation from trajectories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chart.hpp"
#include "core.hpp"
#include "guard.hpp"
#include "hybrid.hpp"
#include "ode.hpp"

namespace hybridcycles {

/// Scalar discrete map together with its working interval.
struct DiscreteMapDef {
  std::function<double(double)> P;
  double lo = 0.0;
  double hi = 1.0;

  void validate() const {
    if (!P) throw std::invalid_argument("DiscreteMapDef: map missing");
    if (!(lo < hi))
      throw std::invalid_argument("DiscreteMapDef: need lo < hi");
  }
};

/// Outcome of a limit-set computation. `orbit` holds one representative
/// cycle in visit order; the remaining scalars are diagnostics filled in by
/// whichever driver produced the result.
struct CycleResult {
  enum class Kind { fixed_point, cycle, divergent, undecided };

  Kind kind = Kind::undecided;
  int period = 0;
  std::vector<double> orbit;
  long transient_length = 0;
  long iterations = 0;
  bool injectivity_violation = false;
  bool dense_nonperiodic = false;
  double period_time = 0.0;  // continuous-time period, when one exists

  // scalar hybrid-flow diagnostics (NaN when not applicable)
  double eta = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  double min_impact_gap_time = std::numeric_limits<double>::quiet_NaN();
  double min_fixed_point_distance = std::numeric_limits<double>::quiet_NaN();
  bool separation_checked = false;

  std::string note;
};

inline std::string kind_label(const CycleResult& r) {
  switch (r.kind) {
    case CycleResult::Kind::fixed_point: return "fixed-point";
    case CycleResult::Kind::cycle:
      return "period-" + std::to_string(r.period) + " cycle";
    case CycleResult::Kind::divergent: return "divergent";
    case CycleResult::Kind::undecided: return "undecided";
  }
  return "?";
}

/// Iterate a continuous interval map and classify the tail as a fixed point
/// or a two-cycle. Injectivity (the hypothesis that forces this dichotomy)
/// is probed by sampled monotonicity and reported, not enforced.
inline CycleResult classify_interval_map(const DiscreteMapDef& m, double x0,
                                         long n_max = 100000,
                                         double tol = 1e-8) {
  m.validate();
  if (n_max < 1)
    throw std::invalid_argument("classify_interval_map: n_max must be >= 1");
  if (!(tol > 0.0))
    throw std::invalid_argument("classify_interval_map: tol must be > 0");
  if (x0 < m.lo || x0 > m.hi)
    throw std::invalid_argument("classify_interval_map: x0 outside domain");

  CycleResult res;

  {  // sampled self-map and monotonicity probes
    const int ns = 65;
    const double slack = 1e-9 * (m.hi - m.lo);
    double prev = 0.0;
    bool rose = false, fell = false;
    for (int i = 0; i < ns; ++i) {
      const double s = m.lo + (m.hi - m.lo) * i / (ns - 1);
      const double v = m.P(s);
      if (!std::isfinite(v))
        throw NumericalError("classify_interval_map: map value not finite");
      if (v < m.lo - slack || v > m.hi + slack)
        throw HypothesisError(
            "classify_interval_map: sampled image leaves the domain");
      if (i > 0) {
        if (v > prev + slack) rose = true;
        if (v < prev - slack) fell = true;
      }
      prev = v;
    }
    res.injectivity_violation = rose && fell;
  }

  double x1 = x0;
  double x2 = m.P(x1);
  int fp_streak = 0;
  int p2_streak = 0;
  double p2_gap_at_start = 0.0;
  const double escape = 1e12;

  for (long n = 1; n <= n_max; ++n) {
    const double x3 = m.P(x2);
    res.iterations = n;
    if (!std::isfinite(x3) || std::fabs(x3) > escape) {
      res.kind = CycleResult::Kind::divergent;
      res.note = "iterates blew up";
      return res;
    }

    if (std::fabs(x2 - x1) < tol) {
      ++fp_streak;
      p2_streak = 0;
    } else {
      fp_streak = 0;
      if (std::fabs(x3 - x1) < tol) {
        if (p2_streak == 0) p2_gap_at_start = std::fabs(x2 - x1);
        ++p2_streak;
      } else {
        p2_streak = 0;
      }
    }

    if (fp_streak >= 10) {
      res.kind = CycleResult::Kind::fixed_point;
      res.period = 1;
      res.orbit = {x2};
      res.transient_length = std::max<long>(0, n - fp_streak);
      return res;
    }
    if (p2_streak >= 10) {
      // a gap that kept shrinking over the streak is alternating
      // convergence to a fixed point, not a genuine two-cycle
      const double gap = std::fabs(x2 - x1);
      if (gap >= tol && gap > 0.8 * p2_gap_at_start) {
        res.kind = CycleResult::Kind::cycle;
        res.period = 2;
        res.orbit = {x1, x2};
        res.transient_length = std::max<long>(0, n - 2 * p2_streak);
        return res;
      }
      p2_streak = 0;
    }

    x1 = x2;
    x2 = x3;
  }

  res.note = "iteration budget exhausted";
  return res;
}

/// Uniformly discrete impact set on the line.
struct FiniteImpactSet {
  std::vector<double> points;  // strictly increasing

  void validate() const {
    if (points.empty())
      throw std::invalid_argument("FiniteImpactSet: no points");
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
      if (!(points[i] < points[i + 1]))
        throw std::invalid_argument(
            "FiniteImpactSet: points must be strictly increasing");
  }

  double separation() const {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
      sep = std::min(sep, points[i + 1] - points[i]);
    return sep;
  }

  /// Index of the member nearest to x; the snap distance must stay below
  /// half the set separation for the assignment to be meaningful.
  std::size_t snap(double x) const {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = std::fabs(x - points[i]);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    const double radius =
        points.size() > 1 ? 0.5 * separation()
                          : std::max(1e-6, 1e-6 * std::fabs(points[0]));
    if (bd >= radius)
      throw HypothesisError("FiniteImpactSet: value " + std::to_string(x) +
                            " does not snap to any member");
    return best;
  }
};

/// Iterate a self-map of a finite point set until a state repeats. The
/// pigeonhole argument bounds the work by |points| iterations of transient
/// plus one cycle, so the default budget never truncates a valid input.
inline CycleResult detect_cycle_finite(const FiniteImpactSet& set,
                                       const std::function<double(double)>& M,
                                       double s0, long n_max = 0) {
  set.validate();
  if (!M) throw std::invalid_argument("detect_cycle_finite: map missing");
  const long n = static_cast<long>(set.points.size());
  if (n_max <= 0) n_max = 2 * n + 2;

  CycleResult res;
  std::vector<long> first_seen(set.points.size(), -1);
  std::vector<std::size_t> path;

  std::size_t idx = set.snap(s0);
  for (long k = 0; k <= n_max; ++k) {
    if (first_seen[idx] >= 0) {
      res.kind = (k - first_seen[idx]) == 1 ? CycleResult::Kind::fixed_point
                                            : CycleResult::Kind::cycle;
      res.period = static_cast<int>(k - first_seen[idx]);
      res.transient_length = first_seen[idx];
      res.iterations = k;
      for (long j = first_seen[idx]; j < k; ++j)
        res.orbit.push_back(set.points[path[j]]);
      return res;
    }
    first_seen[idx] = k;
    path.push_back(idx);
    idx = set.snap(M(set.points[idx]));
  }
  res.note = "iteration budget exhausted";  // unreachable for n_max >= n+1
  return res;
}

/// Scalar hybrid system: a 1-D field, a finite guard set, a reset defined on
/// the guard points, and a forward-invariant working interval [r_lo, r_hi].
struct HybridSystem1D {
  std::function<double(double)> f;
  std::vector<double> guard_points;  // strictly increasing
  std::function<double(double)> delta;
  double r_lo = 0.0;
  double r_hi = 1.0;
  std::optional<std::vector<double>> fixed_points;  // known zeros of f

  void validate() const {
    if (!f) throw std::invalid_argument("HybridSystem1D: field missing");
    if (!delta) throw std::invalid_argument("HybridSystem1D: reset missing");
    if (!(r_lo < r_hi))
      throw std::invalid_argument("HybridSystem1D: need r_lo < r_hi");
    if (guard_points.empty())
      throw std::invalid_argument("HybridSystem1D: no guard points");
    for (std::size_t i = 0; i < guard_points.size(); ++i) {
      if (i + 1 < guard_points.size() &&
          !(guard_points[i] < guard_points[i + 1]))
        throw std::invalid_argument(
            "HybridSystem1D: guard points must be strictly increasing");
      if (guard_points[i] < r_lo || guard_points[i] > r_hi)
        throw std::invalid_argument(
            "HybridSystem1D: guard point outside the working interval");
    }
    if (fixed_points)
      for (double p : *fixed_points)
        if (std::fabs(f(p)) > 1e-10)
          throw std::invalid_argument(
              "HybridSystem1D: declared fixed point is not a zero of f");
  }
};

namespace detail {

/// Sampled sup of |f| over the working interval plus the marked points.
inline double sampled_speed_bound(const HybridSystem1D& sys) {
  double xi = 0.0;
  const int ns = 65;
  for (int i = 0; i < ns; ++i) {
    const double x = sys.r_lo + (sys.r_hi - sys.r_lo) * i / (ns - 1);
    xi = std::max(xi, std::fabs(sys.f(x)));
  }
  for (double g : sys.guard_points) {
    xi = std::max(xi, std::fabs(sys.f(g)));
    xi = std::max(xi, std::fabs(sys.f(sys.delta(g))));
  }
  return xi;
}

/// Min distance from any reset image to the guard set, skipping guard
/// points that sit next to a declared equilibrium (the quantifier in the
/// separation hypothesis excludes neighborhoods of fixed points).
inline double reset_separation(const HybridSystem1D& sys, double eps_fixed) {
  double eta = std::numeric_limits<double>::infinity();
  for (double g : sys.guard_points) {
    if (sys.fixed_points) {
      bool excluded = false;
      for (double p : *sys.fixed_points)
        if (std::fabs(g - p) <= eps_fixed) excluded = true;
      if (excluded) continue;
    }
    const double img = sys.delta(g);
    for (double h : sys.guard_points)
      eta = std::min(eta, std::fabs(img - h));
  }
  return eta;
}

}  // namespace detail

/// Run the scalar hybrid flow from x0: integrate monotone legs, refine the
/// earliest guard crossing, apply the reset, and detect the induced cycle on
/// impact points. Reports the separation diagnostics eta (reset images to
/// guard) and xi (sampled speed bound), whose ratio bounds inter-impact
/// times from below.
inline CycleResult hybrid_1d_run(const HybridSystem1D& sys, double x0,
                                 const HybridOptions& opts = {}) {
  sys.validate();
  if (x0 < sys.r_lo || x0 > sys.r_hi)
    throw std::invalid_argument("hybrid_1d_run: x0 outside working interval");

  CycleResult res;
  res.separation_checked = sys.fixed_points.has_value();
  if (!res.separation_checked)
    res.note = "separation hypothesis unchecked: no fixed points supplied";
  res.eta = detail::reset_separation(sys, opts.fixed_point_radius);
  res.xi = detail::sampled_speed_bound(sys);

  VectorFieldDef field;
  field.dimension = 1;
  field.eval = [&sys](const State& x) { return State{sys.f(x[0])}; };

  FiniteImpactSet gset{sys.guard_points};
  const double interval_slack = 1e-9 * (sys.r_hi - sys.r_lo);

  double t = 0.0;
  double x = x0;
  double min_fp_dist = std::numeric_limits<double>::infinity();
  auto track_fp_dist = [&](double v) {
    if (!sys.fixed_points) return;
    for (double p : *sys.fixed_points)
      min_fp_dist = std::min(min_fp_dist, std::fabs(v - p));
  };
  track_fp_dist(x);

  std::vector<long> first_seen(sys.guard_points.size(), -1);
  std::vector<std::size_t> hit_indices;
  std::vector<double> hit_times;

  auto finish_fp_note = [&] {
    if (sys.fixed_points)
      res.min_fixed_point_distance = min_fp_dist;
  };

  for (long k = 0;; ++k) {
    if (k >= opts.max_impacts) {
      res.note = "impact budget exhausted before a revisit";
      finish_fp_note();
      return res;
    }

    // one continuous leg; stop at the earliest guard-point crossing
    ContinuousSegment seg;
    seg.t_start = seg.t_end = t;
    seg.dimension = 1;
    seg.nodes.emplace_back(t, State{x});

    std::vector<double> sign_val(sys.guard_points.size());
    std::vector<double> sign_time(sys.guard_points.size(), t);
    std::vector<bool> have_sign(sys.guard_points.size());
    for (std::size_t i = 0; i < sys.guard_points.size(); ++i) {
      sign_val[i] = x - sys.guard_points[i];
      have_sign[i] = sign_val[i] != 0.0;
    }

    struct Candidate {
      std::size_t guard = 0;
      CrossingBracket bracket;
    };
    std::vector<Candidate> candidates;
    bool left_interval = false;

    auto after_step = [&](const ContinuousSegment& s) {
      const StepRecord& rec = s.steps.back();
      for (int j = 1; j <= 8; ++j) {
        const double tt = rec.t0 + rec.h * j / 8.0;
        const double v = dense_eval(rec, tt)[0];
        track_fp_dist(v);
        for (std::size_t i = 0; i < sys.guard_points.size(); ++i) {
          const double Hv = v - sys.guard_points[i];
          if (Hv == 0.0) continue;
          if (have_sign[i] && sign_val[i] * Hv < 0.0)
            candidates.push_back(
                {i, CrossingBracket{sign_time[i], tt, sign_val[i], Hv}});
          sign_time[i] = tt;
          sign_val[i] = Hv;
          have_sign[i] = true;
        }
        if (!candidates.empty()) return true;
        if (v < sys.r_lo - interval_slack || v > sys.r_hi + interval_slack) {
          left_interval = true;
          return true;
        }
      }
      return false;
    };

    try {
      integrate_segment(field, seg, t + opts.max_time, opts.ode, after_step);
    } catch (const FlowError& e) {
      res.kind = e.kind == FlowError::Kind::non_finite
                     ? CycleResult::Kind::divergent
                     : CycleResult::Kind::undecided;
      res.note = e.what();
      finish_fp_note();
      return res;
    }

    if (left_interval) {
      res.kind = CycleResult::Kind::divergent;
      res.note = "trajectory left the working interval";
      finish_fp_note();
      return res;
    }
    if (candidates.empty()) {
      res.kind = CycleResult::Kind::undecided;
      res.note = "no guard crossing within the time horizon";
      if (sys.fixed_points) {
        const double xe = seg.end_state()[0];
        for (double p : *sys.fixed_points)
          if (std::fabs(xe - p) <= opts.fixed_point_radius)
            res.note = "orbit approaches a fixed point of the field";
      }
      finish_fp_note();
      return res;
    }

    // earliest refined crossing wins when several points fire in one
    // subinterval
    double t_star = std::numeric_limits<double>::infinity();
    std::size_t g_idx = 0;
    for (const Candidate& c : candidates) {
      GuardDef gd;
      const double gp = sys.guard_points[c.guard];
      gd.H = [gp](const State& s) { return s[0] - gp; };
      const Crossing cr =
          refine_crossing(field, gd, seg, c.bracket, opts.t_tol, opts.H_tol);
      if (cr.t < t_star) {
        t_star = cr.t;
        g_idx = c.guard;
      }
    }

    t = t_star;
    hit_indices.push_back(g_idx);
    hit_times.push_back(t);
    track_fp_dist(sys.guard_points[g_idx]);

    // reset, with bounded chaining when an image lands on another guard
    // point exactly
    double x_plus = sys.delta(sys.guard_points[g_idx]);
    int chains = 0;
    while (true) {
      if (x_plus < sys.r_lo - interval_slack ||
          x_plus > sys.r_hi + interval_slack) {
        res.kind = CycleResult::Kind::divergent;
        res.note = "reset image left the working interval";
        finish_fp_note();
        return res;
      }
      bool on_guard = false;
      std::size_t j = 0;
      for (std::size_t i = 0; i < sys.guard_points.size(); ++i)
        if (std::fabs(x_plus - sys.guard_points[i]) <= opts.H_tol) {
          on_guard = true;
          j = i;
        }
      if (!on_guard) break;
      if (++chains > 3)
        throw HypothesisError(
            "hybrid_1d_run: reset images chain through guard points");
      hit_indices.push_back(j);
      hit_times.push_back(t);
      x_plus = sys.delta(sys.guard_points[j]);
    }
    x = x_plus;
    track_fp_dist(x);

    // the post-impact state depends only on the guard index, so a repeated
    // index closes the cycle exactly
    const long seen = first_seen[hit_indices.back()];
    const long kk = static_cast<long>(hit_indices.size()) - 1;
    if (seen >= 0) {
      res.period = static_cast<int>(kk - seen);
      res.kind = CycleResult::Kind::cycle;
      res.transient_length = seen;
      res.iterations = kk;
      for (long i = seen; i < kk; ++i)
        res.orbit.push_back(sys.guard_points[hit_indices[i]]);
      res.period_time = hit_times[kk] - hit_times[seen];
      double min_gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < hit_times.size(); ++i)
        if (hit_times[i] > hit_times[i - 1])
          min_gap = std::min(min_gap, hit_times[i] - hit_times[i - 1]);
      res.min_impact_gap_time = min_gap;
      finish_fp_note();
      return res;
    }
    first_seen[hit_indices.back()] = kk;
  }
}

/// Numerical omega-limit estimate: discard a transient, then collect the
/// post-impact states and section coordinates inside the sampling window
/// and look for a finite impact period.
struct OmegaEstimate {
  std::vector<State> cloud;            // post-impact representatives
  std::vector<double> section_coords;  // chart coordinates of x_minus
  std::vector<double> impact_times;
  CycleResult result;
};

inline OmegaEstimate omega_estimate(const HybridSystemDef& sys,
                                    const State& x0, double t_transient,
                                    double t_window,
                                    const HybridOptions& opts = {},
                                    const SectionChart* chart = nullptr,
                                    double tol = 1e-6) {
  if (!(t_transient >= 0.0) || !(t_window > 0.0))
    throw std::invalid_argument("omega_estimate: bad time window");
  OmegaEstimate est;

  HybridTrajectory traj =
      hybrid_flow(sys, x0, t_transient + t_window, opts);
  if (traj.termination == Termination::blow_up)
    throw NumericalError("omega_estimate: trajectory is unbounded (" +
                         traj.termination_detail + ")");
  if (traj.termination == Termination::left_domain)
    throw NumericalError("omega_estimate: trajectory left the model domain");

  if (traj.termination == Termination::zeno_suspected) {
    est.result.note = "impact accumulation: " + traj.termination_detail;
    for (const ImpactEvent& ev : traj.impacts)
      if (ev.t >= t_transient) est.cloud.push_back(ev.x_plus);
    return est;
  }

  std::vector<const ImpactEvent*> window;
  for (const ImpactEvent& ev : traj.impacts)
    if (ev.t >= t_transient) window.push_back(&ev);

  if (window.empty()) {
    // continuous tail: sample the last segment and test for an equilibrium
    const ContinuousSegment& seg = traj.segments.back();
    const double a = std::max(seg.t_start, traj.t_total - t_window);
    const int ns = 33;
    std::vector<State> samples;
    for (int i = 0; i < ns; ++i)
      samples.push_back(seg.eval_at(a + (traj.t_total - a) * i / (ns - 1)));
    double spread = 0.0;
    for (const State& s : samples) spread = std::max(spread, dist(s, samples.back()));
    est.cloud = {samples.back()};
    if (spread <= tol) {
      est.result.kind = CycleResult::Kind::fixed_point;
      est.result.period = 1;
      est.result.note = "no impacts; trajectory settles at an equilibrium";
    } else {
      est.result.note = "no impacts in the sampling window";
    }
    return est;
  }

  for (const ImpactEvent* ev : window) {
    est.impact_times.push_back(ev->t);
    if (chart) est.section_coords.push_back(chart->inv_chart(ev->x_minus));
  }
  const std::size_t n = window.size();

  // shortest shift under which the section sequence repeats
  auto periodic_with = [&](std::size_t p) {
    if (n < 2 * p + 2) return false;
    const std::size_t checks = std::min(n - p, std::max<std::size_t>(3 * p, 12));
    for (std::size_t i = n - checks; i < n; ++i) {
      const double d = chart ? std::fabs(est.section_coords[i] -
                                         est.section_coords[i - p])
                             : dist(window[i]->x_minus, window[i - p]->x_minus);
      if (d > tol) return false;
    }
    return true;
  };

  for (std::size_t p = 1; p <= 8; ++p) {
    if (!periodic_with(p)) continue;
    est.result.kind = CycleResult::Kind::cycle;
    est.result.period = static_cast<int>(p);
    for (std::size_t i = n - p; i < n; ++i) {
      est.cloud.push_back(window[i]->x_plus);
      if (chart) est.result.orbit.push_back(est.section_coords[i]);
    }
    double tsum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = p; i < n; ++i) {
      tsum += window[i]->t - window[i - p]->t;
      ++cnt;
    }
    est.result.period_time = tsum / static_cast<double>(cnt);
    est.result.iterations = static_cast<long>(n);
    return est;
  }

  // no finite period: distinguish a densely filled section from a slow
  // transient by counting distinct crossing clusters
  for (const ImpactEvent* ev : window) est.cloud.push_back(ev->x_plus);
  est.result.iterations = static_cast<long>(n);
  if (chart && n >= 16) {
    std::vector<double> sorted = est.section_coords;
    std::sort(sorted.begin(), sorted.end());
    std::size_t clusters = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] - sorted[i - 1] > tol) ++clusters;
    if (clusters * 2 >= n) {
      est.result.dense_nonperiodic = true;
      est.result.note = "crossings fill the section with no finite period";
      return est;
    }
  }
  est.result.note = "no finite impact period detected in the window";
  return est;
}

}  // namespace hybridcycles
