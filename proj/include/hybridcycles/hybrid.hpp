#pragma once

// The hybrid flow engine: integrate the vector field until the guard fires,
// apply the reset, repeat. Impacts take the post-reset value, so the stored
// trajectory is right-continuous in time.

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chart.hpp"
#include "core.hpp"
#include "guard.hpp"
#include "ode.hpp"

namespace hybridcycles {

/// Reset map applied to guard states. `tangent_map` optionally pushes a
/// section tangent vector forward analytically; otherwise callers fall back
/// to finite differences along the section.
struct ResetDef {
  std::function<State(const State&)> delta;
  std::function<State(const State&, const State&)> tangent_map;

  void validate() const {
    if (!delta) throw std::invalid_argument("ResetDef: delta missing");
  }
};

struct HybridSystemDef {
  VectorFieldDef field;
  GuardDef guard;
  ResetDef reset;
  /// Known equilibria of the field; engaged-but-empty means "provably none
  /// in the working region", disengaged means "unknown".
  std::optional<std::vector<State>> fixed_points;
  std::function<bool(const State&)> domain_check;
  /// Optional closed-form flow (x0, t) -> x(t), used as a test oracle.
  std::function<State(const State&, double)> exact_flow;
  std::string name;

  void validate() const {
    field.validate();
    guard.validate();
    reset.validate();
    if (fixed_points) {
      for (const State& p : *fixed_points)
        if (norm(field.eval(p)) > 1e-10)
          throw std::invalid_argument(
              "HybridSystemDef: declared fixed point is not an equilibrium");
    }
  }
};

struct HybridOptions {
  IntegratorOptions ode;
  double t_tol = 1e-12;          // impact time refinement
  double H_tol = 1e-10;          // guard residual at accepted impacts
  long max_impacts = 100000;     // hard safety cap (Zeno suspicion)
  double min_impact_gap = 1e-9;  // consecutive-gap Zeno heuristic
  double fixed_point_radius = 1e-3;  // balls around declared equilibria
  double max_time = 1e6;         // horizon used by impact-count runs
  double return_horizon = 100.0; // horizon for single return-map excursions
};

struct ImpactEvent {
  double t = 0.0;
  State x_minus;
  State x_plus;
  double transversality_value = 0.0;
};

enum class Termination {
  time_elapsed,
  impact_budget,
  zeno_suspected,
  left_domain,
  blow_up
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::time_elapsed: return "time-elapsed";
    case Termination::impact_budget: return "impact-budget";
    case Termination::zeno_suspected: return "zeno-suspected";
    case Termination::left_domain: return "left-domain";
    case Termination::blow_up: return "blow-up";
  }
  return "?";
}

struct HybridTrajectory {
  std::vector<ContinuousSegment> segments;
  std::vector<ImpactEvent> impacts;
  double t_total = 0.0;
  Termination termination = Termination::time_elapsed;
  std::string termination_detail;

  const State& final_state() const {
    if (segments.empty()) throw std::logic_error("empty trajectory");
    return segments.back().end_state();
  }

  /// State at time t with the post-reset convention: at an impact time the
  /// later segment wins.
  State state_at(double t) const {
    if (segments.empty()) throw std::logic_error("empty trajectory");
    if (t < segments.front().t_start - 1e-12 || t > t_total + 1e-12)
      throw std::invalid_argument("state_at: time outside trajectory");
    std::size_t lo = 0, hi = segments.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (segments[mid].t_start <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return segments[lo].eval_at(std::clamp(t, segments[lo].t_start,
                                           segments[lo].t_end));
  }
};

/// Chained resets skip root refinement, so they need their own near-grazing
/// check; everything refined gets the equivalent warning inside
/// refine_crossing.
inline void warn_if_grazing(const HybridSystemDef& sys, const State& x,
                            double tv, double t) {
  const double scale = norm(sys.field.eval(x)) * norm(sys.guard.grad(x));
  if (std::fabs(tv) < 1e-6 * scale)
    log_warn("near-grazing impact at t=" + std::to_string(t) +
             " (|<grad H, f>| = " + std::to_string(std::fabs(tv)) + ")");
}

/// Run the hybrid flow from x0 for time T, or until `impact_budget` impacts
/// have been recorded (budget < 0 means unlimited). Blow-ups and domain
/// exits truncate the trajectory instead of throwing.
inline HybridTrajectory hybrid_flow(const HybridSystemDef& sys, const State& x0,
                                    double T, const HybridOptions& opts = {},
                                    long impact_budget = -1) {
  sys.validate();
  if (!(T > 0.0)) throw std::invalid_argument("hybrid_flow: horizon must be > 0");
  if (static_cast<int>(x0.size()) != sys.field.dimension)
    throw std::invalid_argument("hybrid_flow: state dimension mismatch");
  if (!all_finite(x0))
    throw std::invalid_argument("hybrid_flow: non-finite initial state");
  if (sys.domain_check && !sys.domain_check(x0))
    throw std::invalid_argument("hybrid_flow: initial state outside domain");

  HybridTrajectory traj;
  double t = 0.0;
  State x = x0;

  auto budget_reached = [&] {
    return impact_budget >= 0 &&
           static_cast<long>(traj.impacts.size()) >= impact_budget;
  };
  auto near_declared_fixed_point = [&](const State& p) {
    if (!sys.fixed_points) return false;
    for (const State& q : *sys.fixed_points)
      if (dist(p, q) <= opts.fixed_point_radius) return true;
    return false;
  };

  if (budget_reached()) {
    // zero-budget run: record the starting point only
    ContinuousSegment seg;
    seg.t_start = seg.t_end = t;
    seg.dimension = sys.field.dimension;
    seg.nodes.emplace_back(t, x);
    traj.segments.push_back(std::move(seg));
    traj.t_total = t;
    traj.termination = Termination::impact_budget;
    return traj;
  }

  while (true) {
    ContinuousSegment seg;
    seg.t_start = seg.t_end = t;
    seg.dimension = sys.field.dimension;
    seg.nodes.emplace_back(t, x);

    std::optional<CrossingBracket> hit;
    bool domain_exit = false;
    // sign carried across steps of this leg; a start inside the |H| <= H_tol
    // band counts as on S (matching the chained-reset notion above), so the
    // sign seeds only after the orbit leaves the band and the departure
    // itself can never fire, whatever rounding did to the start residual
    double H_sign = sys.guard.H(x);
    double sign_time = t;
    bool have_sign = std::fabs(H_sign) > opts.H_tol;

    auto after_step = [&](const ContinuousSegment& s) {
      const StepRecord& rec = s.steps.back();
      for (int j = 1; j <= 8; ++j) {
        const double tt = rec.t0 + rec.h * j / 8.0;
        const double Hv = sys.guard.H(dense_eval(rec, tt));
        if (Hv != 0.0) {
          if (have_sign) {
            if (H_sign * Hv < 0.0 && sys.guard.matches(H_sign, Hv)) {
              hit = CrossingBracket{sign_time, tt, H_sign, Hv};
              return true;
            }
          } else if (std::fabs(Hv) <= opts.H_tol) {
            continue;
          }
          sign_time = tt;
          H_sign = Hv;
          have_sign = true;
        }
      }
      if (sys.domain_check && !sys.domain_check(s.nodes.back().second)) {
        domain_exit = true;
        return true;
      }
      return false;
    };

    try {
      integrate_segment(sys.field, seg, T, opts.ode, after_step);
    } catch (const FlowError& e) {
      traj.segments.push_back(std::move(seg));
      traj.t_total = traj.segments.back().t_end;
      if (e.kind == FlowError::Kind::step_count) throw;
      traj.termination = Termination::blow_up;
      traj.termination_detail = e.what();
      return traj;
    }

    if (hit) {
      Crossing cr = refine_crossing(sys.field, sys.guard, seg, *hit,
                                    opts.t_tol, opts.H_tol);
      seg.truncate_at(cr.t, cr.x);
      traj.segments.push_back(std::move(seg));
      t = cr.t;

      State x_minus = cr.x;
      // refine_crossing has already flagged a near-grazing contact here
      const double tv = transversality(sys.field, sys.guard, x_minus);
      State x_plus = sys.reset.delta(x_minus);
      traj.impacts.push_back({t, x_minus, x_plus, tv});

      auto zeno_stop = [&](const std::string& why) {
        traj.t_total = t;
        traj.termination = Termination::zeno_suspected;
        traj.termination_detail = why;
      };

      if (static_cast<long>(traj.impacts.size()) > opts.max_impacts) {
        zeno_stop("impact count exceeded max_impacts");
        return traj;
      }
      if (traj.impacts.size() >= 3) {
        const std::size_t m = traj.impacts.size();
        const double g1 = traj.impacts[m - 1].t - traj.impacts[m - 2].t;
        const double g0 = traj.impacts[m - 2].t - traj.impacts[m - 3].t;
        if (g1 < opts.min_impact_gap && g0 < opts.min_impact_gap &&
            !near_declared_fixed_point(x_minus)) {
          zeno_stop("consecutive impact gaps below min_impact_gap");
          return traj;
        }
      }
      if (budget_reached()) {
        traj.t_total = t;
        traj.termination = Termination::impact_budget;
        return traj;
      }

      // a reset landing back on the guard re-fires at once when the flow at
      // the image moves H through zero in the triggering direction
      int chains = 0;
      while (std::fabs(sys.guard.H(x_plus)) <= opts.H_tol) {
        const double dHdt = transversality(sys.field, sys.guard, x_plus);
        const bool trigger =
            (sys.guard.direction == CrossingDirection::neg_to_pos &&
             dHdt > 0.0) ||
            (sys.guard.direction == CrossingDirection::pos_to_neg &&
             dHdt < 0.0) ||
            (sys.guard.direction == CrossingDirection::either && dHdt != 0.0);
        if (!trigger) break;
        if (++chains > 3) {
          zeno_stop("more than 3 chained resets at t=" + std::to_string(t));
          return traj;
        }
        warn_if_grazing(sys, x_plus, dHdt, t);
        State next = sys.reset.delta(x_plus);
        traj.impacts.push_back({t, x_plus, next, dHdt});
        x_plus = std::move(next);
        if (budget_reached()) {
          traj.t_total = t;
          traj.termination = Termination::impact_budget;
          return traj;
        }
      }

      x = x_plus;
      if (T - t <= 1e-14 * std::max(1.0, std::fabs(T))) {
        traj.t_total = t;
        traj.termination = Termination::time_elapsed;
        return traj;
      }
      continue;
    }

    traj.segments.push_back(std::move(seg));
    traj.t_total = traj.segments.back().t_end;
    if (domain_exit) {
      traj.termination = Termination::left_domain;
      traj.termination_detail = "domain check failed";
    } else {
      traj.termination = Termination::time_elapsed;
    }
    return traj;
  }
}

/// First n impact events from x0 (n = 0 gives an empty list).
inline std::vector<ImpactEvent> impact_sequence(const HybridSystemDef& sys,
                                                const State& x0, long n,
                                                const HybridOptions& opts = {}) {
  if (n < 0) throw std::invalid_argument("impact_sequence: n must be >= 0");
  if (n == 0) return {};
  const HybridTrajectory traj = hybrid_flow(sys, x0, opts.max_time, opts, n);
  return traj.impacts;
}

// ---------------------------------------------------------------------------
// Sampled structural checks

struct SectionSamplingSpec {
  SectionChart chart;
  double s_lo = 0.0, s_hi = 1.0;
  int count = 64;
  double eps_fixed = 1e-3;
  double transversality_tol = 1e-6;
  double grad_tol = 1e-10;
  double separation_tol = 1e-6;
  double H_tol = 1e-9;
};

struct HypothesisCheck {
  std::string name;
  bool checked = false;
  bool pass = false;
  double value = 0.0;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (c.checked && !c.pass) return false;
    return true;
  }
  const HypothesisCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Sample the section and the reset images and test the checkable structural
/// assumptions: nonvanishing guard gradient, reset images separated from the
/// guard (or departing without re-triggering), monotone image coordinate,
/// interval-like section, and flow transversality on both curves.
inline HypothesisReport check_hypotheses(const HybridSystemDef& sys,
                                         const SectionSamplingSpec& spec) {
  sys.validate();
  spec.chart.validate();
  if (spec.count < 3)
    throw std::invalid_argument("check_hypotheses: need at least 3 samples");
  HypothesisReport report;

  const int n = spec.count;
  std::vector<double> s(n);
  std::vector<State> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    s[i] = spec.s_lo + (spec.s_hi - spec.s_lo) * i / (n - 1);
    xs[i] = spec.chart.chart(s[i]);
    if (std::fabs(sys.guard.H(xs[i])) > spec.H_tol)
      throw std::invalid_argument(
          "check_hypotheses: chart leaves the guard surface");
    ys[i] = sys.reset.delta(xs[i]);
  }

  {  // guard gradient bounded away from zero on the sampled section
    HypothesisCheck c{"guard-gradient", true, false, 0.0, ""};
    double mn = std::numeric_limits<double>::infinity();
    for (const State& x : xs) mn = std::min(mn, norm(sys.guard.grad(x)));
    c.value = mn;
    c.pass = mn > spec.grad_tol;
    report.checks.push_back(std::move(c));
  }

  {  // flow transversal to the section, and to the image curve if planar
    HypothesisCheck c{"transversality", true, false, 0.0, ""};
    double mn = std::numeric_limits<double>::infinity();
    for (const State& x : xs) {
      const State fx = sys.field.eval(x);
      const State gx = sys.guard.grad(x);
      const double denom = norm(fx) * norm(gx);
      mn = std::min(mn, denom > 0.0 ? std::fabs(dot(gx, fx)) / denom : 0.0);
    }
    if (sys.field.dimension == 2) {
      for (int i = 1; i + 1 < n; ++i) {
        State tan(2);
        for (int k = 0; k < 2; ++k) tan[k] = ys[i + 1][k] - ys[i - 1][k];
        const double tl = norm(tan);
        if (tl == 0.0) continue;  // degenerate image curve; separation covers it
        const State fy = sys.field.eval(ys[i]);
        const double fl = norm(fy);
        if (fl == 0.0) {
          mn = 0.0;
          continue;
        }
        mn = std::min(mn, std::fabs(cross_z(tan, fy)) / (tl * fl));
      }
    }
    c.value = mn;
    c.pass = mn > spec.transversality_tol;
    report.checks.push_back(std::move(c));
  }

  {  // reset images keep clear of the guard, or depart it without re-firing
    HypothesisCheck c{"reset-separation", true, true, 0.0, ""};
    double min_sep = std::numeric_limits<double>::infinity();
    bool any_off = false;
    for (const State& y : ys) {
      if (std::fabs(sys.guard.H(y)) <= spec.H_tol) {
        const double dHdt = transversality(sys.field, sys.guard, y);
        const State fy = sys.field.eval(y);
        const State gy = sys.guard.grad(y);
        const bool transverse =
            std::fabs(dHdt) > spec.transversality_tol * norm(fy) * norm(gy);
        const bool retrigger =
            (sys.guard.direction == CrossingDirection::neg_to_pos &&
             dHdt > 0.0) ||
            (sys.guard.direction == CrossingDirection::pos_to_neg &&
             dHdt < 0.0) ||
            (sys.guard.direction == CrossingDirection::either && dHdt != 0.0);
        if (!transverse || retrigger) {
          c.pass = false;
          c.note = "on-guard reset image fails to depart cleanly";
        }
        continue;
      }
      // distance from an off-guard image to the sampled section, ignoring
      // images parked near a declared equilibrium
      bool near_fixed = false;
      if (sys.fixed_points)
        for (const State& q : *sys.fixed_points)
          if (dist(y, q) <= spec.eps_fixed) near_fixed = true;
      if (near_fixed) continue;
      any_off = true;
      for (const State& x : xs) min_sep = std::min(min_sep, dist(y, x));
    }
    if (any_off) {
      c.value = min_sep;
      if (min_sep < spec.separation_tol) {
        c.pass = false;
        c.note = "reset image approaches the guard";
      }
    }
    report.checks.push_back(std::move(c));
  }

  bool interval_ok = false;
  {  // the sampled section should look like an interval, not a closed curve
    HypothesisCheck c{"section-interval", true, false, 0.0, ""};
    const double chord = dist(xs.front(), xs.back());
    double scale = 0.0;
    for (int i = 0; i + 1 < n; ++i) scale += dist(xs[i], xs[i + 1]);
    c.value = chord;
    interval_ok = chord > 1e-6 * std::max(1.0, scale);
    c.pass = interval_ok;
    if (!interval_ok) c.note = "section endpoints coincide (closed curve)";
    report.checks.push_back(std::move(c));
  }

  {  // reset image coordinate monotone along the section direction
    HypothesisCheck c{"image-monotone", false, false, 0.0, ""};
    if (!interval_ok) {
      c.note = "skipped: no interval chart";
    } else {
      c.checked = true;
      State tan = spec.chart.tangent(0.5 * (spec.s_lo + spec.s_hi));
      const double tl = norm(tan);
      if (!(tl > 0.0))
        throw NumericalError("check_hypotheses: degenerate chart tangent");
      for (double& v : tan) v /= tl;
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) {
        State d(ys[i].size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = ys[i][k] - ys[0][k];
        p[i] = dot(d, tan);
      }
      double pscale = 0.0;
      for (double v : p) pscale = std::max(pscale, std::fabs(v));
      const double tol = 1e-12 * std::max(1.0, pscale);
      bool nondec = true, noninc = true;
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i + 1 < n; ++i) {
        const double d = p[i + 1] - p[i];
        if (d < -tol) nondec = false;
        if (d > tol) noninc = false;
        worst = std::min(worst, std::fabs(d));
      }
      c.pass = nondec || noninc;
      c.value = worst;
      if (!c.pass) c.note = "reset image coordinate is not monotone";
    }
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace hybridcycles
