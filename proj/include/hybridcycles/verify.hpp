#pragma once

// Self-checking battery behind `hybridcycles verify`: each criterion
// re-derives a published or closed-form number and compares against the
// library's output. Criteria are independent apart from a shared residual
// log that the final property suite audits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "limits.hpp"
#include "models.hpp"
#include "poincare.hpp"

namespace hybridcycles {

struct VerifyOptions {
  double rel_tol = 0.0;  // > 0 overrides every criterion's integrator rel_tol
  unsigned seed = 12345;
};

/// Running max of guard residuals |H(x_minus)| over every impact the
/// criteria produce directly.
struct ResidualLog {
  double max_residual = 0.0;
  long impacts = 0;

  void add(const HybridSystemDef& sys, const std::vector<ImpactEvent>& evs) {
    for (const ImpactEvent& ev : evs) {
      max_residual = std::max(max_residual, std::fabs(sys.guard.H(ev.x_minus)));
      ++impacts;
    }
  }
  void add(const HybridSystemDef& sys, const HybridTrajectory& traj) {
    add(sys, traj.impacts);
  }
};

struct VerifyContext {
  VerifyOptions opts;
  ResidualLog residuals;

  /// Hybrid options with the criterion's preferred tolerances, unless the
  /// user forced a global rel_tol (the deliberate-degradation mode).
  HybridOptions hybrid(double rel, double abs) const {
    HybridOptions h;
    if (opts.rel_tol > 0.0) {
      h.ode.rel_tol = opts.rel_tol;
      h.ode.abs_tol = 1e-2 * opts.rel_tol;
    } else {
      h.ode.rel_tol = rel;
      h.ode.abs_tol = abs;
    }
    return h;
  }
};

struct CriterionResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<void(VerifyContext&, CriterionResult&)> run;
};

namespace detail {

inline std::string num(double v, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

/// Accumulates measurements (always reported) and failed expectations.
struct Check {
  bool ok = true;
  std::string info;
  std::string fails;

  void note(const std::string& s) {
    if (!info.empty()) info += ", ";
    info += s;
  }
  bool require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!fails.empty()) fails += "; ";
      fails += what;
    }
    return cond;
  }
  bool close(const std::string& name, double got, double want, double tol) {
    return require(std::fabs(got - want) <= tol,
                   name + "=" + num(got, 10) + " not within " + num(tol, 3) +
                       " of " + num(want, 10));
  }
  std::string detail() const {
    if (ok) return info;
    if (info.empty()) return fails;
    return info + " | " + fails;
  }
};

/// Tight fixed point of the scale-reset oscillator's section map, used as
/// the anchor A of the affine reset family (B = -1.5 A recovers the scale
/// model at slope -1.5).
inline double vdp_anchor(const VerifyContext& ctx) {
  Model m = make_vdp_scale();
  return find_fixed_point(m.sys, m.chart, m.s_guess, ctx.hybrid(1e-10, 1e-12),
                          1e-12);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// -- criterion bodies --------------------------------------------------------

inline void crit_vdp_steady(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  Model m = make_vdp_scale();
  const HybridOptions opts = ctx.hybrid(1e-9, 1e-11);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ImpactEvent> evs = impact_sequence(m.sys, m.x0, 120, opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  ctx.residuals.add(m.sys, evs);
  c.require(evs.size() >= 100,
            "only " + std::to_string(evs.size()) + " returns");
  if (!evs.empty()) {
    const ImpactEvent& last = evs.back();
    c.note("y_minus=" + num(last.x_minus[1], 8));
    c.note("y_plus=" + num(last.x_plus[1], 8));
    c.close("y_minus", last.x_minus[1], -1.0498, 5e-3);
    c.close("y_plus", last.x_plus[1], 1.5747, 5e-3);
  }
  c.note(std::to_string(evs.size()) + " impacts in " + num(secs, 3) + "s");
  c.require(secs < 10.0, "run took " + num(secs, 3) + "s (limit 10s)");
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_vdp_derivative(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  Model m = make_vdp_scale();
  const HybridOptions opts = ctx.hybrid(1e-10, 1e-12);
  const double s = find_fixed_point(m.sys, m.chart, m.s_guess, opts, 1e-12);
  const StabilityReport rep = derivative_planar(m.sys, m.chart, s, opts);
  const double fd = std::fabs(rep.fd_check);
  c.note("s*=" + num(s, 8));
  c.note("|P'|=" + num(rep.product, 8));
  c.note("fd=" + num(rep.fd_check, 8));
  c.close("|P'|", rep.product, 0.3338, 5e-3);
  const double rel = std::fabs(rep.product - fd) / fd;
  c.note("formula-vs-fd rel=" + num(rel, 3));
  c.require(rel < 1e-4, "formula vs FD relative error " + num(rel, 6));
  c.require(rep.verdict == "stable", "verdict " + rep.verdict);
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_vdp_linear_scaling(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const HybridOptions opts = ctx.hybrid(1e-10, 1e-12);
  const double A = vdp_anchor(ctx);
  const double B = -1.5 * A;
  for (double slope : {1.0, 2.0, 3.0, 4.0}) {
    Model lm = make_vdp_linear(1.0, slope, A, B);
    const double s = find_fixed_point(lm.sys, lm.chart, A, opts, 1e-12);
    const StabilityReport rep = derivative_planar(lm.sys, lm.chart, s, opts);
    const double want = 0.2225 * slope;
    c.note("m=" + num(slope, 2) + ": " + num(rep.product, 6));
    c.require(std::fabs(rep.product - want) <= 0.02 * want,
              "m=" + num(slope, 2) + " product " + num(rep.product, 8) +
                  " vs " + num(want, 6) + " +-2%");
  }
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_vdp_onset(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const HybridOptions opts = ctx.hybrid(1e-9, 1e-11);
  const double A = vdp_anchor(ctx);
  const double B = -1.5 * A;
  const double base = 1.5747;

  enum RowType { near_fp, single_shift, two_cycle };
  struct Row {
    double m;
    RowType type;
    double lo, hi;  // expected tail value(s)
  };
  const std::vector<Row> rows = {
      {-4.6, single_shift, 1.6034, 0.0},  {-4.55, single_shift, 1.5898, 0.0},
      {-4.5, single_shift, 1.5768, 0.0},  {-4.45, near_fp, base, 0.0},
      {-4.4, near_fp, base, 0.0},         {4.4, near_fp, base, 0.0},
      {4.45, near_fp, base, 0.0},         {4.5, two_cycle, 1.5059, 1.6475},
      {4.55, two_cycle, 1.3758, 1.8119},  {4.6, two_cycle, 1.3091, 1.9132},
  };

  for (const Row& row : rows) {
    Model lm = make_vdp_linear(1.0, row.m, A, B);
    const std::vector<ImpactEvent> evs =
        impact_sequence(lm.sys, {1.0, 3.0}, 1000, opts);
    ctx.residuals.add(lm.sys, evs);
    const std::string tag = "m=" + num(row.m, 4);
    if (!c.require(evs.size() == 1000, tag + " stopped early")) continue;

    std::vector<double> even, odd, tail;
    for (std::size_t i = 900; i < 1000; ++i) {
      const double yp = evs[i].x_plus[1];
      tail.push_back(yp);
      (i % 2 == 0 ? even : odd).push_back(yp);
    }
    const double me = mean(even), mo = mean(odd), ma = mean(tail);
    const double split = std::fabs(me - mo);

    switch (row.type) {
      case near_fp:
        c.note(tag + ": " + num(ma, 6));
        c.close(tag + " tail", ma, base, 1e-2);
        break;
      case single_shift:
        c.note(tag + ": " + num(ma, 6));
        c.close(tag + " tail", ma, row.lo, 1.5e-2);
        if (std::fabs(row.lo - base) > 2e-2)
          c.require(std::fabs(ma - base) > 2e-2,
                    tag + " tail " + num(ma, 8) + " fails to leave " +
                        num(base, 6) + " by 2e-2");
        break;
      case two_cycle: {
        const double lo = std::min(me, mo), hi = std::max(me, mo);
        c.note(tag + ": (" + num(lo, 6) + ", " + num(hi, 6) + ")");
        c.require(split > 2e-2, tag + " parity split " + num(split, 4) +
                                    " too small for a two-impact cycle");
        c.close(tag + " lower", lo, row.lo, 1.5e-2);
        c.close(tag + " upper", hi, row.hi, 1.5e-2);
        c.require(std::fabs(lo - base) > 2e-2 && std::fabs(hi - base) > 2e-2,
                  tag + " pair fails to leave " + num(base, 6) + " by 2e-2");
        break;
      }
    }
  }
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_polar_oracle(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const HybridOptions opts = ctx.hybrid(1e-12, 1e-14);
  std::mt19937 rng(ctx.opts.seed);
  std::uniform_real_distribution<double> span(0.3, 2.5);   // alpha - gamma
  std::uniform_real_distribution<double> off(0.0, 0.8);    // gamma
  std::uniform_real_distribution<double> lam(0.06, 0.94);  // beta e^{gamma-alpha}
  double worst_fp = 0.0, worst_dp = 0.0, worst_factor = 0.0;
  for (int k = 0; k < 20; ++k) {
    PolarParams p;
    const double d = span(rng);
    p.gamma = off(rng);
    p.alpha = p.gamma + d;
    p.beta = lam(rng) * std::exp(d);
    Model m = make_polar(p);

    const double want_s = polar_fixed_radius(p);
    const double want_dp = polar_derivative(p);
    const double s = find_fixed_point(m.sys, m.chart, m.s_guess, opts, 1e-12);
    worst_fp = std::max(worst_fp, std::fabs(s - want_s));
    c.require(std::fabs(s - want_s) <= 1e-8,
              "sample " + std::to_string(k) + " fixed point " + num(s, 12) +
                  " vs " + num(want_s, 12));

    const StabilityReport rep = derivative_planar(m.sys, m.chart, s, opts);
    worst_dp = std::max(worst_dp, std::fabs(rep.product - want_dp));
    c.require(std::fabs(rep.product - want_dp) <= 1e-6,
              "sample " + std::to_string(k) + " derivative " +
                  num(rep.product, 10) + " vs " + num(want_dp, 10));

    const double ef = std::exp(p.gamma - p.alpha);
    const double fe = std::fabs(rep.reset_derivative - p.beta);
    const double ge = std::fabs(rep.geometric_ratio - 1.0);
    const double de = std::fabs(rep.divergence_factor - ef);
    worst_factor = std::max({worst_factor, fe, ge, de});
    c.require(fe <= 1e-6 && ge <= 1e-6 && de <= 1e-6,
              "sample " + std::to_string(k) + " factors (" +
                  num(rep.reset_derivative, 8) + ", " +
                  num(rep.geometric_ratio, 8) + ", " +
                  num(rep.divergence_factor, 8) + ") vs (" + num(p.beta, 8) +
                  ", 1, " + num(ef, 8) + ")");
  }
  c.note("20 samples");
  c.note("worst fixed-point err=" + num(worst_fp, 3));
  c.note("worst derivative err=" + num(worst_dp, 3));
  c.note("worst factor err=" + num(worst_factor, 3));
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_flow_determinant(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const HybridOptions hopts = ctx.hybrid(1e-12, 1e-14);
  const IntegratorOptions io = hopts.ode;

  auto check_field = [&](const std::string& name, const VectorFieldDef& f,
                         const State& x0, double T) {
    const ContinuousSegment seg = flow(f, x0, T, io);
    const double D = divergence_integral(f, seg);
    const double h = 1e-6;
    std::vector<State> cols;
    for (std::size_t j = 0; j < x0.size(); ++j) {
      State xp = x0, xm = x0;
      xp[j] += h;
      xm[j] -= h;
      const State ep = flow(f, xp, T, io).end_state();
      const State em = flow(f, xm, T, io).end_state();
      State col(x0.size());
      for (std::size_t i = 0; i < x0.size(); ++i)
        col[i] = (ep[i] - em[i]) / (2.0 * h);
      cols.push_back(col);
    }
    const double det = det_columns(cols);
    const double rel = std::fabs(det - std::exp(D)) / std::exp(D);
    c.note(name + ": det=" + num(det, 8) + " exp(int div)=" +
           num(std::exp(D), 8) + " rel=" + num(rel, 3));
    c.require(rel < 1e-4, name + " relative error " + num(rel, 6));
  };

  check_field("flat", make_polar().sys.field, {1.7, 0.3}, 1.2);
  check_field("cartesian", make_polar_cartesian().sys.field,
              {1.3 * std::cos(0.4), 1.3 * std::sin(0.4)}, 1.5);
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_continuous_section(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const VectorFieldDef f = vdp_field(1.0);
  HybridOptions opts = ctx.hybrid(1e-12, 1e-14);

  // park on the attracting orbit, then cut a section normal to the flow
  const State xc = flow(f, {1.0, 3.0}, 200.0, opts.ode).end_state();
  const State fc = f.eval(xc);
  const double fn = norm(fc);
  const State fhat{fc[0] / fn, fc[1] / fn};
  const State nhat{-fhat[1], fhat[0]};

  GuardDef section;
  section.H = [xc, fhat](const State& x) {
    return (x[0] - xc[0]) * fhat[0] + (x[1] - xc[1]) * fhat[1];
  };
  section.grad_H = [fhat](const State&) { return fhat; };
  section.direction = CrossingDirection::neg_to_pos;

  const SectionReturn base = continuous_section_return(f, section, xc, opts);
  const double formula = std::exp(divergence_integral(f, base.segment));
  c.note("period=" + num(base.tau, 8));
  c.note("exp(int div)=" + num(formula, 6));

  auto ret = [&](double s) {
    const State x{xc[0] + s * nhat[0], xc[1] + s * nhat[1]};
    const SectionReturn r = continuous_section_return(f, section, x, opts);
    return (r.x_out[0] - xc[0]) * nhat[0] + (r.x_out[1] - xc[1]) * nhat[1];
  };
  auto central = [&](double h) { return (ret(h) - ret(-h)) / (2.0 * h); };
  const double h = 3e-4;
  const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  const double rel = std::fabs(formula - fd) / std::fabs(fd);
  c.note("fd=" + num(fd, 6));
  c.note("rel=" + num(rel, 3));
  c.require(rel < 1e-3, "formula vs return-map FD relative error " + num(rel, 6));
  c.require(base.tau > 6.0 && base.tau < 7.5,
            "return time " + num(base.tau, 6) + " is not one orbit period");
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_rimless_wheel(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const RimlessWheelParams p0;  // pi/10, pi/30, 9.8
  const HybridOptions opts = ctx.hybrid(1e-10, 1e-12);

  const ExistenceInequality iq = existence_inequality(p0);
  c.note("lhs=" + num(iq.lhs, 6));
  c.note("rhs=" + num(iq.rhs, 6));
  c.require(iq.holds, "gait-existence inequality fails at the base point");
  c.close("lhs", iq.lhs, 0.0646, 1e-4);
  c.close("rhs", iq.rhs, 0.011534, 1e-4);

  const WheelGaitResult gait = classify_wheel_gait(p0, opts);
  c.require(gait.cycle_found, "no period-1 gait found: " + gait.note);
  const double v2 = wheel_fixed_speed_sq(p0);
  if (gait.cycle_found) {
    c.note("gait speed=" + num(gait.speed, 8));
    c.close("gait speed^2", gait.speed * gait.speed, v2, 1e-6);
  }

  Model m = make_rimless_wheel(p0);
  const double s = find_fixed_point(m.sys, m.chart, m.s_guess, opts, 1e-12);
  const StabilityReport rep = derivative_planar(m.sys, m.chart, s, opts);
  const double c2 = std::cos(2.0 * p0.delta);
  c.note("|P'|=" + num(rep.product, 8));
  c.require(rep.product < 1.0, "|P'| not < 1");
  c.close("|P'| vs cos^2(2 delta)", rep.product, c2 * c2, 1e-6);
  const double fd = std::fabs(rep.fd_check);
  c.require(std::fabs(rep.product - fd) / fd < 1e-4,
            "formula vs FD relative error " +
                num(std::fabs(rep.product - fd) / fd, 6));

  // one-step oracle from the pendulum energy integral
  std::mt19937 rng(ctx.opts.seed + 8);
  std::uniform_real_distribution<double> uv(v2, 3.0 * v2);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double v2k = uv(rng);
    const State pre{-p0.delta - p0.alpha, -std::sqrt(v2k)};
    const State post = m.sys.reset.delta(pre);
    const TimeToImpact tti = time_to_impact(m.sys, post, opts);
    ctx.residuals.add(m.sys, tti.excursion);
    const double got = tti.x_out[1] * tti.x_out[1];
    const double want = wheel_step_speed_sq(p0, v2k);
    worst = std::max(worst, std::fabs(got - want));
    c.require(std::fabs(got - want) <= 1e-8,
              "step oracle at v^2=" + num(v2k, 6) + ": " + num(got, 12) +
                  " vs " + num(want, 12));
  }
  c.note("step-oracle worst err=" + num(worst, 3));

  // random (delta, alpha) cells: the inequality is sufficient, not necessary
  std::mt19937 rng2(ctx.opts.seed + 88);
  std::uniform_real_distribution<double> ud(0.15, 0.77);
  int flagged = 0, tolerated = 0, banded = 0;
  for (int k = 0; k < 20; ++k) {
    RimlessWheelParams pc;
    pc.delta = ud(rng2);
    std::uniform_real_distribution<double> ua(0.02, pc.delta - 0.02);
    pc.alpha = ua(rng2);
    const ExistenceInequality cell = existence_inequality(pc);
    if (std::fabs(cell.lhs - cell.rhs) < 0.002) {
      ++banded;
      continue;
    }
    const WheelGaitResult gc = classify_wheel_gait(pc, ctx.hybrid(1e-9, 1e-11));
    if (cell.holds) {
      ++flagged;
      c.require(gc.cycle_found, "flag-true cell (delta=" + num(pc.delta, 4) +
                                    ", alpha=" + num(pc.alpha, 4) +
                                    ") found no gait: " + gc.note);
      if (gc.cycle_found)
        c.require(gc.product < 1.0, "flag-true cell (delta=" +
                                        num(pc.delta, 4) + ") not stable");
    } else if (gc.cycle_found) {
      ++tolerated;  // sufficiency only; simulation may still find a gait
    }
  }
  c.note(std::to_string(flagged) + " flag-true cells verified");
  c.note(std::to_string(tolerated) + " flag-false cells with a gait");
  c.note(std::to_string(banded) + " boundary-band cells skipped");
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_one_dimensional(VerifyContext& ctx, CriterionResult& out) {
  (void)ctx;
  Check c;

  // sawtooth: unit drift, one impact point
  HybridSystem1D s1;
  s1.f = [](double) { return 1.0; };
  s1.guard_points = {1.0};
  s1.delta = [](double) { return 0.0; };
  s1.r_lo = -0.5;
  s1.r_hi = 1.2;
  s1.fixed_points = std::vector<double>{};
  const CycleResult r1 = hybrid_1d_run(s1, 0.0);
  c.require(r1.kind == CycleResult::Kind::cycle && r1.period == 1,
            "sawtooth: " + kind_label(r1) + " (" + r1.note + ")");
  c.close("sawtooth period time", r1.period_time, 1.0, 1e-9);
  c.require(r1.transient_length <= 1, "sawtooth transient exceeds pigeonhole");

  // two impact points visited alternately
  HybridSystem1D s2;
  s2.f = [](double) { return 1.0; };
  s2.guard_points = {1.0, 2.0};
  s2.delta = [](double x) { return x < 1.5 ? 1.5 : 0.0; };
  s2.r_lo = -0.2;
  s2.r_hi = 2.2;
  s2.fixed_points = std::vector<double>{};
  const CycleResult r2 = hybrid_1d_run(s2, 0.0);
  c.require(r2.kind == CycleResult::Kind::cycle && r2.period == 2,
            "two-point loop: " + kind_label(r2) + " (" + r2.note + ")");
  if (r2.orbit.size() == 2) {
    c.close("loop orbit[0]", r2.orbit[0], 1.0, 1e-9);
    c.close("loop orbit[1]", r2.orbit[1], 2.0, 1e-9);
  } else {
    c.require(false, "loop orbit has " + std::to_string(r2.orbit.size()) +
                         " members");
  }
  c.close("loop period time", r2.period_time, 1.5, 1e-9);
  c.require(r2.transient_length <= 2, "loop transient exceeds pigeonhole");
  if (std::isfinite(r2.min_impact_gap_time) && std::isfinite(r2.eta))
    c.require(r2.min_impact_gap_time >= r2.eta / r2.xi - 1e-9,
              "loop min gap " + num(r2.min_impact_gap_time, 8) +
                  " below eta/xi bound " + num(r2.eta / r2.xi, 8));

  // saturating drift toward an outside equilibrium: leg time ln 2
  HybridSystem1D s3;
  s3.f = [](double x) { return 2.0 - x; };
  s3.guard_points = {1.0};
  s3.delta = [](double) { return 0.0; };
  s3.r_lo = -0.2;
  s3.r_hi = 1.5;
  s3.fixed_points = std::vector<double>{};
  const CycleResult r3 = hybrid_1d_run(s3, 0.0);
  c.require(r3.kind == CycleResult::Kind::cycle && r3.period == 1,
            "saturating drift: " + kind_label(r3) + " (" + r3.note + ")");
  c.close("saturating leg time", r3.period_time, std::log(2.0), 1e-9);
  c.note("leg times (1, 1.5, ln2) reproduced");

  // exhaustive finite-set check against an independent oracle
  long runs = 0;
  for (int n = 1; n <= 4 && c.ok; ++n) {
    FiniteImpactSet set;
    for (int i = 0; i < n; ++i) set.points.push_back(1.0 + i);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= n;
    for (long code = 0; code < total && c.ok; ++code) {
      std::vector<int> img(n);
      long rest = code;
      for (int i = 0; i < n; ++i) {
        img[i] = static_cast<int>(rest % n);
        rest /= n;
      }
      auto step = [&](int i) { return img[i]; };
      auto M = [&](double s) {
        const int i = static_cast<int>(s - 0.5);  // members are 1..n
        return set.points[img[i]];
      };
      for (int start = 0; start < n && c.ok; ++start) {
        const CycleResult got = detect_cycle_finite(set, M, set.points[start]);
        ++runs;

        // oracle: after n steps the index is inside the cycle; walk it
        int p = start;
        for (int i = 0; i < n; ++i) p = step(p);
        int period = 1;
        for (int q = step(p); q != p; q = step(q)) ++period;
        std::vector<bool> in_cycle(n, false);
        int q = p;
        for (int i = 0; i < period; ++i) {
          in_cycle[q] = true;
          q = step(q);
        }
        int transient = 0;
        int walk = start;
        while (!in_cycle[walk]) {
          walk = step(walk);
          ++transient;
        }
        std::vector<double> orbit;
        q = walk;
        for (int i = 0; i < period; ++i) {
          orbit.push_back(set.points[q]);
          q = step(q);
        }

        const std::string tag = "n=" + std::to_string(n) + " map#" +
                                std::to_string(code) + " start=" +
                                std::to_string(start);
        c.require(got.period == period && got.transient_length == transient,
                  tag + ": got period " + std::to_string(got.period) +
                      "/transient " + std::to_string(got.transient_length) +
                      ", oracle " + std::to_string(period) + "/" +
                      std::to_string(transient));
        c.require(got.orbit == orbit, tag + ": orbit mismatch");
        const auto want_kind = period == 1 ? CycleResult::Kind::fixed_point
                                           : CycleResult::Kind::cycle;
        c.require(got.kind == want_kind, tag + ": kind " + kind_label(got));
        c.require(got.iterations <= n + period,
                  tag + ": " + std::to_string(got.iterations) +
                      " iterations exceed pigeonhole bound " +
                      std::to_string(n + period));
      }
    }
  }
  c.note(std::to_string(runs) + " finite-map runs vs oracle");
  out.pass = c.ok;
  out.detail = c.detail();
}

inline void crit_property_suites(VerifyContext& ctx, CriterionResult& out) {
  Check c;
  const HybridOptions opts = ctx.hybrid(1e-10, 1e-12);

  // residual battery over every registry model that produces impacts
  {
    Model m = make_vdp_scale();
    ctx.residuals.add(m.sys, impact_sequence(m.sys, m.x0, 150, opts));
  }
  {
    Model m = make_polar_cartesian();
    ctx.residuals.add(m.sys, impact_sequence(m.sys, m.x0, 30, opts));
  }
  {
    const RimlessWheelParams p0;
    Model m = make_rimless_wheel(p0);
    const double v = std::sqrt(wheel_fixed_speed_sq(p0));
    const State start{p0.delta - p0.alpha, -std::cos(2.0 * p0.delta) * v};
    ctx.residuals.add(m.sys, impact_sequence(m.sys, start, 25, opts));
  }
  {
    Model m = make_annulus();
    ctx.residuals.add(m.sys, impact_sequence(m.sys, m.x0, 40, opts));
  }
  {
    Model m = make_logistic_line();
    ctx.residuals.add(m.sys, impact_sequence(m.sys, m.x0, 30, opts));
  }
  c.note(std::to_string(ctx.residuals.impacts) + " impacts audited");
  c.note("max |H(x-)|=" + num(ctx.residuals.max_residual, 3));
  c.require(ctx.residuals.max_residual <= 1e-9,
            "guard residual " + num(ctx.residuals.max_residual, 6) +
                " exceeds 1e-9");

  // omega-invariance of every cycle detected here
  {
    Model m = make_vdp_scale();
    const OmegaEstimate est =
        omega_estimate(m.sys, m.x0, 300.0, 60.0, opts, &m.chart);
    c.require(est.result.kind == CycleResult::Kind::cycle &&
                  est.result.period == 1,
              "vdp omega: " + kind_label(est.result));
    for (double s : est.result.orbit) {
      const double err = std::fabs(return_map_chart(m.sys, m.chart, s, opts) - s);
      c.require(err <= 1e-6, "vdp omega invariance err " + num(err, 3));
    }
  }
  {
    Model m = make_polar_cartesian();
    const OmegaEstimate est =
        omega_estimate(m.sys, m.x0, 40.0, 25.0, opts, &m.chart);
    c.require(est.result.kind == CycleResult::Kind::cycle &&
                  est.result.period == 1,
              "polar omega: " + kind_label(est.result));
    for (double s : est.result.orbit) {
      const double err = std::fabs(return_map_chart(m.sys, m.chart, s, opts) - s);
      c.require(err <= 1e-6, "polar omega invariance err " + num(err, 3));
      c.close("polar omega coordinate", s, polar_fixed_radius({}), 1e-6);
    }
  }
  {
    // two-impact cycle of the affine-reset family at slope 4.5
    const double A = vdp_anchor(ctx);
    const double B = -1.5 * A;
    Model lm = make_vdp_linear(1.0, 4.5, A, B);
    auto P = [&](double s) {
      return return_map_chart(lm.sys, lm.chart, s, opts);
    };
    auto g = [&](double s) { return P(P(s)) - s; };
    double a = A + (1.5059 - B) / 4.5;  // seed from the measured pair
    double b = a + 1e-4, ga = g(a), gb = g(b);
    for (int it = 0; it < 60 && std::fabs(gb) > 1e-11; ++it) {
      const double step = gb * (b - a) / (gb - ga);
      a = b;
      ga = gb;
      b -= step;
      gb = g(b);
    }
    c.require(std::fabs(gb) <= 1e-9, "two-impact cycle polish stalled");
    const double s1 = b, s2 = P(s1);
    const double inv = std::fabs(P(s2) - s1);
    c.note("two-impact cycle (" + num(s1, 8) + ", " + num(s2, 8) + ")");
    c.require(inv <= 1e-6, "two-impact invariance err " + num(inv, 3));
    const StabilityReport rep =
        derivative_multi(lm.sys, lm.chart, {s1, s2}, opts);
    c.note("|(P^2)'|=" + num(rep.product, 6));
    c.require(rep.product < 1.0, "two-impact cycle not attracting");
    const double fd = std::fabs(rep.fd_check);
    c.require(std::fabs(rep.product - fd) / fd <= 1e-3,
              "two-impact formula vs FD rel err " +
                  num(std::fabs(rep.product - fd) / fd, 4));
  }
  {
    // one-period return of the scalar-driver cycles, restated exactly
    HybridSystem1D s2;
    s2.f = [](double) { return 1.0; };
    s2.guard_points = {1.0, 2.0};
    s2.delta = [](double x) { return x < 1.5 ? 1.5 : 0.0; };
    s2.r_lo = -0.2;
    s2.r_hi = 2.2;
    s2.fixed_points = std::vector<double>{};
    const CycleResult first = hybrid_1d_run(s2, 0.0);
    if (c.require(first.kind == CycleResult::Kind::cycle && !first.orbit.empty(),
                  "scalar driver lost its cycle")) {
      const CycleResult again = hybrid_1d_run(s2, s2.delta(first.orbit.back()));
      c.require(again.transient_length == 0 && again.orbit == first.orbit,
                "scalar-driver cycle not invariant under one period");
    }
  }

  // monotone interval maps never classify beyond period two
  std::mt19937 rng(ctx.opts.seed + 10);
  std::uniform_real_distribution<double> ulo(-2.0, 1.0);
  std::uniform_real_distribution<double> uw(0.5, 3.0);
  std::uniform_real_distribution<double> ub(-0.6, 3.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  long fixed = 0, two = 0, undecided = 0;
  for (int k = 0; k < 1000; ++k) {
    const double lo = ulo(rng);
    const double hi = lo + uw(rng);
    const double bcoef = ub(rng);
    const bool increasing = k % 2 == 0;
    DiscreteMapDef mdef;
    mdef.lo = lo;
    mdef.hi = hi;
    mdef.P = [=](double x) {
      const double u = (x - lo) / (hi - lo);
      const double smooth = (u + bcoef * u * u * (3.0 - 2.0 * u)) / (1.0 + bcoef);
      return lo + (hi - lo) * (increasing ? smooth : 1.0 - smooth);
    };
    const double x0 = lo + (hi - lo) * u01(rng);
    const CycleResult res = classify_interval_map(mdef, x0, 20000);
    c.require(res.period <= 2, "map " + std::to_string(k) +
                                   " reported period " +
                                   std::to_string(res.period));
    c.require(!res.injectivity_violation,
              "map " + std::to_string(k) + " flagged as non-monotone");
    if (increasing)
      c.require(res.kind != CycleResult::Kind::cycle,
                "increasing map " + std::to_string(k) +
                    " reported a two-point cycle");
    switch (res.kind) {
      case CycleResult::Kind::fixed_point: ++fixed; break;
      case CycleResult::Kind::cycle: ++two; break;
      default: ++undecided; break;
    }
  }
  c.note("1000 monotone maps: " + std::to_string(fixed) + " fixed, " +
         std::to_string(two) + " period-2, " + std::to_string(undecided) +
         " undecided");
  out.pass = c.ok;
  out.detail = c.detail();
}

}  // namespace detail

inline std::vector<Criterion> acceptance_criteria() {
  return {
      {"vdp-steady-impacts", "Scale-reset oscillator steady impact values",
       detail::crit_vdp_steady},
      {"vdp-derivative", "Return-map derivative, formula vs finite differences",
       detail::crit_vdp_derivative},
      {"vdp-linear-scaling", "Derivative scales linearly with the reset slope",
       detail::crit_vdp_linear_scaling},
      {"vdp-onset", "Instability onset and two-impact cycles of the affine reset",
       detail::crit_vdp_onset},
      {"polar-analytic-oracle", "Radial model against its closed forms",
       detail::crit_polar_oracle},
      {"flow-jacobian-determinant", "Flow Jacobian determinant vs divergence integral",
       detail::crit_flow_determinant},
      {"continuous-normal-section", "Reset-free return map vs divergence factor",
       detail::crit_continuous_section},
      {"rimless-wheel", "Downhill wheel gait: inequality, stability, step oracle",
       detail::crit_rimless_wheel},
      {"one-dimensional-cycles", "Scalar hybrid flows and finite impact maps",
       detail::crit_one_dimensional},
      {"property-suites", "Guard residuals, cycle invariance, monotone maps",
       detail::crit_property_suites},
  };
}

struct VerifySummary {
  std::vector<CriterionResult> results;
  bool all_passed = true;
  double seconds = 0.0;
};

/// Run (a filtered subset of) the acceptance criteria, streaming one
/// PASS/FAIL line per criterion.
inline VerifySummary run_acceptance(const VerifyOptions& vopts,
                                    std::ostream& os,
                                    const std::vector<std::string>& only = {}) {
  VerifyContext ctx;
  ctx.opts = vopts;
  VerifySummary sum;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Criterion& cr : acceptance_criteria()) {
    if (!only.empty()) {
      bool wanted = false;
      for (const std::string& id : only) wanted = wanted || id == cr.id;
      if (!wanted) continue;
    }
    CriterionResult res;
    res.id = cr.id;
    res.title = cr.title;
    const auto c0 = std::chrono::steady_clock::now();
    try {
      cr.run(ctx, res);
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail += std::string(res.detail.empty() ? "" : " | ") +
                    "exception: " + e.what();
    }
    res.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c0)
            .count();
    sum.all_passed = sum.all_passed && res.pass;
    os << (res.pass ? "PASS" : "FAIL") << "  " << res.id << "  ["
       << detail::num(res.seconds, 3) << "s]  " << res.detail << "\n";
    sum.results.push_back(std::move(res));
  }
  sum.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  os << (sum.all_passed ? "all criteria passed" : "CRITERIA FAILED") << " ("
     << sum.results.size() << " run, " << detail::num(sum.seconds, 3) << "s)\n";
  return sum;
}

}  // namespace hybridcycles
