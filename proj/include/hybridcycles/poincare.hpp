#pragma once

// Return maps on guard sections: excursion solves, fixed-point search, the
// factored analytic derivative of the return map, its finite-difference
// cross-check, and the n-dimensional determinant bound.

#include <functional>
#include <string>
#include <vector>

#include "chart.hpp"
#include "core.hpp"
#include "guard.hpp"
#include "hybrid.hpp"
#include "ode.hpp"

namespace hybridcycles {

struct TimeToImpact {
  double tau = 0.0;
  State x_out;
  HybridTrajectory excursion;
};

/// First guard impact reached by flowing from y (y may lie on the guard; the
/// departure does not count). Throws when no impact occurs within
/// opts.return_horizon or the flow degenerates first.
inline TimeToImpact time_to_impact(const HybridSystemDef& sys, const State& y,
                                   const HybridOptions& opts = {}) {
  HybridTrajectory traj = hybrid_flow(sys, y, opts.return_horizon, opts, 1);
  if (traj.impacts.empty()) {
    std::string why = to_string(traj.termination);
    if (!traj.termination_detail.empty()) why += ": " + traj.termination_detail;
    throw NumericalError("time_to_impact: no impact within horizon (" + why +
                         ")");
  }
  TimeToImpact out;
  out.tau = traj.impacts.front().t;
  out.x_out = traj.impacts.front().x_minus;
  out.excursion = std::move(traj);
  return out;
}

struct ReturnMapResult {
  State x_in;    // guard state the map was applied to
  State y_start; // reset image the excursion starts from
  double tau = 0.0;
  State x_out;   // next guard hit (pre-reset value)
  HybridTrajectory excursion;
};

/// One application of the hybrid return map P(x) = first impact of the flow
/// from Delta(x). Requires x on the guard.
inline ReturnMapResult return_map(const HybridSystemDef& sys, const State& x,
                                  const HybridOptions& opts = {}) {
  sys.validate();
  if (std::fabs(sys.guard.H(x)) > opts.H_tol)
    throw std::invalid_argument("return_map: state is not on the guard");
  ReturnMapResult out;
  out.x_in = x;
  out.y_start = sys.reset.delta(x);
  TimeToImpact tti = time_to_impact(sys, out.y_start, opts);
  out.tau = tti.tau;
  out.x_out = std::move(tti.x_out);
  out.excursion = std::move(tti.excursion);
  return out;
}

/// Return map in chart coordinates.
inline double return_map_chart(const HybridSystemDef& sys,
                               const SectionChart& chart, double s,
                               const HybridOptions& opts = {}) {
  return chart.inv_chart(return_map(sys, chart.chart(s), opts).x_out);
}

/// Solve P_chart(s) = s by secant iteration with a bisection fallback once a
/// sign-changing bracket appears. Converges to |P(s)-s| <= tol.
inline double find_fixed_point(const HybridSystemDef& sys,
                               const SectionChart& chart, double s_guess,
                               const HybridOptions& opts = {},
                               double tol = 1e-10, int max_iter = 100) {
  chart.validate();
  auto g = [&](double s) { return return_map_chart(sys, chart, s, opts) - s; };

  double s0 = s_guess;
  double g0 = g(s0);
  if (std::fabs(g0) <= tol) return s0;
  double s1 = s_guess + 1e-4 * std::max(1.0, std::fabs(s_guess));
  double g1 = g(s1);

  bool have_bracket = g0 * g1 < 0.0;
  double a = s0, ga = g0, b = s1;
  if (!have_bracket) {
    a = s0;
    b = s1;
  }

  for (int it = 0; it < max_iter; ++it) {
    if (std::fabs(g1) <= tol) return s1;
    double s2;
    if (g1 != g0) {
      s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
    } else {
      s2 = have_bracket ? 0.5 * (a + b)
                        : s1 + 1e-3 * std::max(1.0, std::fabs(s1));
    }
    if (have_bracket) {
      const double lo = std::min(a, b), hi = std::max(a, b);
      if (!std::isfinite(s2) || s2 <= lo || s2 >= hi) s2 = 0.5 * (a + b);
    } else if (!std::isfinite(s2)) {
      throw NumericalError("find_fixed_point: iteration diverged");
    }
    const double g2 = g(s2);
    if (have_bracket) {
      if (ga * g2 < 0.0)
        b = s2;
      else {
        a = s2;
        ga = g2;
      }
    } else if (g1 * g2 < 0.0) {
      have_bracket = true;
      a = s1;
      ga = g1;
      b = s2;
    }
    s0 = s1;
    g0 = g1;
    s1 = s2;
    g1 = g2;
  }
  throw NumericalError("find_fixed_point: no convergence in " +
                       std::to_string(max_iter) + " iterations");
}

/// Central finite difference of the chart return map; optional one-step
/// Richardson extrapolation.
inline double fd_derivative(const HybridSystemDef& sys,
                            const SectionChart& chart, double s,
                            const HybridOptions& opts = {}, double h = 1e-5,
                            bool richardson = false) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_derivative: h must be > 0");
  auto central = [&](double hh) {
    const double qp = return_map_chart(sys, chart, s + hh, opts);
    const double qm = return_map_chart(sys, chart, s - hh, opts);
    return (qp - qm) / (2.0 * hh);
  };
  if (!richardson) return central(h);
  const double dh = central(h);
  const double dh2 = central(0.5 * h);
  return (4.0 * dh2 - dh) / 3.0;
}

/// Factored derivative of the return map at a fixed point (or cycle):
/// reset stretch x speed ratio x sine ratio x accumulated divergence.
struct StabilityReport {
  double reset_derivative = 0.0;   // |Dreset . c'| / |c'| per leg, multiplied
  double speed_ratio = 0.0;        // |f(start)| / |f(landing)|, multiplied
  double sine_ratio = 0.0;         // |sin(start angle) / sin(landing angle)|
  double divergence_factor = 0.0;  // exp of the divergence integral
  double geometric_ratio = 0.0;    // speed_ratio * sine_ratio
  double product = 0.0;            // |P'| = product of the four factors
  double product_signed = 0.0;     // with orientation-signed sines
  double sin_theta = 0.0;          // signed sine(s) at landing point(s)
  double sin_alpha = 0.0;          // signed sine(s) at excursion start(s)
  double fd_check = 0.0;           // signed finite-difference derivative
  double period = 0.0;
  double fixed_point_residual = 0.0;
  int legs = 1;
  std::string verdict;  // stable | unstable | marginal
};

namespace detail {

inline std::string stability_verdict(double magnitude) {
  if (magnitude < 1.0 - 1e-6) return "stable";
  if (magnitude > 1.0 + 1e-6) return "unstable";
  return "marginal";
}

/// Pushforward of the section tangent under the reset, analytic if the model
/// provides one, else central differences of Delta along the chart.
inline State reset_pushforward(const HybridSystemDef& sys,
                               const SectionChart& chart, double s,
                               const State& chart_tangent, double h = 1e-6) {
  if (sys.reset.tangent_map)
    return sys.reset.tangent_map(chart.chart(s), chart_tangent);
  const State yp = sys.reset.delta(chart.chart(s + h));
  const State ym = sys.reset.delta(chart.chart(s - h));
  State u(yp.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (yp[i] - ym[i]) / (2 * h);
  return u;
}

struct LegFactors {
  double reset_mag, speed, sin_start, sin_land, lambda, tau;
};

/// Factors of one section-to-section leg: from chart point s_from, the reset
/// image flows to the landing point whose chart tangent is c_land.
inline LegFactors leg_factors(const HybridSystemDef& sys,
                              const SectionChart& chart, double s_from,
                              const ReturnMapResult& rm, double s_land,
                              const HybridOptions& opts) {
  (void)opts;
  const State c_from = chart.tangent(s_from);
  const State c_land = chart.tangent(s_land);
  const double c_from_len = norm(c_from);
  const double c_land_len = norm(c_land);
  if (!(c_from_len > 0.0) || !(c_land_len > 0.0))
    throw NumericalError("derivative: degenerate chart tangent");

  const State u = reset_pushforward(sys, chart, s_from, c_from);
  const double u_len = norm(u);
  if (!(u_len > 0.0))
    throw NumericalError("derivative: reset pushforward vanished");

  const State f_y = sys.field.eval(rm.y_start);
  const State f_x = sys.field.eval(rm.x_out);
  const double f_y_len = norm(f_y);
  const double f_x_len = norm(f_x);
  if (!(f_y_len > 0.0) || !(f_x_len > 0.0))
    throw NumericalError("derivative: vector field vanishes on the section");

  const SectionFrame frame_start = detail::frame_from_tangent(rm.y_start, u);
  const SectionFrame frame_land =
      detail::frame_from_tangent(rm.x_out, c_land);
  const double sin_start = signed_sine(f_y, frame_start);
  const double sin_land = signed_sine(f_x, frame_land);
  if (std::fabs(sin_start) < 1e-8 || std::fabs(sin_land) < 1e-8)
    throw NumericalError("derivative: flow nearly tangent to the section");

  double div_int = 0.0;
  for (const ContinuousSegment& seg : rm.excursion.segments)
    div_int += divergence_integral(sys.field, seg);

  return {u_len / c_land_len, f_y_len / f_x_len, sin_start, sin_land,
          std::exp(div_int), rm.tau};
}

}  // namespace detail

/// Analytic derivative of the planar return map at a fixed point s_star of
/// the chart map, with a finite-difference cross-check.
inline StabilityReport derivative_planar(const HybridSystemDef& sys,
                                         const SectionChart& chart,
                                         double s_star,
                                         const HybridOptions& opts = {},
                                         double fd_h = 1e-5) {
  sys.validate();
  chart.validate();
  if (sys.field.dimension != 2)
    throw std::invalid_argument("derivative_planar: planar systems only");

  ReturnMapResult rm = return_map(sys, chart.chart(s_star), opts);
  const double s_land = chart.inv_chart(rm.x_out);
  const double residual = std::fabs(s_land - s_star);
  if (residual > 1e-6 * std::max(1.0, std::fabs(s_star)))
    throw NumericalError("derivative_planar: not a fixed point (residual " +
                         std::to_string(residual) + ")");

  const detail::LegFactors lf =
      detail::leg_factors(sys, chart, s_star, rm, s_star, opts);

  StabilityReport rep;
  rep.reset_derivative = lf.reset_mag;
  rep.speed_ratio = lf.speed;
  rep.sin_alpha = lf.sin_start;
  rep.sin_theta = lf.sin_land;
  rep.sine_ratio = std::fabs(lf.sin_start / lf.sin_land);
  rep.divergence_factor = lf.lambda;
  rep.geometric_ratio = rep.speed_ratio * rep.sine_ratio;
  rep.product = rep.reset_derivative * rep.speed_ratio * rep.sine_ratio *
                rep.divergence_factor;
  rep.product_signed = rep.reset_derivative * rep.speed_ratio *
                       (lf.sin_start / lf.sin_land) * rep.divergence_factor;
  rep.period = lf.tau;
  rep.fixed_point_residual = residual;
  rep.legs = 1;
  rep.fd_check = fd_derivative(sys, chart, s_star, opts, fd_h);
  rep.verdict = detail::stability_verdict(rep.product);
  return rep;
}

/// Derivative of the n-fold return map along a cycle hitting the section at
/// chart coordinates s_points (in impact order). Factors multiply across
/// legs; the finite-difference check differentiates the composed map.
inline StabilityReport derivative_multi(const HybridSystemDef& sys,
                                        const SectionChart& chart,
                                        const std::vector<double>& s_points,
                                        const HybridOptions& opts = {},
                                        double fd_h = 1e-5) {
  sys.validate();
  chart.validate();
  if (sys.field.dimension != 2)
    throw std::invalid_argument("derivative_multi: planar systems only");
  if (s_points.empty())
    throw std::invalid_argument("derivative_multi: empty cycle");

  const std::size_t k = s_points.size();
  StabilityReport rep;
  rep.legs = static_cast<int>(k);
  rep.reset_derivative = rep.speed_ratio = rep.sine_ratio = 1.0;
  rep.divergence_factor = 1.0;
  rep.product_signed = 1.0;
  rep.period = 0.0;
  rep.sin_theta = rep.sin_alpha = 1.0;
  double worst_residual = 0.0;

  for (std::size_t i = 0; i < k; ++i) {
    const double s_from = s_points[i];
    const double s_next = s_points[(i + 1) % k];
    ReturnMapResult rm = return_map(sys, chart.chart(s_from), opts);
    const double s_land = chart.inv_chart(rm.x_out);
    const double residual = std::fabs(s_land - s_next);
    worst_residual = std::max(worst_residual, residual);
    if (residual > 1e-6 * std::max(1.0, std::fabs(s_next)))
      throw NumericalError(
          "derivative_multi: points do not form a cycle (leg " +
          std::to_string(i) + " residual " + std::to_string(residual) + ")");
    const detail::LegFactors lf =
        detail::leg_factors(sys, chart, s_from, rm, s_next, opts);
    rep.reset_derivative *= lf.reset_mag;
    rep.speed_ratio *= lf.speed;
    rep.sine_ratio *= std::fabs(lf.sin_start / lf.sin_land);
    rep.divergence_factor *= lf.lambda;
    rep.product_signed *=
        lf.reset_mag * lf.speed * (lf.sin_start / lf.sin_land) * lf.lambda;
    rep.sin_alpha *= lf.sin_start;
    rep.sin_theta *= lf.sin_land;
    rep.period += lf.tau;
  }
  rep.geometric_ratio = rep.speed_ratio * rep.sine_ratio;
  rep.product = rep.reset_derivative * rep.speed_ratio * rep.sine_ratio *
                rep.divergence_factor;
  rep.fixed_point_residual = worst_residual;

  auto composed = [&](double s) {
    for (std::size_t i = 0; i < k; ++i)
      s = return_map_chart(sys, chart, s, opts);
    return s;
  };
  rep.fd_check =
      (composed(s_points[0] + fd_h) - composed(s_points[0] - fd_h)) /
      (2.0 * fd_h);
  rep.verdict = detail::stability_verdict(rep.product);
  return rep;
}

// ---------------------------------------------------------------------------
// n-dimensional determinant bound

struct DeterminantReport {
  double reset_volume_factor = 0.0;  // Gram volume of the reset Jacobian
  double speed_ratio = 0.0;
  double sine_ratio = 0.0;
  double divergence_factor = 0.0;
  double value = 0.0;  // product; > 1 forces instability
  double period = 0.0;
  std::string verdict;  // necessarily-unstable | inconclusive
};

namespace detail {

/// Orthonormal basis of the orthogonal complement of span(fixed), by
/// Gram-Schmidt over the standard basis.
inline std::vector<State> orthonormal_complement(
    const std::vector<State>& fixed, std::size_t n) {
  std::vector<State> basis = fixed;
  std::vector<State> out;
  for (std::size_t e = 0; e < n && out.size() < n - fixed.size(); ++e) {
    State v(n, 0.0);
    v[e] = 1.0;
    for (const State& b : basis) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < n; ++i) v[i] -= c * b[i];
    }
    const double len = norm(v);
    if (len > 1e-8) {
      for (double& vi : v) vi /= len;
      out.push_back(v);
      basis.push_back(out.back());
    }
  }
  if (out.size() != n - fixed.size())
    throw NumericalError("orthonormal_complement: basis construction failed");
  return out;
}

}  // namespace detail

/// Evaluate the instability bound at a point x_star of a periodic hybrid
/// orbit in any dimension: the reset volume factor is the Gram determinant of
/// finite-difference columns restricted to the section tangent space, and
/// the sines measure the angle between the flow and each hypersurface.
/// value > 1 certifies instability; value <= 1 is inconclusive.
inline DeterminantReport determinant_test(const HybridSystemDef& sys,
                                          const State& x_star, double T,
                                          const HybridOptions& opts = {}) {
  sys.validate();
  const std::size_t n = x_star.size();
  if (static_cast<int>(n) != sys.field.dimension)
    throw std::invalid_argument("determinant_test: dimension mismatch");
  if (n < 2)
    throw std::invalid_argument("determinant_test: need dimension >= 2");
  if (std::fabs(sys.guard.H(x_star)) > opts.H_tol)
    throw std::invalid_argument("determinant_test: x_star not on the guard");

  const State g = sys.guard.grad(x_star);
  const double glen = norm(g);
  if (!(glen > 0.0))
    throw HypothesisError("determinant_test: guard gradient vanishes");
  State nhat(n);
  for (std::size_t i = 0; i < n; ++i) nhat[i] = g[i] / glen;
  const std::vector<State> tangent_basis =
      detail::orthonormal_complement({nhat}, n);

  // finite-difference reset Jacobian restricted to the tangent chart
  const double h = 1e-6 * std::max(1.0, norm(x_star));
  std::vector<State> G;
  for (const State& b : tangent_basis) {
    State xp = x_star, xm = x_star;
    for (std::size_t i = 0; i < n; ++i) {
      xp[i] += h * b[i];
      xm[i] -= h * b[i];
    }
    const State yp = sys.reset.delta(xp);
    const State ym = sys.reset.delta(xm);
    State col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = (yp[i] - ym[i]) / (2.0 * h);
    G.push_back(std::move(col));
  }
  std::vector<State> gram(G.size(), State(G.size()));
  for (std::size_t i = 0; i < G.size(); ++i)
    for (std::size_t j = 0; j < G.size(); ++j) gram[i][j] = dot(G[i], G[j]);
  const double gram_det = det_columns(gram);
  const double volume = std::sqrt(std::max(gram_det, 0.0));
  if (!(volume > 0.0))
    throw NumericalError("determinant_test: reset Jacobian is singular");

  const State y = sys.reset.delta(x_star);
  TimeToImpact tti = time_to_impact(sys, y, opts);
  if (dist(tti.x_out, x_star) > 1e-5 * std::max(1.0, norm(x_star)))
    throw NumericalError("determinant_test: orbit does not return to x_star");
  if (std::fabs(tti.tau - T) > 1e-5 * std::max(1.0, std::fabs(T)))
    log_warn("determinant_test: supplied period differs from measured " +
             std::to_string(tti.tau));

  const State f_y = sys.field.eval(y);
  const State f_x = sys.field.eval(tti.x_out);
  const double f_y_len = norm(f_y), f_x_len = norm(f_x);
  if (!(f_y_len > 0.0) || !(f_x_len > 0.0))
    throw NumericalError("determinant_test: vector field vanishes");

  // unit normal of the guard at the landing point
  const State gl = sys.guard.grad(tti.x_out);
  const double sin_x = std::fabs(dot(gl, f_x)) / (norm(gl) * f_x_len);
  // unit normal of the reset image surface at y: complement of the columns
  std::vector<State> q;  // orthonormalized image tangents
  for (const State& col : G) {
    State v = col;
    for (const State& b : q) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < n; ++i) v[i] -= c * b[i];
    }
    const double len = norm(v);
    if (len > 1e-12 * norm(col)) {
      for (double& vi : v) vi /= len;
      q.push_back(std::move(v));
    }
  }
  if (q.size() != n - 1)
    throw NumericalError("determinant_test: image surface is degenerate");
  const State n_img = detail::orthonormal_complement(q, n).front();
  const double sin_y = std::fabs(dot(n_img, f_y)) / f_y_len;
  if (sin_x < 1e-8 || sin_y < 1e-8)
    throw NumericalError("determinant_test: flow nearly tangent to a surface");

  double div_int = 0.0;
  for (const ContinuousSegment& seg : tti.excursion.segments)
    div_int += divergence_integral(sys.field, seg);

  DeterminantReport rep;
  rep.reset_volume_factor = volume;
  rep.speed_ratio = f_y_len / f_x_len;
  rep.sine_ratio = sin_y / sin_x;
  rep.divergence_factor = std::exp(div_int);
  rep.value =
      rep.reset_volume_factor * rep.speed_ratio * rep.sine_ratio *
      rep.divergence_factor;
  rep.period = tti.tau;
  rep.verdict = rep.value > 1.0 + 1e-9 ? "necessarily-unstable"
                                       : "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Reset-free section returns (classical Poincare maps)

struct SectionReturn {
  double tau = 0.0;
  State x_out;
  ContinuousSegment segment;
};

/// Flow from x0 (typically on the section) to its next direction-matching
/// crossing of `section`, with no reset involved.
inline SectionReturn continuous_section_return(const VectorFieldDef& f,
                                               const GuardDef& section,
                                               const State& x0,
                                               const HybridOptions& opts = {}) {
  f.validate();
  section.validate();
  ContinuousSegment seg;
  seg.t_start = seg.t_end = 0.0;
  seg.dimension = f.dimension;
  seg.nodes.emplace_back(0.0, x0);

  std::optional<CrossingBracket> hit;
  // a start inside the |H| <= H_tol band counts as on the section, even when
  // rounding leaves a wrong-signed residual there; the sign is seeded only
  // once the orbit has left the band, so the departure can never register
  double H_sign = section.H(x0);
  double sign_time = 0.0;
  bool have_sign = std::fabs(H_sign) > opts.H_tol;
  auto after_step = [&](const ContinuousSegment& s) {
    const StepRecord& rec = s.steps.back();
    for (int j = 1; j <= 8; ++j) {
      const double tt = rec.t0 + rec.h * j / 8.0;
      const double Hv = section.H(dense_eval(rec, tt));
      if (Hv == 0.0) continue;
      if (have_sign) {
        if (H_sign * Hv < 0.0 && section.matches(H_sign, Hv)) {
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
    return false;
  };
  integrate_segment(f, seg, opts.return_horizon, opts.ode, after_step);
  if (!hit)
    throw NumericalError(
        "continuous_section_return: no crossing within horizon");
  Crossing cr =
      refine_crossing(f, section, seg, *hit, opts.t_tol, opts.H_tol);
  seg.truncate_at(cr.t, cr.x);
  return {cr.t, std::move(cr.x), std::move(seg)};
}

}  // namespace hybridcycles
