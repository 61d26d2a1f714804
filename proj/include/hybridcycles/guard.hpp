#pragma once

// Guard surfaces H(x) = 0: crossing detection on dense trajectory segments,
// Brent refinement of crossing times, and the section-frame geometry used by
// the return-map derivative.

#include <functional>
#include <optional>
#include <vector>

#include "core.hpp"
#include "ode.hpp"

namespace hybridcycles {

enum class CrossingDirection { neg_to_pos, pos_to_neg, either };

/// Scalar guard H with optional analytic gradient. `direction` filters which
/// sign changes of H count as events.
struct GuardDef {
  std::function<double(const State&)> H;
  std::function<State(const State&)> grad_H;
  CrossingDirection direction = CrossingDirection::either;
  double grad_fd_step = 1e-7;

  void validate() const {
    if (!H) throw std::invalid_argument("GuardDef: H missing");
  }

  State grad(const State& x) const {
    if (grad_H) return grad_H(x);
    State g(x.size());
    State xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = grad_fd_step * std::max(1.0, std::fabs(x[i]));
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g[i] = (H(xp) - H(xm)) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    return g;
  }

  bool matches(double h_before, double h_after) const {
    switch (direction) {
      case CrossingDirection::neg_to_pos: return h_before < 0.0 && h_after > 0.0;
      case CrossingDirection::pos_to_neg: return h_before > 0.0 && h_after < 0.0;
      case CrossingDirection::either:
        return h_before * h_after < 0.0;
    }
    return false;
  }
};

/// Time bracket with a guaranteed sign change of H across it.
struct CrossingBracket {
  double t_lo = 0.0, t_hi = 0.0;
  double H_lo = 0.0, H_hi = 0.0;
};

/// Scan a dense segment for direction-matching sign changes of H. Each
/// accepted step is sampled at 8 subintervals; the sign seen before a string
/// of exact zeros carries forward, so a trajectory that starts on the guard
/// or rides H = 0 briefly does not produce a spurious bracket.
inline std::vector<CrossingBracket> scan_crossings(const GuardDef& guard,
                                                   const ContinuousSegment& seg,
                                                   int subdivisions = 8) {
  guard.validate();
  if (subdivisions < 1)
    throw std::invalid_argument("scan_crossings: subdivisions must be >= 1");
  std::vector<CrossingBracket> out;
  if (seg.steps.empty()) return out;

  // time and value of the last sample with a nonzero sign; carrying it past
  // exact zeros avoids spurious brackets when a leg starts on the guard
  const double H0 = guard.H(seg.start_state());
  double t_sign = seg.t_start, H_sign = H0;
  bool have_sign = H0 != 0.0;

  for (const StepRecord& rec : seg.steps) {
    const double b = std::min(rec.t0 + rec.h, seg.t_end);
    if (b <= rec.t0) continue;
    for (int j = 1; j <= subdivisions; ++j) {
      const double t = rec.t0 + (b - rec.t0) * j / subdivisions;
      const double Hv = guard.H(dense_eval(rec, t));
      if (Hv != 0.0) {
        if (have_sign && H_sign * Hv < 0.0 && guard.matches(H_sign, Hv))
          out.push_back({t_sign, t, H_sign, Hv});
        t_sign = t;
        H_sign = Hv;
        have_sign = true;
      }
    }
  }
  return out;
}

/// Result of refining a crossing bracket.
struct Crossing {
  double t = 0.0;
  State x;
  double H_residual = 0.0;
};

/// Brent root refinement of t -> H(seg(t)) inside a bracket. Converges when
/// both the time bracket is below t_tol and |H| is below H_tol; the vector
/// field is consulted only to warn about near-tangential crossings.
inline Crossing refine_crossing(const VectorFieldDef& f, const GuardDef& guard,
                                const ContinuousSegment& seg,
                                const CrossingBracket& bracket,
                                double t_tol = 1e-12, double H_tol = 1e-10) {
  guard.validate();
  if (!(bracket.H_lo * bracket.H_hi < 0.0))
    throw std::invalid_argument("refine_crossing: bracket has no sign change");
  if (!(t_tol > 0.0) || !(H_tol > 0.0))
    throw std::invalid_argument("refine_crossing: tolerances must be > 0");

  auto g = [&](double t) { return guard.H(seg.eval_at(t)); };

  double a = bracket.t_lo, b = bracket.t_hi;
  double fa = bracket.H_lo, fb = bracket.H_hi;
  double c = a, fc = fa;
  double d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();

  for (int iter = 0; iter < 200; ++iter) {
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 =
        2.0 * eps * std::fabs(b) +
        0.5 * std::max(t_tol, 4.0 * eps * std::max(std::fabs(a), std::fabs(b)));
    const double xm = 0.5 * (c - b);
    if ((std::fabs(xm) <= tol1 && std::fabs(fb) <= H_tol) || fb == 0.0) {
      State x = seg.eval_at(b);
      const double resid = guard.H(x);
      if (f.eval) {
        const State fx = f.eval(x);
        const State gx = guard.grad(x);
        const double tv = dot(gx, fx);
        if (std::fabs(tv) < 1e-6 * norm(fx) * norm(gx))
          log_warn("near-tangential guard crossing at t=" + std::to_string(b));
      }
      return {b, std::move(x), resid};
    }
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      // inverse quadratic / secant candidate
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q),
                             std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = g(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw NumericalError("refine_crossing: no convergence in 200 iterations");
}

/// Orthonormal frame attached to a point of a planar curve or guard line.
struct SectionFrame {
  State point;
  State tangent;  // unit
  State normal;   // unit, tangent rotated by -pi/2
};

namespace detail {

inline SectionFrame frame_from_tangent(State point, const State& tangent_raw) {
  if (point.size() != 2 || tangent_raw.size() != 2)
    throw std::invalid_argument("frame: planar states required");
  const double len = norm(tangent_raw);
  if (!(len > 0.0)) throw NumericalError("frame: zero tangent vector");
  State t{tangent_raw[0] / len, tangent_raw[1] / len};
  State n{t[1], -t[0]};
  return {std::move(point), std::move(t), std::move(n)};
}

}  // namespace detail

/// Frame on the guard at x: normal along grad H, tangent = normal rotated
/// by +pi/2. Planar only.
inline SectionFrame frame_at(const GuardDef& guard, const State& x) {
  if (x.size() != 2)
    throw std::invalid_argument("frame_at: planar states required");
  const State g = guard.grad(x);
  const double len = norm(g);
  if (!(len > 0.0))
    throw HypothesisError("frame_at: guard gradient vanishes on the surface");
  State n{g[0] / len, g[1] / len};
  State t{-n[1], n[0]};
  return {x, std::move(t), std::move(n)};
}

/// Frame on a parametrized curve c at parameter s (tangent dc/ds by central
/// difference): used for image curves of the reset map.
inline SectionFrame frame_on_curve(const std::function<State(double)>& c,
                                   double s, double h = 1e-6) {
  const State p = c(s);
  const State a = c(s + h);
  const State b = c(s - h);
  State tan(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) tan[i] = (a[i] - b[i]) / (2 * h);
  return detail::frame_from_tangent(p, tan);
}

/// Sine of the angle from the frame tangent to v, with the sign of the
/// planar cross product. |signed_sine| = 1 iff v is normal to the curve.
inline double signed_sine(const State& v, const SectionFrame& frame) {
  const double len = norm(v);
  if (!(len > 0.0)) throw NumericalError("signed_sine: zero vector");
  return cross_z(frame.tangent, v) / len;
}

/// <grad H, f> at x: the rate at which the flow pierces the guard.
inline double transversality(const VectorFieldDef& f, const GuardDef& guard,
                             const State& x) {
  return dot(guard.grad(x), f.eval(x));
}

}  // namespace hybridcycles
