#pragma once

// Built-in hybrid models with analytic extras (divergence, reset tangent
// maps, closed-form flows where available), the rimless-wheel energy
// analysis, and a name-based registry for the CLI.

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chart.hpp"
#include "core.hpp"
#include "guard.hpp"
#include "hybrid.hpp"
#include "ode.hpp"

namespace hybridcycles {

/// A system bundled with its canonical section chart, a starting state, and
/// a chart-space guess for the return-map fixed point.
struct Model {
  HybridSystemDef sys;
  SectionChart chart;
  State x0;
  double s_guess = 0.0;
};

// ---------------------------------------------------------------------------
// Van der Pol oscillator with a reset on the line x = 1

namespace detail {

inline VectorFieldDef vdp_field(double mu) {
  VectorFieldDef f;
  f.dimension = 2;
  f.eval = [mu](const State& x) {
    return State{x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]};
  };
  f.divergence = [mu](const State& x) { return mu * (1.0 - x[0] * x[0]); };
  f.jacobian = [mu](const State& x) {
    return std::vector<State>{{0.0, -2.0 * mu * x[0] * x[1] - 1.0},
                              {1.0, mu * (1.0 - x[0] * x[0])}};
  };
  return f;
}

inline GuardDef vdp_guard() {
  GuardDef g;
  g.H = [](const State& x) { return x[0] - 1.0; };
  g.grad_H = [](const State&) { return State{1.0, 0.0}; };
  g.direction = CrossingDirection::pos_to_neg;
  return g;
}

}  // namespace detail

/// Van der Pol flow with the velocity-scaling reset (x, y) -> (x, c y).
inline Model make_vdp_scale(double mu = 1.0, double c = -1.5) {
  Model m;
  m.sys.name = "vdp";
  m.sys.field = detail::vdp_field(mu);
  m.sys.guard = detail::vdp_guard();
  m.sys.reset.delta = [c](const State& x) { return State{x[0], c * x[1]}; };
  m.sys.reset.tangent_map = [c](const State&, const State& t) {
    return State{t[0], c * t[1]};
  };
  m.sys.fixed_points = std::vector<State>{{0.0, 0.0}};
  m.chart = axis_chart({1.0, 0.0}, 1);
  m.x0 = {1.0, 3.0};
  m.s_guess = -1.05;
  return m;
}

/// Van der Pol flow with the affine reset (1, y) -> (1, m (y - A) + B).
inline Model make_vdp_linear(double mu, double slope, double A, double B) {
  Model m;
  m.sys.name = "vdp-linear";
  m.sys.field = detail::vdp_field(mu);
  m.sys.guard = detail::vdp_guard();
  m.sys.reset.delta = [slope, A, B](const State& x) {
    return State{x[0], slope * (x[1] - A) + B};
  };
  m.sys.reset.tangent_map = [slope](const State&, const State& t) {
    return State{t[0], slope * t[1]};
  };
  m.sys.fixed_points = std::vector<State>{{0.0, 0.0}};
  m.chart = axis_chart({1.0, 0.0}, 1);
  m.x0 = {1.0, 3.0};
  m.s_guess = A;
  return m;
}

// ---------------------------------------------------------------------------
// Radial relaxation with an angular guard: dr/dt = 1 - r, dtheta/dt = 1,
// impacts on the ray theta = alpha, reset (r, alpha) -> (beta r, gamma).

struct PolarParams {
  double alpha = 3.14159265358979323846;
  double beta = 2.0;
  double gamma = 0.0;

  void validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("polar: beta must be > 0");
    if (!(0.0 <= gamma && gamma < alpha && alpha <= 2.0 * 3.14159265358979323846))
      throw std::invalid_argument("polar: need 0 <= gamma < alpha <= 2*pi");
  }
};

/// Closed-form fixed point of the radius return map, measured as the
/// post-reset radius on the ray theta = gamma.
inline double polar_fixed_radius(const PolarParams& p) {
  const double e = std::exp(p.gamma - p.alpha);
  const double lambda = p.beta * e;
  if (lambda >= 1.0)
    throw NumericalError("polar_fixed_radius: beta*exp(gamma-alpha) >= 1");
  return p.beta * (e - 1.0) / (lambda - 1.0);
}

/// Closed-form derivative of the radius return map at its fixed point.
inline double polar_derivative(const PolarParams& p) {
  return p.beta * std::exp(p.gamma - p.alpha);
}

namespace detail {

/// Chart whose coordinate is the post-reset radius: s on the section maps to
/// radius s / beta at the guard angle. The returned coordinate then obeys
/// s -> beta [(s - 1) e^{gamma - alpha} + 1] directly.
inline SectionChart scaled_ray_chart(double alpha, double beta) {
  SectionChart c;
  c.chart = [alpha, beta](double s) {
    return State{(s / beta) * std::cos(alpha), (s / beta) * std::sin(alpha)};
  };
  c.inv_chart = [beta](const State& x) { return beta * norm(x); };
  return c;
}

}  // namespace detail

/// The polar model in its own (r, theta) coordinates, where the divergence
/// is the constant -1 and all return-map factors take their textbook values.
inline Model make_polar(const PolarParams& p = {}) {
  p.validate();
  Model m;
  m.sys.name = "polar";
  m.sys.field.dimension = 2;
  m.sys.field.eval = [](const State& x) { return State{1.0 - x[0], 1.0}; };
  m.sys.field.divergence = [](const State&) { return -1.0; };
  m.sys.field.jacobian = [](const State&) {
    return std::vector<State>{{-1.0, 0.0}, {0.0, 0.0}};
  };
  const double alpha = p.alpha, beta = p.beta, gamma = p.gamma;
  m.sys.guard.H = [alpha](const State& x) { return x[1] - alpha; };
  m.sys.guard.grad_H = [](const State&) { return State{0.0, 1.0}; };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [beta, gamma](const State& x) {
    return State{beta * x[0], gamma};
  };
  m.sys.reset.tangent_map = [beta](const State&, const State& t) {
    return State{beta * t[0], 0.0};
  };
  m.sys.fixed_points = std::vector<State>{};  // dtheta/dt = 1 has no zeros
  m.sys.exact_flow = [](const State& x, double t) {
    return State{(x[0] - 1.0) * std::exp(-t) + 1.0, x[1] + t};
  };
  SectionChart c;
  c.chart = [alpha, beta](double s) { return State{s / beta, alpha}; };
  c.inv_chart = [beta](const State& x) { return beta * x[0]; };
  m.chart = c;
  m.x0 = {1.0, gamma};
  const double lam = beta * std::exp(gamma - alpha);
  m.s_guess = lam < 1.0 ? 1.1 * polar_fixed_radius(p) : beta;
  return m;
}

/// The same dynamics transformed to Cartesian coordinates, where the
/// divergence varies along the trajectory (1/r - 2) but every chart-invariant
/// quantity must agree with the (r, theta) realization.
inline Model make_polar_cartesian(const PolarParams& p = {}) {
  p.validate();
  Model m;
  m.sys.name = "polar-cartesian";
  const double alpha = p.alpha, beta = p.beta, gamma = p.gamma;
  m.sys.field.dimension = 2;
  m.sys.field.eval = [](const State& x) {
    const double r = std::hypot(x[0], x[1]);
    return State{x[0] / r - x[0] - x[1], x[1] / r - x[1] + x[0]};
  };
  m.sys.field.divergence = [](const State& x) {
    return 1.0 / std::hypot(x[0], x[1]) - 2.0;
  };
  m.sys.guard.H = [alpha](const State& x) {
    return -x[0] * std::sin(alpha) + x[1] * std::cos(alpha);
  };
  m.sys.guard.grad_H = [alpha](const State&) {
    return State{-std::sin(alpha), std::cos(alpha)};
  };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [beta, gamma](const State& x) {
    const double r = std::hypot(x[0], x[1]);
    return State{beta * r * std::cos(gamma), beta * r * std::sin(gamma)};
  };
  m.sys.reset.tangent_map = [beta, gamma](const State& x, const State& t) {
    const double r = std::hypot(x[0], x[1]);
    const double dr = (x[0] * t[0] + x[1] * t[1]) / r;
    return State{beta * dr * std::cos(gamma), beta * dr * std::sin(gamma)};
  };
  m.sys.fixed_points = std::vector<State>{};  // |f|^2 = (1-r)^2 + r^2 > 0
  m.sys.domain_check = [](const State& x) {
    return std::hypot(x[0], x[1]) > 1e-8;
  };
  m.sys.exact_flow = [](const State& x, double t) {
    const double r0 = std::hypot(x[0], x[1]);
    const double th0 = std::atan2(x[1], x[0]);
    const double r = (r0 - 1.0) * std::exp(-t) + 1.0;
    return State{r * std::cos(th0 + t), r * std::sin(th0 + t)};
  };
  m.chart = detail::scaled_ray_chart(alpha, beta);
  m.x0 = {std::cos(gamma), std::sin(gamma)};
  const double lam = beta * std::exp(gamma - alpha);
  m.s_guess = lam < 1.0 ? 1.1 * polar_fixed_radius(p) : beta;
  return m;
}

/// Cartesian polar dynamics extruded by a contracting third axis dz = -z,
/// with the reset acting as identity on z. Exercises the n-dimensional
/// determinant bound: the expected value is beta e^{2(gamma - alpha)}.
inline Model make_polar_extruded(const PolarParams& p = {}) {
  p.validate();
  Model m;
  m.sys.name = "polar-extruded";
  const double alpha = p.alpha, beta = p.beta, gamma = p.gamma;
  m.sys.field.dimension = 3;
  m.sys.field.eval = [](const State& x) {
    const double r = std::hypot(x[0], x[1]);
    return State{x[0] / r - x[0] - x[1], x[1] / r - x[1] + x[0], -x[2]};
  };
  m.sys.field.divergence = [](const State& x) {
    return 1.0 / std::hypot(x[0], x[1]) - 3.0;
  };
  m.sys.guard.H = [alpha](const State& x) {
    return -x[0] * std::sin(alpha) + x[1] * std::cos(alpha);
  };
  m.sys.guard.grad_H = [alpha](const State&) {
    return State{-std::sin(alpha), std::cos(alpha), 0.0};
  };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [beta, gamma](const State& x) {
    const double r = std::hypot(x[0], x[1]);
    return State{beta * r * std::cos(gamma), beta * r * std::sin(gamma), x[2]};
  };
  m.sys.fixed_points = std::vector<State>{};
  m.sys.domain_check = [](const State& x) {
    return std::hypot(x[0], x[1]) > 1e-8;
  };
  SectionChart c;
  c.chart = [alpha, beta](double s) {
    return State{(s / beta) * std::cos(alpha), (s / beta) * std::sin(alpha),
                 0.0};
  };
  c.inv_chart = [beta](const State& x) {
    return beta * std::hypot(x[0], x[1]);
  };
  m.chart = c;
  m.x0 = {std::cos(gamma), std::sin(gamma), 0.1};
  const double lam = beta * std::exp(gamma - alpha);
  m.s_guess = lam < 1.0 ? 1.1 * polar_fixed_radius(p) : beta;
  return m;
}

// ---------------------------------------------------------------------------
// Rimless wheel rolling downhill

struct RimlessWheelParams {
  double delta = 3.14159265358979323846 / 10.0;  // half inter-spoke angle
  double alpha = 3.14159265358979323846 / 30.0;  // slope grade
  double zeta = 9.8;                             // g / ell
  double ell = 1.0;                              // leg length

  double g() const { return zeta * ell; }

  void validate() const {
    if (!(delta > 0.0 && delta < 3.14159265358979323846 / 4.0))
      throw std::invalid_argument("rimless wheel: need 0 < delta < pi/4");
    if (!(alpha > 0.0 && alpha < 3.14159265358979323846 / 2.0))
      throw std::invalid_argument("rimless wheel: need 0 < alpha < pi/2");
    if (!(zeta > 0.0) || !(ell > 0.0))
      throw std::invalid_argument("rimless wheel: zeta and ell must be > 0");
  }
};

/// Potential energy gained per step from rolling one spoke pitch downhill:
/// 2 l g sin(delta) sin(alpha), per unit mass.
inline double energy_gain(const RimlessWheelParams& p) {
  return 2.0 * p.ell * p.g() * std::sin(p.delta) * std::sin(p.alpha);
}

/// Kinetic energy lost in the spoke impact at pre-impact angular velocity
/// x2: (1/2) (l x2)^2 (1 - cos^2 2 delta), per unit mass.
inline double energy_loss(const RimlessWheelParams& p, double x2_minus) {
  const double c = std::cos(2.0 * p.delta);
  const double v = p.ell * x2_minus;
  return 0.5 * v * v * (1.0 - c * c);
}

/// Squared pre-impact speed after one step, from the pendulum energy
/// integral between impacts.
inline double wheel_step_speed_sq(const RimlessWheelParams& p,
                                  double speed_sq_minus) {
  const double c = std::cos(2.0 * p.delta);
  return c * c * speed_sq_minus +
         2.0 * p.zeta *
             (std::cos(p.delta - p.alpha) - std::cos(p.delta + p.alpha));
}

/// Fixed point of the step map: the squared pre-impact speed at which the
/// impact loss balances the downhill gain.
inline double wheel_fixed_speed_sq(const RimlessWheelParams& p) {
  const double c = std::cos(2.0 * p.delta);
  return 2.0 * p.zeta *
         (std::cos(p.delta - p.alpha) - std::cos(p.delta + p.alpha)) /
         (1.0 - c * c);
}

/// Smallest squared post-impact speed that still carries the stance spoke
/// over its vertical crest.
inline double wheel_min_speed_sq_to_crest(const RimlessWheelParams& p) {
  return 2.0 * p.zeta * (1.0 - std::cos(p.delta - p.alpha));
}

struct ExistenceInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Both sides of the gait-existence criterion
/// 2 sin(delta) sin(alpha) > (1 - cos^2 2delta)(1 - cos(delta - alpha)) / cos^2 2delta.
inline ExistenceInequality existence_inequality(const RimlessWheelParams& p) {
  p.validate();
  if (!(p.delta > p.alpha))
    throw std::invalid_argument("existence_inequality: requires delta > alpha");
  ExistenceInequality out;
  out.lhs = 2.0 * std::sin(p.delta) * std::sin(p.alpha);
  const double c = std::cos(2.0 * p.delta);
  if (c <= 0.0) {
    out.rhs = std::numeric_limits<double>::infinity();
    out.holds = false;
    return out;
  }
  out.rhs = (1.0 - c * c) * (1.0 - std::cos(p.delta - p.alpha)) / (c * c);
  out.holds = out.lhs > out.rhs;
  return out;
}

/// Spoked wheel on a slope: x1 is the stance angle, x2 its rate. The guard
/// is the next spoke touching down; the reset swaps the spokes and scales
/// the angular velocity by cos(2 delta).
inline Model make_rimless_wheel(const RimlessWheelParams& p = {}) {
  p.validate();
  Model m;
  m.sys.name = "rimless-wheel";
  const double zeta = p.zeta, delta = p.delta, alpha = p.alpha;
  m.sys.field.dimension = 2;
  m.sys.field.eval = [zeta](const State& x) {
    return State{x[1], zeta * std::sin(x[0])};
  };
  m.sys.field.divergence = [](const State&) { return 0.0; };
  m.sys.field.jacobian = [zeta](const State& x) {
    return std::vector<State>{{0.0, zeta * std::cos(x[0])}, {1.0, 0.0}};
  };
  m.sys.guard.H = [delta, alpha](const State& x) {
    return x[0] + delta + alpha;
  };
  m.sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  m.sys.guard.direction = CrossingDirection::pos_to_neg;
  const double c2 = std::cos(2.0 * delta);
  m.sys.reset.delta = [delta, alpha, c2](const State& x) {
    return State{delta - alpha, c2 * x[1]};
  };
  m.sys.reset.tangent_map = [c2](const State&, const State& t) {
    return State{0.0, c2 * t[1]};
  };
  m.sys.fixed_points = std::vector<State>{{0.0, 0.0}};
  m.sys.domain_check = [](const State& x) {
    return std::fabs(x[0]) < 3.14159265358979323846;
  };
  m.chart = axis_chart({-delta - alpha, 0.0}, 1);
  m.x0 = {delta - alpha, -1.2};
  const double v2 = wheel_fixed_speed_sq(p);
  m.s_guess = v2 > 0.0 ? -std::sqrt(v2) : -1.0;
  return m;
}

/// Simulate the wheel from the energy-balance gait state and report whether
/// the impact speeds settle into a period-1 gait.
struct WheelGaitResult {
  bool cycle_found = false;
  double speed = 0.0;        // converged pre-impact |x2|
  double product = 0.0;      // analytic |P'| = cos^2(2 delta) when found
  long impacts = 0;
  double min_field_norm = 0.0;  // min |f| along the run (origin diagnostic)
  std::string note;
};

inline WheelGaitResult classify_wheel_gait(const RimlessWheelParams& p,
                                           const HybridOptions& opts = {}) {
  p.validate();
  const Model m = make_rimless_wheel(p);
  const double v_bar = std::sqrt(std::max(wheel_fixed_speed_sq(p), 0.0));
  const State start{p.delta - p.alpha, -std::cos(2.0 * p.delta) * v_bar};

  WheelGaitResult out;
  HybridTrajectory traj;
  try {
    traj = hybrid_flow(m.sys, start, 1e4, opts, 30);
  } catch (const NumericalError& e) {
    out.note = e.what();
    return out;
  }
  out.impacts = static_cast<long>(traj.impacts.size());

  double min_f = std::numeric_limits<double>::infinity();
  for (const ContinuousSegment& seg : traj.segments)
    for (const auto& node : seg.nodes)
      min_f = std::min(min_f, norm(m.sys.field.eval(node.second)));
  out.min_field_norm = min_f;

  if (traj.termination == Termination::left_domain) {
    out.note = "stance spoke fell back and toppled";
    return out;
  }
  if (out.impacts < 6) {
    out.note = std::string("too few impacts (") + to_string(traj.termination) +
               ")";
    return out;
  }
  const std::size_t n = traj.impacts.size();
  const double v_last = std::fabs(traj.impacts[n - 1].x_minus[1]);
  for (std::size_t i = n - 5; i < n; ++i) {
    const double v = std::fabs(traj.impacts[i].x_minus[1]);
    if (std::fabs(v - v_last) > 1e-6 * std::max(1.0, v_last)) {
      out.note = "impact speeds did not settle";
      return out;
    }
  }
  out.cycle_found = true;
  out.speed = v_last;
  const double c2 = std::cos(2.0 * p.delta);
  out.product = c2 * c2;
  return out;
}

// ---------------------------------------------------------------------------
// Counterexample models

/// Riccati decay on a conveyor: dx = 1, dy = -y^2, reset from x = 1 back to
/// x = 0 keeping y. The reset image is far from the guard, the impact gap
/// stays 1, and the impact values y_n = 1/(n+1) accumulate at zero.
inline Model make_noninvariance() {
  Model m;
  m.sys.name = "noninvariance";
  m.sys.field.dimension = 2;
  m.sys.field.eval = [](const State& x) { return State{1.0, -x[1] * x[1]}; };
  m.sys.field.divergence = [](const State& x) { return -2.0 * x[1]; };
  m.sys.guard.H = [](const State& x) { return x[0] - 1.0; };
  m.sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [](const State& x) { return State{0.0, x[1]}; };
  m.sys.fixed_points = std::vector<State>{};  // dx/dt = 1 never vanishes
  m.chart = axis_chart({1.0, 0.0}, 1);
  m.x0 = {0.0, 1.0};
  m.s_guess = 0.5;
  return m;
}

/// Expanding spiral in an annulus: radius grows at unit rate to the circle
/// r = 2, the reset halves the point back to r = 1, and the crossing angles
/// advance by one radian per lap, filling the section densely.
inline Model make_annulus() {
  Model m;
  m.sys.name = "annulus";
  m.sys.field.dimension = 2;
  m.sys.field.eval = [](const State& x) {
    const double r = std::hypot(x[0], x[1]);
    return State{x[0] / r - x[1], x[1] / r + x[0]};
  };
  m.sys.field.divergence = [](const State& x) {
    return 1.0 / std::hypot(x[0], x[1]);
  };
  m.sys.guard.H = [](const State& x) {
    return x[0] * x[0] + x[1] * x[1] - 4.0;
  };
  m.sys.guard.grad_H = [](const State& x) {
    return State{2.0 * x[0], 2.0 * x[1]};
  };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [](const State& x) {
    return State{0.5 * x[0], 0.5 * x[1]};
  };
  m.sys.fixed_points = std::vector<State>{};  // |f|^2 = 1 + r^2 > 0
  m.sys.domain_check = [](const State& x) {
    return std::hypot(x[0], x[1]) > 1e-8;
  };
  m.sys.exact_flow = [](const State& x, double t) {
    const double r0 = std::hypot(x[0], x[1]);
    const double th = std::atan2(x[1], x[0]) + t;
    return State{(r0 + t) * std::cos(th), (r0 + t) * std::sin(th)};
  };
  SectionChart c;  // angle chart on the outer circle; a closed curve
  c.chart = [](double s) { return State{2.0 * std::cos(s), 2.0 * std::sin(s)}; };
  c.inv_chart = [](const State& x) { return std::atan2(x[1], x[0]); };
  m.chart = c;
  m.x0 = {1.0, 0.0};
  m.s_guess = 0.0;
  return m;
}

/// Horizontal drift onto the line x = 2 whose reset encodes the logistic
/// map: the section-coordinate return map is exactly 4 y (1 - y).
inline Model make_logistic_line() {
  Model m;
  m.sys.name = "logistic-line";
  m.sys.field.dimension = 2;
  m.sys.field.eval = [](const State&) { return State{1.0, 0.0}; };
  m.sys.field.divergence = [](const State&) { return 0.0; };
  m.sys.guard.H = [](const State& x) { return x[0] - 2.0; };
  m.sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  m.sys.guard.direction = CrossingDirection::neg_to_pos;
  m.sys.reset.delta = [](const State& x) {
    return State{x[1], 4.0 * x[1] * (1.0 - x[1])};
  };
  m.sys.fixed_points = std::vector<State>{};  // dx/dt = 1 never vanishes
  m.chart = axis_chart({2.0, 0.0}, 1);
  m.x0 = {0.0, 0.2};
  m.s_guess = 0.75;
  return m;
}

// ---------------------------------------------------------------------------
// Registry

inline std::vector<std::string> model_names() {
  return {"vdp",          "polar",  "polar-cartesian", "rimless-wheel",
          "noninvariance", "annulus", "logistic-line"};
}

namespace detail {

class ParamReader {
 public:
  explicit ParamReader(const std::map<std::string, double>& params)
      : params_(params) {}

  double take(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return params_.count(key) > 0;
  }

  void finish(const std::string& model) const {
    for (const auto& [key, value] : params_) {
      (void)value;
      if (!used_.count(key))
        throw std::invalid_argument("model '" + model +
                                    "': unknown parameter '" + key + "'");
    }
  }

 private:
  const std::map<std::string, double>& params_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Construct a registry model by name. Unknown names and unknown parameter
/// keys are rejected so config typos fail loudly.
inline Model make_model(const std::string& name,
                        const std::map<std::string, double>& params = {}) {
  detail::ParamReader rd(params);
  Model m;
  if (name == "vdp") {
    const double mu = rd.take("mu", 1.0);
    if (rd.has("m")) {
      const double slope = rd.take("m", 0.0);
      if (!rd.has("A") || !rd.has("B"))
        throw std::invalid_argument(
            "model 'vdp': linear reset needs A and B alongside m");
      m = make_vdp_linear(mu, slope, rd.take("A", 0.0), rd.take("B", 0.0));
    } else {
      m = make_vdp_scale(mu, rd.take("c", -1.5));
    }
  } else if (name == "polar" || name == "polar-cartesian") {
    PolarParams p;
    p.alpha = rd.take("alpha", p.alpha);
    p.beta = rd.take("beta", p.beta);
    p.gamma = rd.take("gamma", p.gamma);
    m = name == "polar" ? make_polar(p) : make_polar_cartesian(p);
  } else if (name == "rimless-wheel") {
    RimlessWheelParams p;
    p.delta = rd.take("delta", p.delta);
    p.alpha = rd.take("alpha", p.alpha);
    p.zeta = rd.take("zeta", p.zeta);
    p.ell = rd.take("ell", p.ell);
    m = make_rimless_wheel(p);
  } else if (name == "noninvariance") {
    m = make_noninvariance();
  } else if (name == "annulus") {
    m = make_annulus();
  } else if (name == "logistic-line") {
    m = make_logistic_line();
  } else {
    std::string names;
    for (const std::string& n : model_names()) names += " " + n;
    throw std::invalid_argument("unknown model '" + name + "'; available:" +
                                names);
  }
  rd.finish(name);
  return m;
}

}  // namespace hybridcycles
