// Model catalogue tests: registry dispatch, closed-form cross-checks for
// the radial family, the wheel's energy bookkeeping, hypothesis checks on
// the well-behaved models, and the counterexample gallery.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <hybridcycles/models.hpp>
#include <hybridcycles/poincare.hpp>

using namespace hybridcycles;
using Catch::Approx;

namespace {

HybridOptions tight() {
  HybridOptions opts;
  opts.ode.rel_tol = 1e-12;
  opts.ode.abs_tol = 1e-14;
  return opts;
}

}  // namespace

TEST_CASE("registry lists the catalogue and rejects junk", "[models][registry]") {
  const auto names = model_names();
  REQUIRE(names.size() == 7);
  for (const char* want :
       {"vdp", "polar", "polar-cartesian", "rimless-wheel", "noninvariance",
        "annulus", "logistic-line"})
    REQUIRE(std::find(names.begin(), names.end(), want) != names.end());

  REQUIRE_THROWS_AS(make_model("pendulum", {}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_model("vdp", {{"nu", 1.0}}), std::invalid_argument);
  // a linear section reset needs its anchor point
  REQUIRE_THROWS_AS(make_model("vdp", {{"m", 4.5}}), std::invalid_argument);

  const Model m = make_model("polar", {{"beta", 1.5}, {"alpha", 2.0}});
  REQUIRE(m.sys.name == "polar");
  REQUIRE(m.sys.field.dimension == 2);
}

TEST_CASE("oscillator jacobian matches finite differences", "[models][vdp]") {
  const Model m = make_vdp_scale();
  REQUIRE(m.sys.field.jacobian);

  const double h = 1e-6;
  for (const State& x : {State{0.3, -1.2}, State{1.0, 2.4}, State{-1.7, 0.2}}) {
    const auto J = m.sys.field.jacobian(x);
    for (std::size_t j = 0; j < 2; ++j) {
      // J[j] is the column d f / d x_j
      State xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const State fp = m.sys.field.eval(xp);
      const State fm = m.sys.field.eval(xm);
      for (std::size_t i = 0; i < 2; ++i)
        REQUIRE(J[j][i] == Approx((fp[i] - fm[i]) / (2.0 * h)).margin(1e-5));
    }
  }
}

TEST_CASE("radial closed-form flow matches the integrator", "[models][polar]") {
  const Model flat = make_polar({});
  REQUIRE(flat.sys.exact_flow);
  const State x0{1.4, 0.2};
  const double T = 0.9;
  const State a = flat.sys.exact_flow(x0, T);
  const State b = flow(flat.sys.field, x0, T, tight().ode).end_state();
  REQUIRE(a[0] == Approx(b[0]).margin(1e-9));
  REQUIRE(a[1] == Approx(b[1]).margin(1e-9));

  const Model cart = make_polar_cartesian({});
  const State y0{1.2 * std::cos(0.5), 1.2 * std::sin(0.5)};
  const State c = cart.sys.exact_flow(y0, 0.8);
  const State d = flow(cart.sys.field, y0, 0.8, tight().ode).end_state();
  REQUIRE(c[0] == Approx(d[0]).margin(1e-9));
  REQUIRE(c[1] == Approx(d[1]).margin(1e-9));
}

TEST_CASE("radial helpers respect the contraction threshold", "[models][polar]") {
  PolarParams p;
  p.alpha = 0.5;
  p.beta = 2.0;
  p.gamma = 0.0;  // lambda = 2 e^{-1/2} = 1.213 > 1
  REQUIRE(polar_derivative(p) > 1.0);
  REQUIRE_THROWS_AS(polar_fixed_radius(p), NumericalError);

  REQUIRE(polar_fixed_radius(PolarParams{}) == Approx(2.0946066).margin(1e-6));
  REQUIRE(polar_derivative(PolarParams{}) == Approx(0.0864278).margin(1e-6));

  PolarParams bad;
  bad.gamma = 1.0;
  bad.alpha = 0.5;  // needs gamma < alpha
  REQUIRE_THROWS_AS(make_polar(bad), std::invalid_argument);
}

TEST_CASE("wheel step map agrees with the energy integral", "[models][wheel]") {
  const RimlessWheelParams p;
  const Model m = make_rimless_wheel(p);
  const HybridOptions opts = tight();

  std::mt19937 rng(99u);
  std::uniform_real_distribution<double> pick(1.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double v_sq = pick(rng);
    const State pre{-p.delta - p.alpha, -std::sqrt(v_sq)};
    const State post = m.sys.reset.delta(pre);
    const TimeToImpact tti = time_to_impact(m.sys, post, opts);
    const double next_sq = tti.x_out[1] * tti.x_out[1];
    REQUIRE(next_sq == Approx(wheel_step_speed_sq(p, v_sq)).margin(1e-8));
  }

  // the fixed point of that recursion is where gain balances loss
  const double v_bar_sq = wheel_fixed_speed_sq(p);
  REQUIRE(wheel_step_speed_sq(p, v_bar_sq) == Approx(v_bar_sq).margin(1e-12));
  REQUIRE(v_bar_sq == Approx(3.6649295).margin(1e-6));
}

TEST_CASE("wheel gait: energy balance at the converged cycle", "[models][wheel]") {
  const RimlessWheelParams p;
  const WheelGaitResult gait = classify_wheel_gait(p);

  REQUIRE(gait.cycle_found);
  REQUIRE(gait.speed * gait.speed == Approx(wheel_fixed_speed_sq(p)).margin(1e-6));
  REQUIRE(gait.product == Approx(std::pow(std::cos(2.0 * p.delta), 2)).margin(1e-12));
  REQUIRE(gait.product < 1.0);
  REQUIRE(gait.impacts >= 6);
  REQUIRE(gait.min_field_norm > 0.1);  // never grazes the pendulum equilibrium

  REQUIRE(energy_gain(p) ==
          Approx(energy_loss(p, gait.speed)).margin(1e-6));
}

TEST_CASE("wheel gait: shallow slope falls back and topples", "[models][wheel]") {
  RimlessWheelParams p;
  p.alpha = 0.001;  // keeps delta > alpha but far below the gait threshold
  REQUIRE_FALSE(existence_inequality(p).holds);

  const WheelGaitResult gait = classify_wheel_gait(p);
  REQUIRE_FALSE(gait.cycle_found);
  REQUIRE(gait.note.find("toppled") != std::string::npos);
}

TEST_CASE("gait-existence criterion: reference values and edge cases", "[models][wheel]") {
  const RimlessWheelParams p;
  const ExistenceInequality base = existence_inequality(p);
  REQUIRE(base.lhs == Approx(0.0646021431).margin(1e-8));
  REQUIRE(base.rhs == Approx(0.0115350959).margin(1e-8));
  REQUIRE(base.holds);

  RimlessWheelParams flat_slope = p;
  flat_slope.alpha = 1e-9;  // no energy gain: inequality must fail
  REQUIRE_FALSE(existence_inequality(flat_slope).holds);

  RimlessWheelParams wide = p;
  wide.delta = M_PI / 4.0 - 1e-3;  // impacts absorb nearly everything
  REQUIRE_FALSE(existence_inequality(wide).holds);

  RimlessWheelParams degenerate = p;
  degenerate.delta = p.alpha / 2.0;  // delta <= alpha is outside the setup
  REQUIRE_THROWS_AS(existence_inequality(degenerate), std::invalid_argument);

  RimlessWheelParams illegal = p;
  illegal.delta = M_PI / 4.0;
  REQUIRE_THROWS_AS(existence_inequality(illegal), std::invalid_argument);
}

TEST_CASE("structural hypotheses hold on the cycle-carrying models", "[models][hypotheses]") {
  {
    const Model m = make_vdp_scale();
    SectionSamplingSpec spec;
    spec.chart = m.chart;
    spec.s_lo = -1.3;
    spec.s_hi = -0.8;
    spec.count = 25;
    const HypothesisReport rep = check_hypotheses(m.sys, spec);
    REQUIRE(rep.all_passed());
    REQUIRE(rep.checks.size() == 5);
  }
  {
    const Model m = make_polar_cartesian({});
    SectionSamplingSpec spec;
    spec.chart = m.chart;
    spec.s_lo = 1.5;
    spec.s_hi = 3.0;
    spec.count = 25;
    REQUIRE(check_hypotheses(m.sys, spec).all_passed());
  }
  {
    const Model m = make_rimless_wheel({});
    SectionSamplingSpec spec;
    spec.chart = m.chart;
    spec.s_lo = -2.5;
    spec.s_hi = -1.0;
    spec.count = 25;
    REQUIRE(check_hypotheses(m.sys, spec).all_passed());
  }
}

TEST_CASE("folded reset image is caught by the monotonicity check", "[models][hypotheses]") {
  const Model m = make_logistic_line();
  SectionSamplingSpec spec;
  spec.chart = m.chart;
  spec.s_lo = 0.1;
  spec.s_hi = 0.9;
  spec.count = 33;
  const HypothesisReport rep = check_hypotheses(m.sys, spec);
  REQUIRE_FALSE(rep.all_passed());
  const HypothesisCheck* mono = rep.find("image-monotone");
  REQUIRE(mono != nullptr);
  REQUIRE(mono->checked);
  REQUIRE_FALSE(mono->pass);
  // the fold is the only structural failure
  const HypothesisCheck* sep = rep.find("reset-separation");
  REQUIRE(sep != nullptr);
  REQUIRE(sep->pass);
}

TEST_CASE("closed section curve is caught by the interval check", "[models][hypotheses]") {
  const Model m = make_annulus();
  SectionSamplingSpec spec;
  spec.chart = m.chart;
  spec.s_lo = -M_PI;
  spec.s_hi = M_PI;
  spec.count = 33;
  const HypothesisReport rep = check_hypotheses(m.sys, spec);
  REQUIRE_FALSE(rep.all_passed());
  const HypothesisCheck* interval = rep.find("section-interval");
  REQUIRE(interval != nullptr);
  REQUIRE_FALSE(interval->pass);
  // without an interval the monotonicity check cannot run
  const HypothesisCheck* mono = rep.find("image-monotone");
  REQUIRE(mono != nullptr);
  REQUIRE_FALSE(mono->checked);
}

TEST_CASE("conveyor decay: impact values accumulate at zero", "[models][counterexamples]") {
  const Model m = make_noninvariance();
  const auto events = impact_sequence(m.sys, m.x0, 6);
  REQUIRE(events.size() == 6);
  for (std::size_t k = 0; k < events.size(); ++k) {
    // y solves y' = -y^2 on unit-time legs: y_n = 1 / (n + 1) at impacts
    REQUIRE(events[k].x_minus[1] ==
            Approx(1.0 / static_cast<double>(k + 2)).margin(1e-8));
    REQUIRE(events[k].t == Approx(static_cast<double>(k + 1)).margin(1e-8));
  }
}

TEST_CASE("annulus traps its orbits between the circles", "[models][counterexamples]") {
  const Model m = make_annulus();
  const HybridTrajectory traj = hybrid_flow(m.sys, m.x0, 1e4, {}, 30);
  REQUIRE(traj.impacts.size() == 30);
  for (const ContinuousSegment& seg : traj.segments)
    for (const auto& node : seg.nodes) {
      const double r = norm(node.second);
      REQUIRE(r >= 1.0 - 1e-6);
      REQUIRE(r <= 2.0 + 1e-6);
    }
}

TEST_CASE("line shuttle reproduces the logistic map on the section", "[models][counterexamples]") {
  const Model m = make_logistic_line();
  const HybridOptions opts = tight();
  for (double s : {0.2, 0.3, 0.51, 0.7, 0.88}) {
    REQUIRE(return_map_chart(m.sys, m.chart, s, opts) ==
            Approx(4.0 * s * (1.0 - s)).margin(1e-9));
  }
}
