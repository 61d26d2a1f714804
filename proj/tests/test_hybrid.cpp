// Hybrid flow tests: reset bookkeeping, the post-impact convention, the
// termination taxonomy (budget, Zeno, domain exit, blow-up), and run
// concatenation consistency.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <hybridcycles/hybrid.hpp>
#include <hybridcycles/models.hpp>

using namespace hybridcycles;
using Catch::Approx;

namespace {

// unit drift to the right, reset jumps back to x0 = c keeping the second
// component: impacts land on a strict schedule, everything is exact
HybridSystemDef bouncer(double wall, double back) {
  HybridSystemDef sys;
  sys.field.dimension = 2;
  sys.field.eval = [](const State&) { return State{1.0, 0.0}; };
  sys.field.divergence = [](const State&) { return 0.0; };
  sys.guard.H = [wall](const State& x) { return x[0] - wall; };
  sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  sys.guard.direction = CrossingDirection::neg_to_pos;
  sys.reset.delta = [back](const State& x) { return State{back, x[1]}; };
  sys.name = "bouncer";
  return sys;
}

}  // namespace

TEST_CASE("drift bouncer hits the wall on schedule", "[hybrid][impacts]") {
  const HybridSystemDef sys = bouncer(1.0, 0.0);
  const HybridTrajectory traj = hybrid_flow(sys, {0.0, 0.3}, 3.5);

  REQUIRE(traj.termination == Termination::time_elapsed);
  REQUIRE(traj.impacts.size() == 3);
  for (std::size_t k = 0; k < traj.impacts.size(); ++k) {
    const ImpactEvent& ev = traj.impacts[k];
    REQUIRE(ev.t == Approx(static_cast<double>(k + 1)).margin(1e-9));
    REQUIRE(ev.x_minus[0] == Approx(1.0).margin(1e-9));
    REQUIRE(ev.x_plus[0] == Approx(0.0).margin(1e-12));
    REQUIRE(ev.x_minus[1] == Approx(0.3).margin(1e-12));
    REQUIRE(ev.transversality_value == Approx(1.0).margin(1e-9));
  }
  REQUIRE(traj.t_total == Approx(3.5));
  REQUIRE(traj.final_state()[0] == Approx(0.5).margin(1e-9));
  REQUIRE(traj.segments.size() == 4);
}

TEST_CASE("state_at uses the post-impact convention", "[hybrid][impacts]") {
  const HybridSystemDef sys = bouncer(1.0, 0.0);
  const HybridTrajectory traj = hybrid_flow(sys, {0.0, 0.3}, 2.5);
  const double t1 = traj.impacts[0].t;

  // exactly at the impact time the later segment wins
  REQUIRE(traj.state_at(t1)[0] == Approx(0.0).margin(1e-9));
  REQUIRE(traj.state_at(t1 - 1e-6)[0] == Approx(1.0).margin(1e-5));
  REQUIRE(traj.state_at(0.25)[0] == Approx(0.25).margin(1e-9));
}

TEST_CASE("impact budget stops the run at the last event", "[hybrid][budget]") {
  const HybridSystemDef sys = bouncer(1.0, 0.0);
  const HybridTrajectory traj = hybrid_flow(sys, {0.5, 0.0}, 100.0, {}, 5);

  REQUIRE(traj.termination == Termination::impact_budget);
  REQUIRE(traj.impacts.size() == 5);
  // first impact after 0.5, then unit legs
  REQUIRE(traj.impacts.back().t == Approx(4.5).margin(1e-8));
  REQUIRE(traj.t_total == Approx(traj.impacts.back().t));
}

TEST_CASE("zero impact budget records just the start", "[hybrid][budget]") {
  const HybridSystemDef sys = bouncer(1.0, 0.0);
  const HybridTrajectory traj = hybrid_flow(sys, {0.2, 0.0}, 10.0, {}, 0);
  REQUIRE(traj.impacts.empty());
  REQUIRE(traj.segments.size() == 1);
  REQUIRE(traj.t_total == 0.0);
  REQUIRE(traj.termination == Termination::impact_budget);

  REQUIRE(impact_sequence(sys, {0.2, 0.0}, 0).empty());
  const auto events = impact_sequence(sys, {0.2, 0.0}, 4);
  REQUIRE(events.size() == 4);
  REQUIRE(events[3].t == Approx(3.8).margin(1e-8));
}

TEST_CASE("zero horizon is rejected", "[hybrid][errors]") {
  const HybridSystemDef sys = bouncer(1.0, 0.0);
  REQUIRE_THROWS_AS(hybrid_flow(sys, {0.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("geometric impact accumulation trips the Zeno heuristic", "[hybrid][zeno]") {
  // ball with restitution 0.5: gap halves each bounce, so consecutive gaps
  // eventually fall below min_impact_gap together
  HybridSystemDef sys;
  sys.field.dimension = 2;
  sys.field.eval = [](const State& x) { return State{x[1], -1.0}; };
  sys.guard.H = [](const State& x) { return x[0]; };
  sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  sys.guard.direction = CrossingDirection::pos_to_neg;
  sys.reset.delta = [](const State& x) { return State{x[0], -0.5 * x[1]}; };
  sys.name = "ball";

  HybridOptions opts;
  opts.min_impact_gap = 1e-4;  // trip well before the gaps reach roundoff
  const HybridTrajectory traj = hybrid_flow(sys, {1.0, 0.0}, 20.0, opts);
  REQUIRE(traj.termination == Termination::zeno_suspected);
  REQUIRE(traj.impacts.size() > 10);
  REQUIRE(traj.impacts.size() < 30);
  // accumulation point of the bounce times: t* = sqrt(2) + 2*sqrt(2)
  REQUIRE(traj.t_total == Approx(3.0 * std::sqrt(2.0)).margin(1e-3));
  REQUIRE(traj.termination_detail.find("gap") != std::string::npos);
}

TEST_CASE("reset chains cut off after three immediate re-fires", "[hybrid][zeno]") {
  // reset image stays on the guard and departs in the triggering direction,
  // so each impact re-fires instantly
  HybridSystemDef sys = bouncer(0.0, 0.0);
  sys.reset.delta = [](const State& x) { return State{0.0, x[1] + 1.0}; };

  const HybridTrajectory traj = hybrid_flow(sys, {-0.5, 0.0}, 10.0);
  REQUIRE(traj.termination == Termination::zeno_suspected);
  REQUIRE(traj.termination_detail.find("chained") != std::string::npos);
  REQUIRE(traj.impacts.size() == 4);  // the crossing plus three chained fires
  for (const ImpactEvent& ev : traj.impacts)
    REQUIRE(ev.t == Approx(0.5).margin(1e-9));
}

TEST_CASE("reset onto the guard without re-trigger continues cleanly", "[hybrid][zeno]") {
  // x0' = x1: approach the guard with x1 < 0, reset flips x1, and the image
  // sits exactly on the guard while departing against the trigger direction
  HybridSystemDef sys;
  sys.field.dimension = 2;
  sys.field.eval = [](const State& x) { return State{x[1], 0.0}; };
  sys.guard.H = [](const State& x) { return x[0] - 1.0; };
  sys.guard.grad_H = [](const State&) { return State{1.0, 0.0}; };
  sys.guard.direction = CrossingDirection::pos_to_neg;
  sys.reset.delta = [](const State& x) { return State{1.0, -x[1]}; };
  sys.name = "flip";

  const HybridTrajectory traj = hybrid_flow(sys, {2.0, -1.0}, 2.5);
  REQUIRE(traj.termination == Termination::time_elapsed);
  REQUIRE(traj.impacts.size() == 1);
  REQUIRE(traj.impacts[0].t == Approx(1.0).margin(1e-9));
  // departs along +x0 and never returns
  REQUIRE(traj.final_state()[0] == Approx(2.5).margin(1e-8));
}

TEST_CASE("leaving the declared domain stops the run", "[hybrid][domain]") {
  HybridSystemDef sys = bouncer(10.0, 0.0);
  sys.domain_check = [](const State& x) { return x[0] < 5.0; };
  HybridOptions opts;
  opts.ode.h_max = 0.5;

  const HybridTrajectory traj = hybrid_flow(sys, {0.0, 0.0}, 20.0, opts);
  REQUIRE(traj.termination == Termination::left_domain);
  REQUIRE(traj.final_state()[0] >= 5.0);
  REQUIRE(traj.t_total < 6.0);
  REQUIRE(traj.impacts.empty());
}

TEST_CASE("finite-time blow-up truncates with diagnostics", "[hybrid][blowup]") {
  HybridSystemDef sys;
  sys.field.dimension = 2;
  sys.field.eval = [](const State& x) { return State{x[0] * x[0], 0.0}; };
  sys.guard.H = [](const State& x) { return x[0] + 10.0; };
  sys.guard.direction = CrossingDirection::neg_to_pos;
  sys.reset.delta = [](const State& x) { return x; };
  sys.name = "quadratic-blowup";

  const HybridTrajectory traj = hybrid_flow(sys, {1.0, 0.0}, 2.0);
  REQUIRE(traj.termination == Termination::blow_up);
  REQUIRE_FALSE(traj.termination_detail.empty());
  REQUIRE(traj.t_total <= 1.01);
  REQUIRE(traj.t_total > 0.9);  // got close to the pole before giving up
}

TEST_CASE("split runs concatenate to the full run", "[hybrid][property]") {
  const Model m = make_vdp_scale();
  const double T = 12.0;

  const HybridTrajectory full = hybrid_flow(m.sys, m.x0, T);
  REQUIRE(full.impacts.size() >= 2);
  // split strictly between two impacts so neither piece straddles an event
  const double T1 = 0.5 * (full.impacts[0].t + full.impacts[1].t);
  const HybridTrajectory head = hybrid_flow(m.sys, m.x0, T1);
  const HybridTrajectory tail =
      hybrid_flow(m.sys, head.final_state(), T - T1);

  REQUIRE(full.termination == Termination::time_elapsed);
  std::vector<double> stitched;
  for (const ImpactEvent& ev : head.impacts) stitched.push_back(ev.t);
  for (const ImpactEvent& ev : tail.impacts) stitched.push_back(ev.t + T1);

  REQUIRE(stitched.size() == full.impacts.size());
  for (std::size_t k = 0; k < stitched.size(); ++k)
    REQUIRE(stitched[k] == Approx(full.impacts[k].t).margin(1e-6));

  const State& a = full.final_state();
  const State& b = tail.final_state();
  REQUIRE(a[0] == Approx(b[0]).margin(1e-6));
  REQUIRE(a[1] == Approx(b[1]).margin(1e-6));

  // state_at agrees with the stitched runs away from impacts
  const double t_probe = 0.5 * (T1 + T);
  const State c = full.state_at(t_probe);
  const State d = tail.state_at(t_probe - T1);
  REQUIRE(c[0] == Approx(d[0]).margin(1e-6));
  REQUIRE(c[1] == Approx(d[1]).margin(1e-6));
}

TEST_CASE("trajectory times are monotone with contiguous segments", "[hybrid][property]") {
  const Model m = make_vdp_scale();
  const HybridTrajectory traj = hybrid_flow(m.sys, m.x0, 25.0);

  REQUIRE(traj.segments.size() == traj.impacts.size() + 1);
  for (std::size_t k = 0; k + 1 < traj.segments.size(); ++k) {
    REQUIRE(traj.segments[k].t_end == Approx(traj.segments[k + 1].t_start));
    REQUIRE(traj.segments[k].t_end == Approx(traj.impacts[k].t));
    // segment boundary states straddle the reset
    const State& end = traj.segments[k].end_state();
    const State& start = traj.segments[k + 1].start_state();
    REQUIRE(end[0] == Approx(traj.impacts[k].x_minus[0]).margin(1e-12));
    REQUIRE(start[1] == Approx(traj.impacts[k].x_plus[1]).margin(1e-12));
  }
}
