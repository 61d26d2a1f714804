// Limit-set drivers: interval-map classification, finite-set cycle
// detection, the scalar hybrid driver with its separation diagnostics, and
// omega-limit estimation on full hybrid systems.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <hybridcycles/limits.hpp>
#include <hybridcycles/models.hpp>

using namespace hybridcycles;
using Catch::Approx;

TEST_CASE("affine contraction settles on its fixed point", "[limits][map]") {
  DiscreteMapDef m;
  m.P = [](double x) { return 0.5 * x + 1.0; };
  m.lo = 0.0;
  m.hi = 4.0;

  const CycleResult r = classify_interval_map(m, 0.25);
  REQUIRE(r.kind == CycleResult::Kind::fixed_point);
  REQUIRE(r.period == 1);
  REQUIRE(r.orbit.size() == 1);
  REQUIRE(r.orbit[0] == Approx(2.0).margin(1e-6));
  REQUIRE_FALSE(r.injectivity_violation);
  REQUIRE(kind_label(r) == "fixed-point");
}

TEST_CASE("pure negation oscillates with period two", "[limits][map]") {
  DiscreteMapDef m;
  m.P = [](double x) { return -x; };
  m.lo = -1.0;
  m.hi = 1.0;

  const CycleResult r = classify_interval_map(m, 0.7);
  REQUIRE(r.kind == CycleResult::Kind::cycle);
  REQUIRE(r.period == 2);
  REQUIRE(r.orbit.size() == 2);
  const double lo = std::min(r.orbit[0], r.orbit[1]);
  const double hi = std::max(r.orbit[0], r.orbit[1]);
  REQUIRE(lo == Approx(-0.7).margin(1e-10));
  REQUIRE(hi == Approx(0.7).margin(1e-10));
  REQUIRE(kind_label(r) == "period-2 cycle");
}

TEST_CASE("chaotic map is flagged, not classified", "[limits][map]") {
  DiscreteMapDef m;
  m.P = [](double x) { return 4.0 * x * (1.0 - x); };
  m.lo = 0.0;
  m.hi = 1.0;

  const CycleResult r = classify_interval_map(m, 0.2, 20000);
  REQUIRE(r.kind == CycleResult::Kind::undecided);
  REQUIRE(r.injectivity_violation);
}

TEST_CASE("alternating convergence is not mistaken for a two-cycle", "[limits][map]") {
  // slope -0.9 through the fixed point 1: iterates alternate sides while
  // converging, which naive even/odd tail tests misread
  DiscreteMapDef m;
  m.P = [](double x) { return -0.9 * (x - 1.0) + 1.0; };
  m.lo = -1.0;
  m.hi = 3.0;

  const CycleResult r = classify_interval_map(m, 0.2);
  REQUIRE(r.kind == CycleResult::Kind::fixed_point);
  REQUIRE(r.orbit[0] == Approx(1.0).margin(1e-6));
  REQUIRE_FALSE(r.injectivity_violation);
}

TEST_CASE("map leaving the interval violates the self-map hypothesis", "[limits][map]") {
  // the dichotomy only holds for maps of the interval into itself, so an
  // escaping image is rejected up front rather than classified
  DiscreteMapDef m;
  m.P = [](double x) { return 2.0 * x + 1.0; };
  m.lo = -1.0;
  m.hi = 10.0;
  REQUIRE_THROWS_AS(classify_interval_map(m, 0.5), HypothesisError);
}

TEST_CASE("finite-set iteration: singleton fixed point", "[limits][finite]") {
  FiniteImpactSet set{{2.5}};
  const CycleResult r =
      detect_cycle_finite(set, [](double x) { return x; }, 2.5);
  REQUIRE(r.kind == CycleResult::Kind::fixed_point);
  REQUIRE(r.period == 1);
  REQUIRE(r.transient_length == 0);
  REQUIRE(r.orbit == std::vector<double>{2.5});
}

TEST_CASE("finite-set iteration: transient into a two-cycle", "[limits][finite]") {
  FiniteImpactSet set{{1.0, 2.0, 3.0}};
  auto M = [](double x) {
    if (x < 1.5) return 2.0;
    if (x < 2.5) return 3.0;
    return 2.0;
  };
  const CycleResult r = detect_cycle_finite(set, M, 1.0);
  REQUIRE(r.kind == CycleResult::Kind::cycle);
  REQUIRE(r.period == 2);
  REQUIRE(r.transient_length == 1);
  REQUIRE(r.orbit == std::vector<double>{2.0, 3.0});
  REQUIRE(r.iterations <= 3 + r.period);
}

TEST_CASE("finite-set iteration rejects off-set values", "[limits][finite]") {
  FiniteImpactSet set{{1.0, 2.0}};
  REQUIRE_THROWS_AS(
      detect_cycle_finite(set, [](double) { return 1.5; }, 1.0),
      HypothesisError);
}

TEST_CASE("pigeonhole bound on random finite maps", "[limits][finite][property]") {
  std::mt19937 rng(7u);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<double> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = static_cast<double>(i);
    std::vector<int> img(n);
    for (int& v : img) v = static_cast<int>(rng() % n);

    FiniteImpactSet set{pts};
    auto M = [&](double x) {
      return static_cast<double>(img[static_cast<int>(x + 0.5)]);
    };
    const CycleResult r =
        detect_cycle_finite(set, M, static_cast<double>(rng() % n));
    REQUIRE((r.kind == CycleResult::Kind::fixed_point ||
             r.kind == CycleResult::Kind::cycle));
    REQUIRE(r.period >= 1);
    REQUIRE(r.period <= n);
    REQUIRE(r.iterations == r.transient_length + r.period);
    REQUIRE(r.iterations <= n + r.period);
  }
}

TEST_CASE("scalar driver: sawtooth relaxation", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double) { return 1.0; };
  sys.guard_points = {1.0};
  sys.delta = [](double) { return 0.0; };
  sys.r_lo = -0.5;
  sys.r_hi = 1.2;
  sys.fixed_points = std::vector<double>{};  // field never vanishes

  const CycleResult r = hybrid_1d_run(sys, -0.5);
  REQUIRE(r.kind == CycleResult::Kind::cycle);
  REQUIRE(r.period == 1);
  REQUIRE(r.orbit == std::vector<double>{1.0});
  REQUIRE(r.transient_length == 0);
  REQUIRE(r.period_time == Approx(1.0).margin(1e-9));
  REQUIRE(r.separation_checked);
  REQUIRE(r.eta == Approx(1.0).margin(1e-12));
  REQUIRE(r.xi == Approx(1.0).margin(1e-12));
  REQUIRE(r.min_impact_gap_time >= r.eta / r.xi - 1e-9);
}

TEST_CASE("scalar driver: two guard points, period two", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double) { return 1.0; };
  sys.guard_points = {1.0, 2.0};
  sys.delta = [](double g) { return g < 1.5 ? 1.5 : 0.0; };
  sys.r_lo = -0.2;
  sys.r_hi = 2.2;
  sys.fixed_points = std::vector<double>{};

  const CycleResult r = hybrid_1d_run(sys, 0.0);
  REQUIRE(r.kind == CycleResult::Kind::cycle);
  REQUIRE(r.period == 2);
  REQUIRE(r.orbit.size() == 2);
  REQUIRE(r.orbit[0] == Approx(1.0).margin(1e-9));
  REQUIRE(r.orbit[1] == Approx(2.0).margin(1e-9));
  REQUIRE(r.period_time == Approx(1.5).margin(1e-9));
  REQUIRE(r.eta == Approx(0.5).margin(1e-12));
  REQUIRE(r.min_impact_gap_time >= r.eta / r.xi - 1e-9);
}

TEST_CASE("scalar driver: saturating drift", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double x) { return 2.0 - x; };
  sys.guard_points = {1.0};
  sys.delta = [](double) { return 0.0; };
  sys.r_lo = -0.2;
  sys.r_hi = 1.5;
  // no declared fixed points: the zero of f sits outside the interval

  const CycleResult r = hybrid_1d_run(sys, 0.0);
  REQUIRE(r.kind == CycleResult::Kind::cycle);
  REQUIRE(r.period == 1);
  REQUIRE(r.period_time == Approx(std::log(2.0)).margin(1e-9));
  REQUIRE_FALSE(r.separation_checked);
  REQUIRE(r.note.find("unchecked") != std::string::npos);
  REQUIRE(std::isnan(r.min_fixed_point_distance));
}

TEST_CASE("scalar driver: orbit parked at an equilibrium is undecided", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double x) { return -x; };
  sys.guard_points = {0.5};
  sys.delta = [](double) { return 0.2; };
  sys.r_lo = -1.0;
  sys.r_hi = 1.0;
  sys.fixed_points = std::vector<double>{0.0};

  HybridOptions opts;
  opts.max_time = 50.0;
  const CycleResult r = hybrid_1d_run(sys, 0.8, opts);
  REQUIRE(r.kind == CycleResult::Kind::undecided);
  REQUIRE(r.note.find("fixed point") != std::string::npos);
  REQUIRE(r.min_fixed_point_distance == Approx(0.0).margin(1e-3));
}

TEST_CASE("scalar driver: escapes are divergent", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double) { return 1.0; };
  sys.guard_points = {0.5};
  sys.delta = [](double) { return 0.8; };
  sys.r_lo = 0.0;
  sys.r_hi = 1.0;

  const CycleResult flow_out = hybrid_1d_run(sys, 0.0);
  REQUIRE(flow_out.kind == CycleResult::Kind::divergent);

  sys.delta = [](double) { return 1.5; };  // image outside the interval
  const CycleResult jump_out = hybrid_1d_run(sys, 0.0);
  REQUIRE(jump_out.kind == CycleResult::Kind::divergent);
  REQUIRE(jump_out.note.find("reset image") != std::string::npos);
}

TEST_CASE("scalar driver: chained resets violate the hypotheses", "[limits][hybrid1d]") {
  HybridSystem1D sys;
  sys.f = [](double) { return 1.0; };
  sys.guard_points = {0.3, 0.6};
  sys.delta = [](double) { return 0.6; };  // every image is a guard point
  sys.r_lo = 0.0;
  sys.r_hi = 1.0;

  REQUIRE_THROWS_AS(hybrid_1d_run(sys, 0.0), HypothesisError);
}

TEST_CASE("omega estimate: relaxation oscillator settles on period one", "[limits][omega]") {
  const Model m = make_vdp_scale();
  const OmegaEstimate est =
      omega_estimate(m.sys, m.x0, 120.0, 45.0, {}, &m.chart);

  REQUIRE(est.result.kind == CycleResult::Kind::cycle);
  REQUIRE(est.result.period == 1);
  REQUIRE(est.result.orbit.size() == 1);
  REQUIRE(est.result.orbit[0] == Approx(-1.0498).margin(5e-3));
  // section-to-section return time, shorter than the smooth period because
  // the reset skips part of the loop
  REQUIRE(est.result.period_time > 1.0);
  REQUIRE(est.result.period_time < 3.0);
  REQUIRE(est.cloud.size() == 1);
}

TEST_CASE("omega estimate: dense angles on the annulus", "[limits][omega]") {
  const Model m = make_annulus();
  const OmegaEstimate est =
      omega_estimate(m.sys, m.x0, 20.0, 40.0, {}, &m.chart);

  REQUIRE(est.result.dense_nonperiodic);
  REQUIRE(est.result.kind == CycleResult::Kind::undecided);
  REQUIRE(est.section_coords.size() >= 16);
  // crossings march around the section instead of repeating
  std::vector<double> sorted = est.section_coords;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted.back() - sorted.front() > 3.0);
}

TEST_CASE("omega estimate: impact-free decay reports the equilibrium", "[limits][omega]") {
  HybridSystemDef sys;
  sys.field.dimension = 1;
  sys.field.eval = [](const State& x) { return State{-x[0]}; };
  sys.guard.H = [](const State& x) { return x[0] + 5.0; };
  sys.guard.direction = CrossingDirection::either;
  sys.reset.delta = [](const State& x) { return x; };
  sys.name = "decay";

  const OmegaEstimate est = omega_estimate(sys, {1.0}, 25.0, 5.0);
  REQUIRE(est.result.kind == CycleResult::Kind::fixed_point);
  REQUIRE(est.cloud.size() == 1);
  REQUIRE(est.cloud[0][0] == Approx(0.0).margin(1e-6));
  REQUIRE(est.result.note.find("equilibrium") != std::string::npos);
}
