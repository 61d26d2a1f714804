#pragma once

// Scalar coordinate charts on a guard surface. Planar sections are curves,
// so one coordinate suffices; higher-dimensional sections get ad-hoc affine
// charts where needed (see determinant_test).

#include <functional>

#include "core.hpp"

namespace hybridcycles {

/// Scalar chart s -> chart(s) in state space with inverse for on-surface
/// states. `chart(inv_chart(x))` must reproduce x for states on the surface.
struct SectionChart {
  std::function<State(double)> chart;
  std::function<double(const State&)> inv_chart;

  void validate() const {
    if (!chart || !inv_chart)
      throw std::invalid_argument("SectionChart: chart and inverse required");
  }

  /// Tangent d chart / d s by central difference.
  State tangent(double s, double h = 1e-6) const {
    const State a = chart(s + h);
    const State b = chart(s - h);
    State out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - b[i]) / (2 * h);
    return out;
  }
};

/// Chart along a coordinate axis: s occupies slot `coord`, the other
/// components stay pinned at `base`. Covers every built-in planar section.
inline SectionChart axis_chart(State base, std::size_t coord) {
  SectionChart c;
  c.chart = [base, coord](double s) {
    State x = base;
    x[coord] = s;
    return x;
  };
  c.inv_chart = [coord](const State& x) { return x[coord]; };
  return c;
}

/// Chart along the ray at angle `angle` through the origin (radial charts
/// for circular or angular guards in the plane).
inline SectionChart ray_chart(double angle) {
  SectionChart c;
  c.chart = [angle](double s) {
    return State{s * std::cos(angle), s * std::sin(angle)};
  };
  c.inv_chart = [](const State& x) { return norm(x); };
  return c;
}

}  // namespace hybridcycles
