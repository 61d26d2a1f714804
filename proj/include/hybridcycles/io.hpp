#pragma once

// CSV and JSON output. CSV numbers are printed with %.17g so files round-trip
// doubles exactly and reruns diff clean.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "hybrid.hpp"
#include "limits.hpp"
#include "poincare.hpp"

namespace hybridcycles {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Trajectory as one row per stored integration node. impact_flag is 1 on
/// the final node of a segment that ends in an impact (the pre-impact state).
inline void write_trajectory_csv(std::ostream& os,
                                 const HybridTrajectory& traj) {
  std::size_t dim = 0;
  for (const ContinuousSegment& seg : traj.segments)
    dim = std::max(dim, static_cast<std::size_t>(seg.dimension));
  os << "t";
  for (std::size_t i = 0; i < dim; ++i) os << ",x" << i;
  os << ",segment_index,impact_flag\n";
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const ContinuousSegment& seg = traj.segments[k];
    const bool ends_in_impact = k < traj.impacts.size();
    for (std::size_t j = 0; j < seg.nodes.size(); ++j) {
      const auto& [t, x] = seg.nodes[j];
      os << fmt_g17(t);
      for (double xi : x) os << "," << fmt_g17(xi);
      const bool last = j + 1 == seg.nodes.size();
      os << "," << k << "," << (ends_in_impact && last ? 1 : 0) << "\n";
    }
  }
}

inline void write_trajectory_csv(const std::string& path,
                                 const HybridTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_trajectory_csv(os, traj);
}

/// One row per impact: time, pre-impact state, post-impact state,
/// transversality <grad H, f> at the impact point.
inline void write_impacts_csv(std::ostream& os, const HybridTrajectory& traj) {
  std::size_t dim = 0;
  for (const ImpactEvent& ev : traj.impacts)
    dim = std::max(dim, ev.x_minus.size());
  os << "t";
  for (std::size_t i = 0; i < dim; ++i) os << ",x_minus" << i;
  for (std::size_t i = 0; i < dim; ++i) os << ",x_plus" << i;
  os << ",transversality\n";
  for (const ImpactEvent& ev : traj.impacts) {
    os << fmt_g17(ev.t);
    for (double xi : ev.x_minus) os << "," << fmt_g17(xi);
    for (double xi : ev.x_plus) os << "," << fmt_g17(xi);
    os << "," << fmt_g17(ev.transversality_value) << "\n";
  }
}

inline void write_impacts_csv(const std::string& path,
                              const HybridTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_impacts_csv(os, traj);
}

using json = nlohmann::ordered_json;

inline json to_json(const StabilityReport& r) {
  json j;
  j["fixed_point_residual"] = r.fixed_point_residual;
  j["period"] = r.period;
  j["reset_derivative"] = r.reset_derivative;
  j["speed_ratio"] = r.speed_ratio;
  j["sine_ratio"] = r.sine_ratio;
  j["divergence_factor"] = r.divergence_factor;
  j["geometric_ratio"] = r.geometric_ratio;
  j["product"] = r.product;
  j["product_signed"] = r.product_signed;
  j["fd_check"] = r.fd_check;
  j["verdict"] = r.verdict;
  return j;
}

inline json to_json(const DeterminantReport& r) {
  json j;
  j["value"] = r.value;
  j["reset_volume_factor"] = r.reset_volume_factor;
  j["speed_ratio"] = r.speed_ratio;
  j["sine_ratio"] = r.sine_ratio;
  j["divergence_factor"] = r.divergence_factor;
  j["period"] = r.period;
  j["verdict"] = r.verdict;
  return j;
}

inline json to_json(const HypothesisReport& r) {
  json j;
  j["all_passed"] = r.all_passed();
  json checks = json::array();
  for (const HypothesisCheck& c : r.checks) {
    json jc;
    jc["name"] = c.name;
    jc["checked"] = c.checked;
    jc["pass"] = c.pass;
    jc["value"] = c.value;
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(jc);
  }
  j["checks"] = checks;
  return j;
}

inline json to_json(const CycleResult& r) {
  json j;
  j["kind"] = kind_label(r);
  j["period"] = r.period;
  j["orbit"] = r.orbit;
  j["transient_length"] = r.transient_length;
  j["iterations"] = r.iterations;
  if (r.injectivity_violation) j["injectivity_violation"] = true;
  if (r.dense_nonperiodic) j["dense_nonperiodic"] = true;
  if (std::isfinite(r.period_time)) j["period_time"] = r.period_time;
  if (std::isfinite(r.eta)) j["eta"] = r.eta;
  if (std::isfinite(r.xi)) j["xi"] = r.xi;
  if (std::isfinite(r.min_impact_gap_time))
    j["min_impact_gap_time"] = r.min_impact_gap_time;
  if (std::isfinite(r.min_fixed_point_distance))
    j["min_fixed_point_distance"] = r.min_fixed_point_distance;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const OmegaEstimate& est) {
  json j;
  j["result"] = to_json(est.result);
  j["impacts_in_window"] = est.impact_times.size();
  j["section_coords"] = est.section_coords;
  json cloud = json::array();
  for (const State& x : est.cloud) cloud.push_back(x);
  j["cloud"] = cloud;
  return j;
}

}  // namespace hybridcycles
