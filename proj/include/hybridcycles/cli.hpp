#pragma once

// Command-line front end: simulate | stability | sweep | limits | verify.
// Configs are single JSON documents validated strictly (unknown keys are
// rejected) so typos fail with exit code 2 instead of running the wrong job.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "limits.hpp"
#include "models.hpp"
#include "poincare.hpp"
#include "verify.hpp"

namespace hybridcycles {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cli_detail {

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known)
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

inline double as_num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

inline double num_or(const json& j, const char* key, double fallback,
                     const std::string& where) {
  if (!j.contains(key)) return fallback;
  return as_num(j.at(key), where + "." + key);
}

inline std::vector<double> as_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(as_num(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline Model parse_model(const json& cfg) {
  if (!cfg.contains("model")) throw ConfigError("config: missing 'model'");
  const json& jm = cfg.at("model");
  check_keys(jm, "model", {"name", "params"});
  if (!jm.contains("name") || !jm.at("name").is_string())
    throw ConfigError("model.name must be a string");
  std::map<std::string, double> params;
  if (jm.contains("params")) {
    const json& jp = jm.at("params");
    if (!jp.is_object()) throw ConfigError("model.params must be an object");
    for (const auto& item : jp.items())
      params[item.key()] = as_num(item.value(), "model.params." + item.key());
  }
  try {
    return make_model(jm.at("name").get<std::string>(), params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline HybridOptions parse_options(const json& cfg) {
  HybridOptions opts;
  if (cfg.contains("integrator")) {
    const json& ji = cfg.at("integrator");
    check_keys(ji, "integrator",
               {"rel_tol", "abs_tol", "h_init", "h_min", "h_max", "max_steps"});
    opts.ode.rel_tol = num_or(ji, "rel_tol", opts.ode.rel_tol, "integrator");
    opts.ode.abs_tol = num_or(ji, "abs_tol", opts.ode.abs_tol, "integrator");
    opts.ode.h_init = num_or(ji, "h_init", opts.ode.h_init, "integrator");
    opts.ode.h_min = num_or(ji, "h_min", opts.ode.h_min, "integrator");
    opts.ode.h_max = num_or(ji, "h_max", opts.ode.h_max, "integrator");
    opts.ode.max_steps = static_cast<long>(
        num_or(ji, "max_steps", static_cast<double>(opts.ode.max_steps),
               "integrator"));
  }
  if (cfg.contains("events")) {
    const json& je = cfg.at("events");
    check_keys(je, "events",
               {"t_tol", "H_tol", "max_impacts", "min_impact_gap",
                "fixed_point_radius", "max_time", "return_horizon"});
    opts.t_tol = num_or(je, "t_tol", opts.t_tol, "events");
    opts.H_tol = num_or(je, "H_tol", opts.H_tol, "events");
    opts.max_impacts = static_cast<long>(
        num_or(je, "max_impacts", static_cast<double>(opts.max_impacts),
               "events"));
    opts.min_impact_gap =
        num_or(je, "min_impact_gap", opts.min_impact_gap, "events");
    opts.fixed_point_radius =
        num_or(je, "fixed_point_radius", opts.fixed_point_radius, "events");
    opts.max_time = num_or(je, "max_time", opts.max_time, "events");
    opts.return_horizon =
        num_or(je, "return_horizon", opts.return_horizon, "events");
  }
  try {
    opts.ode.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return opts;
}

inline std::filesystem::path prep_out_dir(const std::string& out_dir) {
  std::filesystem::path p(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec && !std::filesystem::is_directory(p))
    throw ConfigError("cannot create output directory: " + p.string());
  return p;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

// -- simulate ---------------------------------------------------------------

inline int cmd_simulate(const json& cfg, const std::string& out_dir) {
  check_keys(cfg, "config",
             {"model", "x0", "horizon", "impacts", "integrator", "events"});
  Model model = parse_model(cfg);
  const HybridOptions opts = parse_options(cfg);
  State x0 = model.x0;
  if (cfg.contains("x0")) {
    x0 = as_vec(cfg.at("x0"), "x0");
    if (static_cast<int>(x0.size()) != model.sys.field.dimension)
      throw ConfigError("x0 has dimension " + std::to_string(x0.size()) +
                        ", model needs " +
                        std::to_string(model.sys.field.dimension));
  }
  if (!cfg.contains("horizon") && !cfg.contains("impacts"))
    throw ConfigError("config: need 'horizon' or 'impacts'");
  const double horizon = num_or(cfg, "horizon", opts.max_time, "config");
  if (horizon < 0.0) throw ConfigError("horizon must be >= 0");
  const long budget =
      static_cast<long>(num_or(cfg, "impacts", -1.0, "config"));

  const auto dir = prep_out_dir(out_dir);
  if (horizon == 0.0 && budget < 0) {
    // empty run: headers only, nothing simulated
    std::ofstream tcsv(dir / "trajectory.csv");
    tcsv << "t";
    for (int i = 0; i < model.sys.field.dimension; ++i) tcsv << ",x" << i;
    tcsv << ",segment_index,impact_flag\n";
    std::ofstream icsv(dir / "impacts.csv");
    icsv << "t,transversality\n";
    json summary;
    summary["model"] = model.sys.name;
    summary["termination"] = "time-elapsed";
    summary["t_total"] = 0.0;
    summary["impacts"] = 0;
    write_json_file(dir / "summary.json", summary);
    std::cout << "empty horizon; wrote headers to " << dir.string() << "\n";
    return 0;
  }

  const HybridTrajectory traj =
      hybrid_flow(model.sys, x0, horizon, opts, budget);
  write_trajectory_csv((dir / "trajectory.csv").string(), traj);
  write_impacts_csv((dir / "impacts.csv").string(), traj);

  json summary;
  summary["model"] = model.sys.name;
  summary["termination"] = to_string(traj.termination);
  if (!traj.termination_detail.empty())
    summary["termination_detail"] = traj.termination_detail;
  summary["t_total"] = traj.t_total;
  summary["impacts"] = traj.impacts.size();
  summary["final_state"] = traj.final_state();
  if (!traj.impacts.empty()) {
    summary["last_impact_t"] = traj.impacts.back().t;
    summary["last_x_minus"] = traj.impacts.back().x_minus;
    summary["last_x_plus"] = traj.impacts.back().x_plus;
  }
  write_json_file(dir / "summary.json", summary);

  std::cout << model.sys.name << ": " << traj.impacts.size() << " impacts, t="
            << traj.t_total << ", termination " << to_string(traj.termination)
            << "\n";
  switch (traj.termination) {
    case Termination::zeno_suspected:
      std::cerr << "zeno suspicion: " << traj.termination_detail << "\n";
      return 4;
    case Termination::blow_up:
      std::cerr << "numerical blow-up: " << traj.termination_detail << "\n";
      return 3;
    default:
      return 0;
  }
}

// -- stability ----------------------------------------------------------------

inline int cmd_stability(const json& cfg, const std::string& out_dir) {
  check_keys(cfg, "config",
             {"model", "s_guess", "s", "multi", "integrator", "events"});
  Model model = parse_model(cfg);
  const HybridOptions opts = parse_options(cfg);

  StabilityReport rep;
  double s_star = 0.0;
  if (cfg.contains("multi")) {
    const std::vector<double> pts = as_vec(cfg.at("multi"), "multi");
    rep = derivative_multi(model.sys, model.chart, pts, opts);
    s_star = pts.front();
  } else if (cfg.contains("s")) {
    s_star = as_num(cfg.at("s"), "s");
    rep = derivative_planar(model.sys, model.chart, s_star, opts);
  } else {
    const double guess = num_or(cfg, "s_guess", model.s_guess, "config");
    s_star = find_fixed_point(model.sys, model.chart, guess, opts);
    rep = derivative_planar(model.sys, model.chart, s_star, opts);
  }

  const auto dir = prep_out_dir(out_dir);
  json j = to_json(rep);
  j["s_star"] = s_star;
  j["model"] = model.sys.name;
  write_json_file(dir / "stability.json", j);

  std::cout << "model              " << model.sys.name << "\n"
            << "fixed point        " << fmt_g17(s_star) << "\n"
            << "reset derivative   " << rep.reset_derivative << "\n"
            << "speed ratio        " << rep.speed_ratio << "\n"
            << "sine ratio         " << rep.sine_ratio << "\n"
            << "divergence factor  " << rep.divergence_factor << "\n"
            << "|P'|               " << fmt_g17(rep.product) << " (signed "
            << rep.product_signed << ")\n"
            << "fd check           " << rep.fd_check << "\n"
            << "verdict            " << rep.verdict << "\n";
  return 0;
}

// -- sweep --------------------------------------------------------------------

struct SweepAxis {
  std::string param;
  double min = 0.0, max = 0.0;
  int count = 0;
  double at(int i) const {
    return count == 1 ? min : min + (max - min) * i / (count - 1);
  }
};

inline int cmd_sweep(const json& cfg, const std::string& out_dir, int workers) {
  check_keys(cfg, "config", {"model", "axes", "task", "integrator", "events"});
  if (!cfg.contains("model")) throw ConfigError("config: missing 'model'");
  const json& jm = cfg.at("model");
  check_keys(jm, "model", {"name", "params"});
  if (!jm.contains("name") || jm.at("name").get<std::string>() != "rimless-wheel")
    throw ConfigError("sweep supports model 'rimless-wheel' only");
  RimlessWheelParams base;
  if (jm.contains("params")) {
    const json& jp = jm.at("params");
    check_keys(jp, "model.params", {"delta", "alpha", "zeta", "ell"});
    base.delta = num_or(jp, "delta", base.delta, "model.params");
    base.alpha = num_or(jp, "alpha", base.alpha, "model.params");
    base.zeta = num_or(jp, "zeta", base.zeta, "model.params");
    base.ell = num_or(jp, "ell", base.ell, "model.params");
  }

  if (!cfg.contains("axes")) throw ConfigError("config: missing 'axes'");
  const json& ja = cfg.at("axes");
  if (!ja.is_array() || ja.size() != 2)
    throw ConfigError("axes must be an array of exactly two axis objects");
  std::vector<SweepAxis> axes;
  for (const json& jx : ja) {
    check_keys(jx, "axis", {"param", "min", "max", "count"});
    SweepAxis ax;
    if (!jx.contains("param") || !jx.at("param").is_string())
      throw ConfigError("axis.param must be a string");
    ax.param = jx.at("param").get<std::string>();
    if (ax.param != "delta" && ax.param != "alpha" && ax.param != "zeta" &&
        ax.param != "ell")
      throw ConfigError("unknown axis parameter '" + ax.param + "'");
    if (!jx.contains("min") || !jx.contains("max") || !jx.contains("count"))
      throw ConfigError("axis needs min, max, count");
    ax.min = as_num(jx.at("min"), "axis.min");
    ax.max = as_num(jx.at("max"), "axis.max");
    ax.count = static_cast<int>(as_num(jx.at("count"), "axis.count"));
    if (!std::isfinite(ax.min) || !std::isfinite(ax.max))
      throw ConfigError("axis range must be finite");
    if (ax.count < 2) throw ConfigError("axis count must be >= 2");
    axes.push_back(ax);
  }

  std::string task = "inequality-only";
  if (cfg.contains("task")) {
    if (!cfg.at("task").is_string()) throw ConfigError("task must be a string");
    task = cfg.at("task").get<std::string>();
  }
  if (task != "inequality-only" && task != "simulate-and-classify")
    throw ConfigError("task must be 'inequality-only' or 'simulate-and-classify'");
  const HybridOptions opts = parse_options(cfg);

  const long cells = static_cast<long>(axes[0].count) * axes[1].count;
  std::vector<std::string> rows(cells);

  auto cell_row = [&](long idx) {
    const int i0 = static_cast<int>(idx / axes[1].count);
    const int i1 = static_cast<int>(idx % axes[1].count);
    RimlessWheelParams p = base;
    auto apply = [&](const SweepAxis& ax, int i) {
      const double v = ax.at(i);
      if (ax.param == "delta") p.delta = v;
      else if (ax.param == "alpha") p.alpha = v;
      else if (ax.param == "zeta") p.zeta = v;
      else p.ell = v;
    };
    apply(axes[0], i0);
    apply(axes[1], i1);

    std::string row = fmt_g17(axes[0].at(i0)) + "," + fmt_g17(axes[1].at(i1));
    try {
      const ExistenceInequality iq = existence_inequality(p);
      row += "," + fmt_g17(iq.lhs) + "," + fmt_g17(iq.rhs) + "," +
             (iq.holds ? "1" : "0");
    } catch (const std::invalid_argument&) {
      return row + ",,,,outside-domain,";  // delta <= alpha or invalid params
    }
    if (task == "inequality-only") return row + ",,";
    WheelGaitResult g;
    try {
      g = classify_wheel_gait(p, opts);
    } catch (const std::exception& e) {
      return row + ",error: " + std::string(e.what()) + ",";
    }
    if (g.cycle_found)
      return row + ",stable period-1," + fmt_g17(g.product);
    return row + ",no-cycle,";
  };

  const int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    for (long i = 0; i < cells; ++i) rows[i] = cell_row(i);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&]() {
        for (long i = next.fetch_add(1); i < cells; i = next.fetch_add(1))
          rows[i] = cell_row(i);
      });
    for (std::thread& t : pool) t.join();
  }

  const auto dir = prep_out_dir(out_dir);
  std::ofstream os(dir / "sweep.csv");
  if (!os) throw std::runtime_error("cannot write sweep.csv");
  os << axes[0].param << "," << axes[1].param
     << ",lhs,rhs,holds,classification,product\n";
  for (const std::string& r : rows) os << r << "\n";
  std::cout << cells << " cells -> " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

// -- limits -------------------------------------------------------------------

inline int cmd_limits(const json& cfg, const std::string& out_dir) {
  check_keys(cfg, "config",
             {"task", "map", "lo", "hi", "x0", "n_max", "tol", "field",
              "guard_points", "reset_images", "range", "fixed_points",
              "integrator", "events"});
  if (!cfg.contains("task") || !cfg.at("task").is_string())
    throw ConfigError("config: missing 'task' (interval-map | hybrid-1d)");
  const std::string task = cfg.at("task").get<std::string>();

  CycleResult res;
  if (task == "interval-map") {
    if (!cfg.contains("map")) throw ConfigError("interval-map: missing 'map'");
    const json& jm = cfg.at("map");
    check_keys(jm, "map", {"kind", "a", "b", "mu"});
    if (!jm.contains("kind") || !jm.at("kind").is_string())
      throw ConfigError("map.kind must be a string");
    const std::string kind = jm.at("kind").get<std::string>();
    DiscreteMapDef m;
    m.lo = num_or(cfg, "lo", 0.0, "config");
    m.hi = num_or(cfg, "hi", 1.0, "config");
    if (kind == "affine") {
      const double a = num_or(jm, "a", 1.0, "map");
      const double b = num_or(jm, "b", 0.0, "map");
      m.P = [a, b](double x) { return a * x + b; };
    } else if (kind == "negate") {
      m.P = [](double x) { return -x; };
    } else if (kind == "logistic") {
      const double mu = num_or(jm, "mu", 4.0, "map");
      m.P = [mu](double x) { return mu * x * (1.0 - x); };
    } else {
      throw ConfigError("map.kind must be affine | negate | logistic");
    }
    const double x0 = num_or(cfg, "x0", 0.5 * (m.lo + m.hi), "config");
    const long n_max =
        static_cast<long>(num_or(cfg, "n_max", 100000.0, "config"));
    const double tol = num_or(cfg, "tol", 1e-8, "config");
    res = classify_interval_map(m, x0, n_max, tol);
  } else if (task == "hybrid-1d") {
    HybridSystem1D sys;
    if (!cfg.contains("field")) throw ConfigError("hybrid-1d: missing 'field'");
    const json& jf = cfg.at("field");
    check_keys(jf, "field", {"a", "b"});
    const double fa = num_or(jf, "a", 0.0, "field");
    const double fb = num_or(jf, "b", 0.0, "field");
    sys.f = [fa, fb](double x) { return fa + fb * x; };
    if (!cfg.contains("guard_points") || !cfg.contains("reset_images"))
      throw ConfigError("hybrid-1d: need guard_points and reset_images");
    sys.guard_points = as_vec(cfg.at("guard_points"), "guard_points");
    const std::vector<double> images =
        as_vec(cfg.at("reset_images"), "reset_images");
    if (images.size() != sys.guard_points.size())
      throw ConfigError("reset_images must pair up with guard_points");
    const std::vector<double> guards = sys.guard_points;
    sys.delta = [guards, images](double x) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < guards.size(); ++i)
        if (std::fabs(x - guards[i]) < std::fabs(x - guards[best])) best = i;
      return images[best];
    };
    if (!cfg.contains("range")) throw ConfigError("hybrid-1d: missing 'range'");
    const std::vector<double> range = as_vec(cfg.at("range"), "range");
    if (range.size() != 2) throw ConfigError("range must be [lo, hi]");
    sys.r_lo = range[0];
    sys.r_hi = range[1];
    if (cfg.contains("fixed_points")) {
      sys.fixed_points = as_vec(cfg.at("fixed_points"), "fixed_points");
    } else if (fb != 0.0) {
      // affine fields have a known zero; declare it when it is in range
      const double z = -fa / fb;
      std::vector<double> fps;
      if (z >= sys.r_lo && z <= sys.r_hi) fps.push_back(z);
      sys.fixed_points = fps;
    } else if (fa != 0.0) {
      sys.fixed_points = std::vector<double>{};  // nonzero constant drift
    }
    const double x0 = num_or(cfg, "x0", sys.r_lo, "config");
    try {
      sys.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    res = hybrid_1d_run(sys, x0, parse_options(cfg));
  } else {
    throw ConfigError("task must be 'interval-map' or 'hybrid-1d'");
  }

  const auto dir = prep_out_dir(out_dir);
  write_json_file(dir / "limits.json", to_json(res));
  std::cout << kind_label(res);
  if (res.kind == CycleResult::Kind::cycle ||
      res.kind == CycleResult::Kind::fixed_point) {
    std::cout << " orbit [";
    for (std::size_t i = 0; i < res.orbit.size(); ++i)
      std::cout << (i ? ", " : "") << fmt_g17(res.orbit[i]);
    std::cout << "]";
  }
  if (!res.note.empty()) std::cout << " (" << res.note << ")";
  std::cout << "\n";
  return 0;
}

// -- verify ---------------------------------------------------------------

inline int cmd_verify(bool list_only, const std::vector<std::string>& only,
                      double rel_tol, unsigned seed,
                      const std::string& out_dir) {
  if (list_only) {
    for (const Criterion& cr : acceptance_criteria())
      std::cout << cr.id << "  -  " << cr.title << "\n";
    return 0;
  }
  for (const std::string& id : only) {
    bool known = false;
    for (const Criterion& cr : acceptance_criteria())
      known = known || cr.id == id;
    if (!known) throw ConfigError("unknown criterion id '" + id + "'");
  }
  VerifyOptions vopts;
  vopts.rel_tol = rel_tol;
  vopts.seed = seed;
  const VerifySummary sum = run_acceptance(vopts, std::cout, only);
  if (!out_dir.empty()) {
    json j;
    j["all_passed"] = sum.all_passed;
    j["seconds"] = sum.seconds;
    json arr = json::array();
    for (const CriterionResult& r : sum.results) {
      json jr;
      jr["id"] = r.id;
      jr["title"] = r.title;
      jr["pass"] = r.pass;
      jr["seconds"] = r.seconds;
      jr["detail"] = r.detail;
      arr.push_back(jr);
    }
    j["criteria"] = arr;
    write_json_file(prep_out_dir(out_dir) / "verify.json", j);
  }
  return sum.all_passed ? 0 : 3;
}

}  // namespace cli_detail

/// Entry point used by the binary and the CLI tests. Exit codes: 0 success,
/// 2 config error, 3 numerical failure, 4 model-hypothesis violation.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"hybrid limit-cycle toolkit"};
  app.require_subcommand(1);
  unsigned seed = 12345;
  app.add_option("--seed", seed, "random seed (reserved)");

  std::string sim_cfg, sim_out = ".";
  CLI::App* sim = app.add_subcommand("simulate", "integrate a hybrid system");
  sim->add_option("--config", sim_cfg, "JSON config")->required();
  sim->add_option("--out", sim_out, "output directory");

  std::string sta_cfg, sta_out = ".";
  CLI::App* sta = app.add_subcommand("stability", "return-map derivative report");
  sta->add_option("--config", sta_cfg, "JSON config")->required();
  sta->add_option("--out", sta_out, "output directory");

  std::string swp_cfg, swp_out = ".";
  int workers = 1;
  CLI::App* swp = app.add_subcommand("sweep", "parameter-grid evaluation");
  swp->add_option("--config", swp_cfg, "JSON config")->required();
  swp->add_option("--out", swp_out, "output directory");
  swp->add_option("--workers", workers, "worker threads");

  std::string lim_cfg, lim_out = ".";
  CLI::App* lim = app.add_subcommand("limits", "1-D and interval-map classifiers");
  lim->add_option("--config", lim_cfg, "JSON config")->required();
  lim->add_option("--out", lim_out, "output directory");

  bool list_only = false;
  std::vector<std::string> only;
  double rel_tol = 0.0;
  std::string ver_out;
  CLI::App* ver = app.add_subcommand("verify", "run the acceptance suite");
  ver->add_flag("--list", list_only, "list criteria without running");
  ver->add_option("--only", only, "run only these criterion ids");
  ver->add_option("--rel-tol", rel_tol, "override integrator rel_tol");
  ver->add_option("--out", ver_out, "write verify.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are config errors
  }

  try {
    if (sim->parsed())
      return cli_detail::cmd_simulate(cli_detail::load_config(sim_cfg), sim_out);
    if (sta->parsed())
      return cli_detail::cmd_stability(cli_detail::load_config(sta_cfg), sta_out);
    if (swp->parsed())
      return cli_detail::cmd_sweep(cli_detail::load_config(swp_cfg), swp_out,
                                   workers);
    if (lim->parsed())
      return cli_detail::cmd_limits(cli_detail::load_config(lim_cfg), lim_out);
    if (ver->parsed())
      return cli_detail::cmd_verify(list_only, only, rel_tol, seed, ver_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace hybridcycles
