#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include <hybridcycles/models.hpp>

using Catch::Approx;
using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace hybridcycles;

// The binary under test; the build system injects its absolute path.
#ifndef HYBRIDCYCLES_CLI_BIN
#error "HYBRIDCYCLES_CLI_BIN must point at the built CLI"
#endif

namespace {

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() /
               ("hc-cli-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_tool(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(HYBRIDCYCLES_CLI_BIN) + " " + args +
                          " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream os(p);
  os << body;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("verify --list names every criterion", "[cli][verify]") {
  const auto dir = fresh_dir("list");
  REQUIRE(run_tool("verify --list", dir / "out.txt") == 0);
  const std::string out = slurp(dir / "out.txt");
  const char* ids[] = {
      "vdp-steady-impacts",   "vdp-derivative",
      "vdp-linear-scaling",   "vdp-onset",
      "polar-analytic-oracle", "flow-jacobian-determinant",
      "continuous-normal-section", "rimless-wheel",
      "one-dimensional-cycles", "property-suites"};
  for (const char* id : ids) REQUIRE(out.find(id) != std::string::npos);
  REQUIRE(lines_of(out).size() == 10);
  fs::remove_all(dir);
}

TEST_CASE("configuration mistakes exit with code 2", "[cli][errors]") {
  const auto dir = fresh_dir("cfgerr");
  const auto log = dir / "out.txt";

  write_text(dir / "broken.json", "{ this is not json");
  REQUIRE(run_tool("simulate --config " + (dir / "broken.json").string(),
                   log) == 2);

  write_text(dir / "typo.json",
             R"({"model": {"name": "vdp"}, "horzon": 10.0})");
  REQUIRE(run_tool("simulate --config " + (dir / "typo.json").string(), log) ==
          2);

  write_text(dir / "nomodel.json", R"({"model": {"name": "frictionless-cow"},
                                       "horizon": 1.0})");
  REQUIRE(run_tool("simulate --config " + (dir / "nomodel.json").string(),
                   log) == 2);

  write_text(dir / "task.json", R"({"task": "guess"})");
  REQUIRE(run_tool("limits --config " + (dir / "task.json").string(), log) ==
          2);
  fs::remove_all(dir);
}

TEST_CASE("command-line misuse is a usage error", "[cli][errors]") {
  const auto dir = fresh_dir("usage");
  const auto log = dir / "out.txt";
  REQUIRE(run_tool("", log) == 2);                       // no subcommand
  REQUIRE(run_tool("--nope", log) == 2);                 // unknown flag
  REQUIRE(run_tool("simulate", log) == 2);               // missing --config
  REQUIRE(run_tool("verify --only not-a-criterion", log) == 2);
  fs::remove_all(dir);
}

TEST_CASE("simulate writes trajectory, impacts, and a summary", "[cli][simulate]") {
  const auto dir = fresh_dir("sim");
  write_text(dir / "cfg.json",
             R"({"model": {"name": "vdp"}, "x0": [2.0, 0.0], "horizon": 25.0})");
  REQUIRE(run_tool("simulate --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);

  const json summary = load_json(dir / "summary.json");
  REQUIRE(summary.at("model").get<std::string>() == "vdp");
  REQUIRE(summary.at("termination").get<std::string>() == "time-elapsed");
  REQUIRE(summary.at("t_total").get<double>() == Approx(25.0));
  const long impacts = summary.at("impacts").get<long>();
  REQUIRE(impacts >= 2);
  REQUIRE(summary.at("final_state").size() == 2);
  REQUIRE(summary.at("last_impact_t").get<double>() <= 25.0);

  const auto tlines = lines_of(slurp(dir / "trajectory.csv"));
  REQUIRE(tlines.front() == "t,x0,x1,segment_index,impact_flag");
  REQUIRE(tlines.size() > 50);
  double prev_t = -1.0;
  long flagged = 0;
  for (std::size_t i = 1; i < tlines.size(); ++i) {
    const auto cells = split_csv(tlines[i]);
    REQUIRE(cells.size() == 5);
    const double t = std::stod(cells[0]);
    REQUIRE(t >= prev_t);  // impact rows duplicate the time, never reverse it
    prev_t = t;
    flagged += std::stol(cells[4]);
  }
  REQUIRE(flagged == impacts);
  REQUIRE(std::stod(split_csv(tlines.back())[0]) == Approx(25.0));

  const auto ilines = lines_of(slurp(dir / "impacts.csv"));
  REQUIRE(ilines.front() == "t,x_minus0,x_minus1,x_plus0,x_plus1,transversality");
  REQUIRE(static_cast<long>(ilines.size()) - 1 == impacts);
  for (std::size_t i = 1; i < ilines.size(); ++i) {
    const auto cells = split_csv(ilines[i]);
    REQUIRE(cells.size() == 6);
    // the section is crossed downward, so <grad H, f> is strictly negative
    REQUIRE(std::stod(cells[5]) < 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("zero horizon writes headers only", "[cli][simulate]") {
  const auto dir = fresh_dir("empty");
  write_text(dir / "cfg.json", R"({"model": {"name": "vdp"}, "horizon": 0.0})");
  REQUIRE(run_tool("simulate --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);
  REQUIRE(slurp(dir / "trajectory.csv") == "t,x0,x1,segment_index,impact_flag\n");
  REQUIRE(slurp(dir / "impacts.csv") == "t,transversality\n");
  const json summary = load_json(dir / "summary.json");
  REQUIRE(summary.at("impacts").get<long>() == 0);
  REQUIRE(summary.at("t_total").get<double>() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("impact budget terminates the run", "[cli][simulate]") {
  const auto dir = fresh_dir("budget");
  write_text(dir / "cfg.json", R"({"model": {"name": "vdp"}, "impacts": 3})");
  REQUIRE(run_tool("simulate --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);
  const json summary = load_json(dir / "summary.json");
  REQUIRE(summary.at("termination").get<std::string>() == "impact-budget");
  REQUIRE(summary.at("impacts").get<long>() == 3);
  REQUIRE(summary.at("t_total").get<double>() ==
          Approx(summary.at("last_impact_t").get<double>()));
  fs::remove_all(dir);
}

TEST_CASE("stability reports the radial contraction", "[cli][stability]") {
  const auto dir = fresh_dir("stab");
  write_text(dir / "cfg.json", R"({"model": {"name": "polar"}})");
  REQUIRE(run_tool("stability --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);
  const json rep = load_json(dir / "stability.json");
  REQUIRE(rep.at("model").get<std::string>() == "polar");
  REQUIRE(rep.at("s_star").get<double>() == Approx(2.0946066).margin(1e-5));
  REQUIRE(rep.at("product").get<double>() == Approx(0.0864278).margin(1e-6));
  REQUIRE(rep.at("verdict").get<std::string>() == "stable");
  REQUIRE(rep.at("fd_check").get<double>() ==
          Approx(rep.at("product_signed").get<double>()).epsilon(1e-4));
  fs::remove_all(dir);
}

TEST_CASE("stability at a non-fixed point is a numerical failure", "[cli][stability]") {
  const auto dir = fresh_dir("stabbad");
  write_text(dir / "cfg.json", R"({"model": {"name": "vdp"}, "s": -0.8})");
  REQUIRE(run_tool("stability --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 3);
  fs::remove_all(dir);
}

TEST_CASE("sweep grids the existence inequality", "[cli][sweep]") {
  const auto dir = fresh_dir("sweep");
  write_text(dir / "cfg.json", R"({
    "model": {"name": "rimless-wheel"},
    "axes": [{"param": "delta", "min": 0.3, "max": 0.5, "count": 2},
             {"param": "alpha", "min": 0.05, "max": 0.15, "count": 2}],
    "task": "inequality-only"})");
  REQUIRE(run_tool("sweep --config " + (dir / "cfg.json").string() + " --out " +
                       dir.string(),
                   dir / "out.txt") == 0);

  const auto rows = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(rows.front() == "delta,alpha,lhs,rhs,holds,classification,product");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split_csv(rows[i]);
    REQUIRE(cells.size() == 7);
    RimlessWheelParams p;
    p.delta = std::stod(cells[0]);
    p.alpha = std::stod(cells[1]);
    const ExistenceInequality iq = existence_inequality(p);
    REQUIRE(std::stod(cells[2]) == Approx(iq.lhs).epsilon(1e-12));
    REQUIRE(std::stod(cells[3]) == Approx(iq.rhs).epsilon(1e-12));
    REQUIRE(cells[4] == (iq.holds ? "1" : "0"));
    REQUIRE(cells[5].empty());  // classification unused for this task
    REQUIRE(cells[6].empty());
  }
  fs::remove_all(dir);
}

TEST_CASE("sweep output is identical across worker counts", "[cli][sweep]") {
  const auto dir = fresh_dir("workers");
  write_text(dir / "cfg.json", R"({
    "model": {"name": "rimless-wheel"},
    "axes": [{"param": "delta", "min": 0.30, "max": 0.32, "count": 2},
             {"param": "alpha", "min": 0.10, "max": 0.11, "count": 2}],
    "task": "simulate-and-classify"})");
  const auto one = dir / "one";
  const auto four = dir / "four";
  REQUIRE(run_tool("sweep --config " + (dir / "cfg.json").string() + " --out " +
                       one.string() + " --workers 1",
                   dir / "out1.txt") == 0);
  REQUIRE(run_tool("sweep --config " + (dir / "cfg.json").string() + " --out " +
                       four.string() + " --workers 4",
                   dir / "out4.txt") == 0);
  const std::string a = slurp(one / "sweep.csv");
  REQUIRE(a == slurp(four / "sweep.csv"));

  // every cell sits in the stable-gait region near the default geometry
  const auto rows = lines_of(a);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split_csv(rows[i]);
    REQUIRE(cells[5] == "stable period-1");
    const double product = std::stod(cells[6]);
    REQUIRE(product > 0.0);
    REQUIRE(product < 1.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("limits classifies the affine interval map", "[cli][limits]") {
  const auto dir = fresh_dir("affine");
  write_text(dir / "cfg.json", R"({
    "task": "interval-map",
    "map": {"kind": "affine", "a": 0.5, "b": 1.0},
    "lo": 0.0, "hi": 4.0, "x0": 0.0})");
  REQUIRE(run_tool("limits --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);
  const json res = load_json(dir / "limits.json");
  REQUIRE(res.at("kind").get<std::string>() == "fixed-point");
  REQUIRE(res.at("orbit").size() == 1);
  REQUIRE(res.at("orbit")[0].get<double>() == Approx(2.0).margin(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("limits drives the scalar hybrid sawtooth", "[cli][limits]") {
  const auto dir = fresh_dir("saw");
  write_text(dir / "cfg.json", R"({
    "task": "hybrid-1d",
    "field": {"a": 1.0, "b": 0.0},
    "guard_points": [1.0],
    "reset_images": [0.0],
    "range": [-1.0, 2.0],
    "x0": -0.5})");
  REQUIRE(run_tool("limits --config " + (dir / "cfg.json").string() +
                       " --out " + dir.string(),
                   dir / "out.txt") == 0);
  const json res = load_json(dir / "limits.json");
  REQUIRE(res.at("kind").get<std::string>() == "period-1 cycle");
  REQUIRE(res.at("orbit").size() == 1);
  REQUIRE(res.at("orbit")[0].get<double>() == Approx(1.0).margin(1e-9));
  REQUIRE(res.at("period_time").get<double>() == Approx(1.0).margin(1e-9));
  fs::remove_all(dir);
}

TEST_CASE("verify runs a single criterion cleanly", "[cli][verify]") {
  const auto dir = fresh_dir("only");
  REQUIRE(run_tool("verify --only polar-analytic-oracle --out " + dir.string(),
                   dir / "out.txt") == 0);
  const json rep = load_json(dir / "verify.json");
  REQUIRE(rep.at("all_passed").get<bool>());
  REQUIRE(rep.at("criteria").size() == 1);
  REQUIRE(rep.at("criteria")[0].at("id").get<std::string>() ==
          "polar-analytic-oracle");
  REQUIRE(rep.at("criteria")[0].at("pass").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("verify fails under a deliberately degraded tolerance", "[cli][verify]") {
  const auto dir = fresh_dir("degraded");
  REQUIRE(run_tool("verify --only vdp-derivative --rel-tol 1e-3 --out " +
                       dir.string(),
                   dir / "out.txt") == 3);
  const json rep = load_json(dir / "verify.json");
  REQUIRE_FALSE(rep.at("all_passed").get<bool>());
  fs::remove_all(dir);
}
