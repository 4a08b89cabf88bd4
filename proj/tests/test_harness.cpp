#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "byzsync/error.hpp"
#include "byzsync/scenario.hpp"
#include "byzsync/simulation.hpp"
#include "byzsync/sweep.hpp"
#include "byzsync/trace_io.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzsync;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "byzsync_tests";
  fs::create_directories(dir);
  return dir / name;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(BYZSYNC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("csv write and read") {
  std::ostringstream out;
  {
    CsvWriter w(out, {"a", "b"});
    w.cell(1.0 / 3.0).cell(2.0);
    w.end_row();
    w.cell(-1e-9).cell(std::nan(""));
    w.end_row();
  }
  CHECK(out.str().rfind("a,b\n", 0) == 0);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][t.column("a")] == 1.0 / 3.0);
  CHECK(std::isnan(t.rows[1][1]));
  CHECK(t.has_column("b"));
  CHECK_THROWS_AS(t.column("c"), Error);

  std::istringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(ragged), Error);
  std::istringstream text("a\nxyz\n");
  CHECK_THROWS_AS(read_csv(text), Error);
}

TEST_CASE("grid parsing") {
  const GridSpec g = GridSpec::parse("0:1:5");
  CHECK(g.values() == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(GridSpec::parse("0.8:1.6:1").values() == std::vector<double>{0.8});
  CHECK(GridSpec::parse("0:3:4").values().back() == 3.0);
  for (const char* bad : {"", "0:1", "0:1:0", "a:1:2", "0:1:2:3", "0:1:-2"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(GridSpec::parse(bad), Error);
  }
}

TEST_CASE("fan out preserves order") {
  const auto serial = fan_out<double>(1000, [](std::size_t i) { return std::sqrt(double(i)); }, Execution::Serial);
  const auto parallel = fan_out<double>(1000, [](std::size_t i) { return std::sqrt(double(i)); }, Execution::Parallel);
  CHECK(serial == parallel);
}

TEST_CASE("sweeps agree between serial and parallel") {
  const auto e2 = load_scenario(testing::scenario_path("example2"));
  const auto p = GridSpec::parse("0:1:21"), d = GridSpec::parse("0:3:31");
  CHECK(deflection_surface(e2, p, d, Execution::Serial) == deflection_surface(e2, p, d, Execution::Parallel));
  const auto roc = load_scenario(testing::scenario_path("roc_transient"));
  const auto deltas = GridSpec::parse("0:1.6:33").values();
  CHECK(roc_curve(roc, deltas, Execution::Serial) == roc_curve(roc, deltas, Execution::Parallel));
  const auto a = monte_carlo_link(15, 1.0, 0.9, 1.0, 0.5, 3000, 4, Execution::Serial);
  const auto b = monte_carlo_link(15, 1.0, 0.9, 1.0, 0.5, 3000, 4, Execution::Parallel);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
}

TEST_CASE("simulation traces are reproducible") {
  ScenarioConfig cfg = load_scenario(testing::scenario_path("example5"));
  cfg.sim.t_end = 6.0;
  std::ostringstream a, b, c;
  write_trace(a, run_scenario(cfg));
  write_trace(b, run_scenario(cfg));
  cfg.sim.seed = 2;
  write_trace(c, run_scenario(cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("simulation trace layout") {
  ScenarioConfig cfg = load_scenario(testing::scenario_path("example1"));
  cfg.sim.t_end = 1.0;
  const SimulationTrace tr = run_scenario(cfg);
  CHECK(tr.columns.front() == "t");
  for (const char* col : {"yd_inf", "yd_2", "truth", "y0", "u4", "ev2", "T_4_0"}) {
    CAPTURE(col);
    CHECK(tr.has_column(col));
  }
  CHECK(tr.rows.size() == tr.steps / cfg.sim.record_stride + 1);
  CHECK(tr.rows[0][tr.column("y1")] == 10.0);
  CHECK(tr.event_counts.size() == 5);
  CHECK(window_mean(tr, "t", 0.0, 1.0) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("cli exit codes and outputs") {
  const std::string e1 = testing::scenario_path("example1");
  CHECK(cli("validate " + e1) == 0);
  CHECK(cli("design " + e1) == 0);
  CHECK(cli("validate " + testing::scenario_path("missing")) != 0);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << R"({"agents": [{"c": 1, "x0": 0}], "graph": {"weights": [[0, 1], [1, 0]]}})";
  CHECK(cli("validate " + bad.string()) == 2);
  std::ofstream(bad) << "{";
  CHECK(cli("validate " + bad.string()) == 2);
  CHECK(cli("run " + e1) == 2);  // --out missing
  CHECK(cli("frobnicate") == 2);

  const fs::path t1 = scratch("t1.csv"), t2 = scratch("t2.csv");
  const std::string e5 = testing::scenario_path("example5");
  CHECK(cli("run " + e5 + " --out " + t1.string() + " --seed 3") == 0);
  CHECK(cli("run " + e5 + " --out " + t2.string() + " --seed 3") == 0);
  CHECK(slurp(t1) == slurp(t2));

  const fs::path est = scratch("est.csv");
  CHECK(cli("learn --trace " + t1.string() + " --out " + est.string() + " --config " + e5) == 0);
  CHECK(slurp(est).rfind("learner,neighbor,iteration", 0) == 0);
  CHECK(cli("learn --trace " + t1.string() + " --out " + est.string() + " --L 12 --sigma2 1.22") == 0);
  CHECK(cli("learn --trace " + bad.string() + " --out " + est.string()) == 2);

  const fs::path s1 = scratch("s1.csv"), s2 = scratch("s2.csv");
  const std::string e2 = testing::scenario_path("example2");
  CHECK(cli("deflection " + e2 + " --p-grid 0:1:11 --delta-grid 0:3:13 --out " + s1.string()) == 0);
  CHECK(cli("deflection " + e2 + " --p-grid 0:1:11 --delta-grid 0:3:13 --out " + s2.string() + " --serial") == 0);
  CHECK(slurp(s1) == slurp(s2));
  CHECK(slurp(s1).rfind("Delta,P,D\n", 0) == 0);
  CHECK(cli("deflection " + e2 + " --p-grid 0:1 --delta-grid 0:3:13 --out " + s1.string()) != 0);

  const fs::path r1 = scratch("r1.csv");
  CHECK(cli("roc " + testing::scenario_path("roc_transient") + " --delta-grid 0:1.6:9 --out " + r1.string()) == 0);
  CHECK(slurp(r1).rfind("Delta,P,P_D,P_FA\n", 0) == 0);
}

TEST_CASE("fan out rethrows failures from workers") {
  auto f = [](std::size_t i) -> int {
    if (i == 37) throw Error(ErrorCode::InvalidArgument, "boom");
    return static_cast<int>(i);
  };
  CHECK_THROWS_AS(fan_out<int>(100, f, Execution::Parallel), Error);
  CHECK_THROWS_AS(fan_out<int>(100, f, Execution::Serial), Error);
}
