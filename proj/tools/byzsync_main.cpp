#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "byzsync/error.hpp"
#include "byzsync/learning.hpp"
#include "byzsync/scenario.hpp"
#include "byzsync/simulation.hpp"
#include "byzsync/sweep.hpp"
#include "byzsync/trace_io.hpp"

using namespace byzsync;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  return out;
}

int cmd_validate(const std::string& path) {
  const ScenarioConfig cfg = load_scenario(path);
  std::cout << format_report(validate(cfg));
  return 0;
}

int cmd_run(const std::string& path, const std::string& out_path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = load_scenario(path);
  if (seed) cfg.sim.seed = *seed;
  const SimulationTrace trace = run_scenario(cfg);
  write_trace(out_path, trace);
  const auto& last = trace.rows.back();
  std::cout << "steps " << trace.steps << ", rows " << trace.rows.size() << ", final |Yd|inf "
            << format_double(last[trace.column("yd_inf")]) << "\n";
  for (std::size_t j = 0; j < trace.event_counts.size(); ++j) {
    std::cout << "agent " << j << ": " << trace.event_counts[j] << " events, min interval "
              << format_double(trace.min_intervals[j]) << "\n";
  }
  return 0;
}

Execution exec_of(bool serial) { return serial ? Execution::Serial : Execution::Parallel; }

int cmd_deflection(const std::string& path, const std::string& p_grid, const std::string& d_grid,
                   const std::string& out_path, bool serial) {
  const ScenarioConfig cfg = load_scenario(path);
  const auto rows = deflection_surface(cfg, GridSpec::parse(p_grid), GridSpec::parse(d_grid), exec_of(serial));
  auto out = open_out(out_path);
  CsvWriter w(out, {"Delta", "P", "D"});
  for (const auto& r : rows) {
    w.cell(r.delta).cell(r.p).cell(r.d);
    w.end_row();
  }
  return 0;
}

int cmd_roc(const std::string& path, const std::string& d_grid, const std::string& out_path, bool serial) {
  const ScenarioConfig cfg = load_scenario(path);
  const auto rows = roc_curve(cfg, GridSpec::parse(d_grid).values(), exec_of(serial));
  auto out = open_out(out_path);
  CsvWriter w(out, {"Delta", "P", "P_D", "P_FA"});
  for (const auto& r : rows) {
    w.cell(r.delta).cell(r.p).cell(r.pd).cell(r.pfa);
    w.end_row();
  }
  return 0;
}

struct LearnOptions {
  std::string trace;
  std::string out;
  std::string config;
  std::size_t L = 15;
  double sigma2 = 1.0;
  double h = 1.0;
  double t_start = 0.0;
  std::size_t Lp = 20;
  std::size_t iterations = 20;
};

/// "T_<k>_<j>" -> (k, j).
std::optional<std::pair<std::size_t, std::size_t>> parse_link(const std::string& col) {
  if (col.rfind("T_", 0) != 0) return std::nullopt;
  const auto us = col.find('_', 2);
  if (us == std::string::npos) return std::nullopt;
  try {
    return std::make_pair(std::stoul(col.substr(2, us - 2)), std::stoul(col.substr(us + 1)));
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

int cmd_learn(const LearnOptions& o) {
  std::optional<ScenarioConfig> cfg;
  if (!o.config.empty()) cfg = load_scenario(o.config);
  const CsvTable table = read_csv(o.trace);

  LearningConfig lc;
  std::size_t L = o.L;
  double t_start = o.t_start;
  if (cfg) {
    lc = cfg->learning.cfg;
    L = cfg->detection.cfg.L;
    t_start = cfg->learning.t_start;
  } else {
    lc.Lp = o.Lp;
    lc.max_iterations = o.iterations;
    lc.tau0 = lc.tau1 = 2 * o.Lp;
  }

  struct Link {
    std::size_t k, j, t_col, mr_col, mo_col;
    OnlineLinkLearner learner;
  };
  std::vector<Link> links;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto kj = parse_link(table.columns[c]);
    if (!kj) continue;
    const auto [k, j] = *kj;
    if (cfg && cfg->learning.enabled && !cfg->learning.agents.empty() &&
        std::find(cfg->learning.agents.begin(), cfg->learning.agents.end(), j) == cfg->learning.agents.end()) {
      continue;
    }
    const std::string suffix = "_" + std::to_string(k) + "_" + std::to_string(j);
    double s2 = o.sigma2, h = o.h;
    if (cfg) {
      s2 = cfg->channels.sigma2(k, j);
      h = cfg->channels.h(k, j);
    }
    links.push_back(Link{k, j, c, table.column("mr" + suffix), table.column("mo" + suffix),
                         OnlineLinkLearner(lc, L, s2, h)});
  }
  if (links.empty()) throw Error(ErrorCode::SchemaError, "trace has no link statistic columns");

  // Only completed windows are independent samples; fall back to every row
  // for traces that do not mark them.
  const std::size_t t_col = table.column("t");
  const std::size_t truth_col = table.column("truth");
  std::optional<std::size_t> wend;
  if (table.has_column("wend")) {
    const std::size_t c = table.column("wend");
    for (const auto& r : table.rows)
      if (r[c] == 1.0) wend = c;
  }
  for (const auto& r : table.rows) {
    if (wend && r[*wend] != 1.0) continue;
    if (r[t_col] + 1e-12 < t_start) continue;
    const Hypothesis label = r[truth_col] == 0.0 ? Hypothesis::H0 : Hypothesis::H1;
    for (auto& l : links) {
      if (std::isnan(r[l.t_col])) continue;
      l.learner.push(r[l.t_col], label, r[l.mo_col], r[l.mr_col], r[t_col]);
    }
  }

  auto out = open_out(o.out);
  CsvWriter w(out, {"learner", "neighbor", "iteration", "t", "pi1", "mu00", "mu01", "mu10", "mu11", "delta_hat",
                    "classification"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& l : links) {
    for (const auto& s : l.learner.history()) {
      const auto& m = s.mixture;
      const auto mu = [&](Hypothesis h, int c) { return m.fitted[static_cast<int>(h)] ? m.at(h, c).mu : nan; };
      w.cell(static_cast<double>(l.j)).cell(static_cast<double>(l.k)).cell(static_cast<double>(s.iteration));
      w.cell(s.t).cell(m.pi[1]);
      w.cell(mu(Hypothesis::H0, 0)).cell(mu(Hypothesis::H0, 1)).cell(mu(Hypothesis::H1, 0)).cell(mu(Hypothesis::H1, 1));
      w.cell(s.delta.delta_hat).cell(to_string(s.classification.cls));
      w.end_row();
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered synchronization under Byzantine attack: simulation and analysis"};
  app.require_subcommand(1);

  std::string cfg_path, out_path, p_grid, d_grid;
  std::optional<std::uint64_t> seed;
  bool serial = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and report connectivity and trigger bounds");
  validate_cmd->add_option("config", cfg_path, "Scenario JSON")->required();
  auto* design_cmd = app.add_subcommand("design", "Same report as validate");
  design_cmd->add_option("config", cfg_path, "Scenario JSON")->required();

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write its trace");
  run_cmd->add_option("config", cfg_path, "Scenario JSON")->required();
  run_cmd->add_option("--out", out_path, "Trace CSV")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");

  auto* defl_cmd = app.add_subcommand("deflection", "Deflection coefficient over an attack grid");
  defl_cmd->add_option("config", cfg_path, "Scenario JSON")->required();
  defl_cmd->add_option("--p-grid", p_grid, "lo:hi:steps")->required();
  defl_cmd->add_option("--delta-grid", d_grid, "lo:hi:steps")->required();
  defl_cmd->add_option("--out", out_path, "Surface CSV")->required();
  defl_cmd->add_flag("--serial", serial, "Evaluate on one thread");

  auto* roc_cmd = app.add_subcommand("roc", "Transient detection and false-alarm probabilities over attack strength");
  roc_cmd->add_option("config", cfg_path, "Scenario JSON")->required();
  roc_cmd->add_option("--delta-grid", d_grid, "lo:hi:steps")->required();
  roc_cmd->add_option("--out", out_path, "ROC CSV")->required();
  roc_cmd->add_flag("--serial", serial, "Evaluate on one thread");

  LearnOptions lo;
  auto* learn_cmd = app.add_subcommand("learn", "Replay a trace through the per-link mixture learners");
  learn_cmd->add_option("--trace", lo.trace, "Trace CSV from run")->required();
  learn_cmd->add_option("--out", lo.out, "Estimates CSV")->required();
  learn_cmd->add_option("--config", lo.config, "Scenario JSON supplying channel, window and learning settings");
  learn_cmd->add_option("--L", lo.L, "Detection window length");
  learn_cmd->add_option("--sigma2", lo.sigma2, "Link noise variance");
  learn_cmd->add_option("--gain", lo.h, "Link channel gain");
  learn_cmd->add_option("--t-start", lo.t_start, "Ignore rows before this time");
  learn_cmd->add_option("--Lp", lo.Lp, "Points per learning iteration");
  learn_cmd->add_option("--iterations", lo.iterations, "Learning iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*validate_cmd || *design_cmd) return cmd_validate(cfg_path);
    if (*run_cmd) return cmd_run(cfg_path, out_path, seed);
    if (*defl_cmd) return cmd_deflection(cfg_path, p_grid, d_grid, out_path, serial);
    if (*roc_cmd) return cmd_roc(cfg_path, d_grid, out_path, serial);
    if (*learn_cmd) return cmd_learn(lo);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::SchemaError:
      case ErrorCode::DimensionMismatch:
      case ErrorCode::InfeasibleDesign:
        return kExitValidation;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
