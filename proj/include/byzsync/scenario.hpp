#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "byzsync/attack.hpp"
#include "byzsync/detection.hpp"
#include "byzsync/dynamics.hpp"
#include "byzsync/graph.hpp"
#include "byzsync/learning.hpp"
#include "byzsync/matrix.hpp"

namespace byzsync {

struct TriggerSection {
  double alpha = 1.0;
  double beta = 1.0;
  double c_offset = 0.0;
  bool deltas_auto = false;
  std::vector<double> deltas;  // resolved (bounds filled in when deltas_auto)
};

/// Per-link channel parameters indexed like the graph: (k, j) is the link
/// carrying agent k's broadcast to agent j.
struct ChannelSection {
  Matrix h;
  Matrix sigma2;

  ChannelModel link(std::size_t from, std::size_t to) const { return {h(from, to), sigma2(from, to)}; }
};

struct DetectionSection {
  bool enabled = true;
  DetectionConfig cfg;
};

struct LearningSection {
  bool enabled = false;
  std::vector<std::size_t> agents;  // learners
  double t_start = 0.0;  // learners use the detection windows from here on
  LearningConfig cfg;
};

/// How a learner rewrites a neighbor's broadcast once it is classified
/// Byzantine.
enum class CorrectionPolicy {
  /// r - d under H0, r + d under H1, keyed on the learner's own decision.
  Plain,
  /// Same sign rule scaled by the learned attack probability.
  Expected,
  /// Of {r, r - d, r + d}, the one closest to the previous corrected value.
  Nearest,
};

std::string_view to_string(CorrectionPolicy p);

struct RetuneEvent {
  std::size_t agent = 0;
  double t = 0.0;
  /// Explicit new gain; when absent the retuned bound is used.
  std::optional<double> delta;
};

struct MitigationSection {
  WeightMode mode = WeightMode::SelfDesigned;
  std::vector<RetuneEvent> retune;
  bool correction_enabled = false;
  double correction_t_start = 0.0;
  CorrectionPolicy correction_policy = CorrectionPolicy::Nearest;
};

struct SimSection {
  double dt = 1e-3;
  double t_end = 10.0;
  std::uint64_t seed = 1;
  bool noisy_control = false;
  std::size_t record_stride = 10;
  double sync_eps = 0.1;
};

/// Sign of the falsification offset under H1 in the transient analysis.
enum class SignPolicy {
  /// Always subtract, as in the hypothesis-keyed rule.
  Subtract,
  /// Subtract with the sign that pulls the received mean toward the
  /// receiver's, which is what an attacker faking synchronization picks.
  Exploit,
};

/// Single-agent detector analysis used by the roc and deflection commands.
struct AnalysisSection {
  std::size_t agent = 0;
  /// Output levels over the analysis window; defaults to the initial states.
  std::vector<double> window_outputs;
  SignPolicy sign_policy = SignPolicy::Exploit;
  double default_p = 0.5;
};

struct ScenarioConfig {
  std::string name;
  std::vector<AgentModel> agents;
  WeightedDigraph graph;
  TriggerSection trigger;
  ChannelSection channels;
  std::vector<ByzantineProfile> attack;
  DetectionSection detection;
  LearningSection learning;
  MitigationSection mitigation;
  SimSection sim;
  AnalysisSection analysis;
  ConnectivityMethod connectivity = ConnectivityMethod::LaplacianSpectrum;

  std::size_t size() const { return agents.size(); }
  double lambda() const { return algebraic_connectivity(graph, connectivity); }
};

/// Throws SchemaError on malformed JSON or fields of the wrong type, and
/// DimensionMismatch when sizes disagree.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::string& path);

struct AgentReport {
  double d_in = 0.0;
  double bound = 0.0;
  double delta = 0.0;
  bool within_bound = false;
};

struct ValidationReport {
  double lambda_g = 0.0;
  double lambda_symmetric = 0.0;
  bool balanced = false;
  std::vector<AgentReport> agents;
  std::vector<std::string> warnings;

  bool ok() const { return warnings.empty(); }
};

ValidationReport validate(const ScenarioConfig& cfg);
std::string format_report(const ValidationReport& r);

}  // namespace byzsync
