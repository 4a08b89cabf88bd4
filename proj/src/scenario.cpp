#include "byzsync/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "byzsync/error.hpp"
#include "byzsync/trigger.hpp"
#include "json.hpp"

namespace byzsync {

using nlohmann::json;

std::string_view to_string(CorrectionPolicy p) {
  switch (p) {
    case CorrectionPolicy::Plain: return "plain";
    case CorrectionPolicy::Expected: return "expected";
    case CorrectionPolicy::Nearest: return "nearest";
  }
  return "?";
}

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) schema(where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(where + " must be finite");
  return d;
}

double num_or(const json& obj, const char* key, double fallback, const std::string& where) {
  const json* v = find(obj, key);
  return v ? num(*v, where + "." + key) : fallback;
}

std::size_t index_or(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 0) schema(where + "." + key + " must be a nonnegative integer");
  return v->get<std::size_t>();
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& where) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) schema(where + "." + key + " must be a boolean");
  return v->get<bool>();
}

const json& object(const json& v, const std::string& where) {
  if (!v.is_object()) schema(where + " must be an object");
  return v;
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) schema(where + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(num(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

/// A scalar, an n x n matrix, or one value per edge in row-major edge order.
Matrix link_values(const json* v, const WeightedDigraph& g, double fallback, const std::string& where) {
  const std::size_t n = g.size();
  Matrix m(n, n, fallback);
  if (!v) return m;
  if (v->is_number()) return Matrix(n, n, num(*v, where));
  if (!v->is_array()) schema(where + " must be a number or an array");
  if (!v->empty() && (*v)[0].is_array()) {
    if (v->size() != n) throw Error(ErrorCode::DimensionMismatch, where + " must have one row per agent");
    for (std::size_t i = 0; i < n; ++i) {
      auto row = numbers((*v)[i], where);
      if (row.size() != n) throw Error(ErrorCode::DimensionMismatch, where + " must be n x n");
      for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
    }
    return m;
  }
  auto flat = numbers(*v, where);
  std::size_t e = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.weight(i, j) > 0.0) ++e;
  if (flat.size() != e) {
    throw Error(ErrorCode::DimensionMismatch,
                where + " lists " + std::to_string(flat.size()) + " links but the graph has " + std::to_string(e));
  }
  e = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.weight(i, j) > 0.0) m(i, j) = flat[e++];
  return m;
}

std::size_t agent_index(const json& obj, const char* key, std::size_t n, const std::string& where) {
  const json* v = find(obj, key);
  if (!v) schema(where + "." + key + " is required");
  const std::size_t a = index_or(obj, key, 0, where);
  if (a >= n) throw Error(ErrorCode::DimensionMismatch, where + "." + key + " is out of range");
  return a;
}

void parse_agents(const json& root, ScenarioConfig& cfg) {
  const json* agents = find(root, "agents");
  if (!agents || !agents->is_array() || agents->empty()) schema("agents must be a nonempty array");
  for (std::size_t i = 0; i < agents->size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& a = object((*agents)[i], where);
    if (!find(a, "c") || !find(a, "x0")) schema(where + " needs c and x0");
    AgentModel m = AgentModel::first_order(num(a["c"], where + ".c"), num(a["x0"], where + ".x0"));
    m.rho = num_or(a, "rho", m.c, where);
    cfg.agents.push_back(m);
  }
}

void parse_graph(const json& root, ScenarioConfig& cfg) {
  const json* g = find(root, "graph");
  if (!g) schema("graph is required");
  object(*g, "graph");
  const json* w = find(*g, "weights");
  if (!w || !w->is_array()) schema("graph.weights must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < w->size(); ++i) rows.push_back(numbers((*w)[i], "graph.weights"));
  const std::size_t n = cfg.agents.size();
  if (rows.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(n) + " agents but " + std::to_string(rows.size()) +
                                                  " graph rows");
  }
  for (const auto& r : rows) {
    if (r.size() != n) throw Error(ErrorCode::DimensionMismatch, "graph.weights must be n x n");
  }
  try {
    cfg.graph = WeightedDigraph(Matrix::from_rows(rows));
  } catch (const Error& e) {
    schema(std::string("graph.weights: ") + e.what());
  }
  if (const json* c = find(*g, "connectivity")) {
    if (*c == "laplacian_spectrum") cfg.connectivity = ConnectivityMethod::LaplacianSpectrum;
    else if (*c == "symmetric_part") cfg.connectivity = ConnectivityMethod::SymmetricPart;
    else schema("graph.connectivity must be laplacian_spectrum or symmetric_part");
  }
}

void parse_trigger(const json& root, ScenarioConfig& cfg) {
  const std::size_t n = cfg.size();
  const json* t = find(root, "trigger");
  if (!t) schema("trigger is required");
  object(*t, "trigger");
  auto& tr = cfg.trigger;
  tr.alpha = num_or(*t, "alpha", 1.0, "trigger");
  tr.beta = num_or(*t, "beta", 1.0, "trigger");
  tr.c_offset = num_or(*t, "c_offset", 0.0, "trigger");
  if (!(tr.alpha > 0.0) || !(tr.beta > 0.0)) schema("trigger.alpha and trigger.beta must be > 0");
  if (tr.c_offset < 0.0) schema("trigger.c_offset must be >= 0");
  const json* d = find(*t, "deltas");
  if (!d) schema("trigger.deltas is required");
  if (d->is_string()) {
    if (*d != "auto") schema("trigger.deltas must be an array or \"auto\"");
    tr.deltas_auto = true;
    const double lam = cfg.lambda();
    const Degrees deg = degrees(cfg.graph);
    for (std::size_t j = 0; j < n; ++j) {
      tr.deltas.push_back(design_delta(deg.in[j], lam, cfg.agents[j].rho, tr.alpha, tr.beta));
    }
  } else {
    tr.deltas = numbers(*d, "trigger.deltas");
    if (tr.deltas.size() != n) throw Error(ErrorCode::DimensionMismatch, "trigger.deltas needs one entry per agent");
    for (double x : tr.deltas)
      if (x < 0.0) schema("trigger.deltas must be >= 0");
  }
}

void parse_channels(const json& root, ScenarioConfig& cfg) {
  const json* c = find(root, "channels");
  if (c) object(*c, "channels");
  cfg.channels.h = link_values(c ? find(*c, "h") : nullptr, cfg.graph, 1.0, "channels.h");
  cfg.channels.sigma2 = link_values(c ? find(*c, "sigma2") : nullptr, cfg.graph, 1.0, "channels.sigma2");
  const std::size_t n = cfg.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cfg.graph.weight(i, j) > 0.0 && !(cfg.channels.sigma2(i, j) > 0.0)) {
        schema("channels.sigma2 must be > 0 on every link");
      }
}

void parse_attack(const json& root, ScenarioConfig& cfg) {
  const json* a = find(root, "attack");
  if (!a) return;
  if (!a->is_array()) schema("attack must be an array");
  for (std::size_t i = 0; i < a->size(); ++i) {
    const std::string where = "attack[" + std::to_string(i) + "]";
    const json& o = object((*a)[i], where);
    ByzantineProfile p;
    p.agent = agent_index(o, "agent", cfg.size(), where);
    p.delta = num_or(o, "Delta", 0.0, where);
    p.p = num_or(o, "P", 0.0, where);
    p.omega = num_or(o, "omega", 0.0, where);
    p.t_start = num_or(o, "t_start", 0.0, where);
    if (const json* sg = find(o, "sign")) {
      if (*sg == "hypothesis") p.sign = FalsifySign::Hypothesis;
      else if (*sg == "plus") p.sign = FalsifySign::Plus;
      else if (*sg == "minus") p.sign = FalsifySign::Minus;
      else schema(where + ".sign must be hypothesis, plus or minus");
    }
    if (p.p < 0.0 || p.p > 1.0) schema(where + ".P must lie in [0, 1]");
    if (p.omega < 0.0) schema(where + ".omega must be >= 0");
    cfg.attack.push_back(p);
  }
}

void parse_detection(const json& root, ScenarioConfig& cfg) {
  const json* d = find(root, "detection");
  if (!d) return;
  object(*d, "detection");
  auto& s = cfg.detection;
  s.enabled = bool_or(*d, "enabled", true, "detection");
  s.cfg.L = index_or(*d, "L", s.cfg.L, "detection");
  s.cfg.lambda_margin = num_or(*d, "lambda_margin", s.cfg.lambda_margin, "detection");
  s.cfg.Ts = num_or(*d, "Ts", s.cfg.Ts, "detection");
  if (s.cfg.L < 1) schema("detection.L must be >= 1");
  if (!(s.cfg.Ts > 0.0)) schema("detection.Ts must be > 0");
}

void parse_learning(const json& root, ScenarioConfig& cfg) {
  const json* l = find(root, "learning");
  if (!l) return;
  object(*l, "learning");
  auto& s = cfg.learning;
  s.enabled = bool_or(*l, "enabled", true, "learning");
  if (const json* a = find(*l, "agents")) {
    if (!a->is_array()) schema("learning.agents must be an array");
    for (const auto& v : *a) {
      if (!v.is_number_integer() || v.get<long long>() < 0) schema("learning.agents must hold agent indices");
      if (v.get<std::size_t>() >= cfg.size()) throw Error(ErrorCode::DimensionMismatch, "learning agent out of range");
      s.agents.push_back(v.get<std::size_t>());
    }
  }
  s.t_start = num_or(*l, "t_start", 0.0, "learning");
  s.cfg.Lp = index_or(*l, "Lp", s.cfg.Lp, "learning");
  s.cfg.max_iterations = index_or(*l, "iterations", s.cfg.max_iterations, "learning");
  s.cfg.em_tol = num_or(*l, "em_tol", s.cfg.em_tol, "learning");
  s.cfg.em_max_iter = index_or(*l, "em_max_iter", s.cfg.em_max_iter, "learning");
  s.cfg.tau0 = index_or(*l, "tau0", 2 * s.cfg.Lp, "learning");
  s.cfg.tau1 = index_or(*l, "tau1", 2 * s.cfg.Lp, "learning");
  s.cfg.separation_threshold = num_or(*l, "separation_threshold", s.cfg.separation_threshold, "learning");
  s.cfg.min_attack_weight = num_or(*l, "min_attack_weight", s.cfg.min_attack_weight, "learning");
  if (const json* e = find(*l, "delta_estimator")) {
    if (*e == "noise_scaled") s.cfg.gap_scales_with_noise = true;
    else if (*e == "additive_noise") s.cfg.gap_scales_with_noise = false;
    else schema("learning.delta_estimator must be noise_scaled or additive_noise");
  }
  if (s.cfg.Lp < 1) schema("learning.Lp must be >= 1");
}

void parse_mitigation(const json& root, ScenarioConfig& cfg) {
  const json* m = find(root, "mitigation");
  if (!m) return;
  object(*m, "mitigation");
  auto& s = cfg.mitigation;
  if (const json* mode = find(*m, "mode")) {
    if (*mode == "self_designed") s.mode = WeightMode::SelfDesigned;
    else if (*mode == "neighbor_assigned") s.mode = WeightMode::NeighborAssigned;
    else schema("mitigation.mode must be self_designed or neighbor_assigned");
  }
  if (const json* r = find(*m, "retune")) {
    if (!r->is_array()) schema("mitigation.retune must be an array");
    for (std::size_t i = 0; i < r->size(); ++i) {
      const std::string where = "mitigation.retune[" + std::to_string(i) + "]";
      const json& o = object((*r)[i], where);
      RetuneEvent ev;
      ev.agent = agent_index(o, "agent", cfg.size(), where);
      ev.t = num_or(o, "t", 0.0, where);
      if (const json* d = find(o, "delta")) ev.delta = num(*d, where + ".delta");
      s.retune.push_back(ev);
    }
  }
  if (const json* c = find(*m, "data_correction")) {
    object(*c, "mitigation.data_correction");
    s.correction_enabled = bool_or(*c, "enable", true, "mitigation.data_correction");
    s.correction_t_start = num_or(*c, "t_start", 0.0, "mitigation.data_correction");
    if (const json* p = find(*c, "policy")) {
      if (*p == "plain") s.correction_policy = CorrectionPolicy::Plain;
      else if (*p == "expected") s.correction_policy = CorrectionPolicy::Expected;
      else if (*p == "nearest") s.correction_policy = CorrectionPolicy::Nearest;
      else schema("mitigation.data_correction.policy must be plain, expected or nearest");
    }
  }
}

void parse_sim(const json& root, ScenarioConfig& cfg) {
  const json* s = find(root, "sim");
  if (!s) return;
  object(*s, "sim");
  auto& sim = cfg.sim;
  sim.dt = num_or(*s, "dt", sim.dt, "sim");
  sim.t_end = num_or(*s, "t_end", sim.t_end, "sim");
  if (const json* seed = find(*s, "seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
      schema("sim.seed must be a nonnegative integer");
    }
    sim.seed = seed->get<std::uint64_t>();
  }
  sim.noisy_control = bool_or(*s, "noisy_control", false, "sim");
  sim.record_stride = index_or(*s, "record_stride", sim.record_stride, "sim");
  sim.sync_eps = num_or(*s, "sync_eps", sim.sync_eps, "sim");
  if (!(sim.dt > 0.0)) schema("sim.dt must be > 0");
  if (!(sim.t_end > sim.dt)) schema("sim.t_end must exceed sim.dt");
  if (sim.record_stride < 1) schema("sim.record_stride must be >= 1");
}

void parse_analysis(const json& root, ScenarioConfig& cfg) {
  auto& a = cfg.analysis;
  for (const auto& m : cfg.agents) a.window_outputs.push_back(m.x0);
  const json* s = find(root, "analysis");
  if (!s) return;
  object(*s, "analysis");
  if (find(*s, "agent")) a.agent = agent_index(*s, "agent", cfg.size(), "analysis");
  if (const json* w = find(*s, "window_outputs")) {
    a.window_outputs = numbers(*w, "analysis.window_outputs");
    if (a.window_outputs.size() != cfg.size()) {
      throw Error(ErrorCode::DimensionMismatch, "analysis.window_outputs needs one entry per agent");
    }
  }
  if (const json* p = find(*s, "sign_policy")) {
    if (*p == "exploit") a.sign_policy = SignPolicy::Exploit;
    else if (*p == "subtract") a.sign_policy = SignPolicy::Subtract;
    else schema("analysis.sign_policy must be exploit or subtract");
  }
  a.default_p = num_or(*s, "P", a.default_p, "analysis");
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
  object(root, "scenario");
  ScenarioConfig cfg;
  if (const json* n = find(root, "name"); n && n->is_string()) cfg.name = n->get<std::string>();
  try {
    parse_agents(root, cfg);
    parse_graph(root, cfg);
    parse_trigger(root, cfg);
    parse_channels(root, cfg);
    parse_attack(root, cfg);
    parse_detection(root, cfg);
    parse_learning(root, cfg);
    parse_mitigation(root, cfg);
    parse_sim(root, cfg);
    parse_analysis(root, cfg);
  } catch (const json::exception& e) {
    schema(std::string("malformed field: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ValidationReport validate(const ScenarioConfig& cfg) {
  ValidationReport r;
  const SpectralSummary s = summarize(cfg.graph);
  r.lambda_g = s.lambda_g;
  r.lambda_symmetric = s.lambda_symmetric;
  r.balanced = s.balanced;
  const double lam = cfg.lambda();
  if (!r.balanced) r.warnings.push_back("graph is not balanced");
  for (std::size_t j = 0; j < cfg.size(); ++j) {
    AgentReport a;
    a.d_in = s.in_degree[j];
    a.bound = theorem_bound(a.d_in, lam, cfg.agents[j].rho, cfg.trigger.alpha, cfg.trigger.beta);
    a.delta = cfg.trigger.deltas[j];
    a.within_bound = a.delta <= a.bound;
    if (!(a.bound > 0.0)) {
      r.warnings.push_back("agent " + std::to_string(j) + ": no positive trigger gain satisfies the design bound");
    } else if (!a.within_bound) {
      std::ostringstream w;
      w << "agent " << j << ": delta " << a.delta << " exceeds bound " << a.bound;
      r.warnings.push_back(w.str());
    }
    r.agents.push_back(a);
  }
  return r;
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream o;
  o << std::setprecision(6);
  o << "lambda(G) = " << r.lambda_g << "  (symmetric part: " << r.lambda_symmetric << ")\n";
  o << "balanced: " << (r.balanced ? "yes" : "no") << "\n";
  o << "agent  d_in      bound     delta     ok\n";
  for (std::size_t j = 0; j < r.agents.size(); ++j) {
    const auto& a = r.agents[j];
    o << std::left << std::setw(7) << j << std::setw(10) << a.d_in << std::setw(10) << a.bound << std::setw(10)
      << a.delta << (a.within_bound ? "yes" : "NO") << "\n";
  }
  for (const auto& w : r.warnings) o << "warning: " << w << "\n";
  return o.str();
}

}  // namespace byzsync
