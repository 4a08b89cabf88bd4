#include "byzsync/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>

#include "byzsync/attack.hpp"
#include "byzsync/detection.hpp"
#include "byzsync/dynamics.hpp"
#include "byzsync/error.hpp"
#include "byzsync/mitigation.hpp"
#include "byzsync/rng.hpp"
#include "byzsync/trigger.hpp"

namespace byzsync {

std::size_t SimulationTrace::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorCode::InvalidArgument, "no trace column named " + std::string(name));
}

bool SimulationTrace::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> SimulationTrace::series(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

double window_mean(const SimulationTrace& trace, std::string_view name, double t_from, double t_to) {
  const std::size_t c = trace.column(name);
  double s = 0.0;
  std::size_t count = 0;
  for (const auto& r : trace.rows) {
    if (r[0] < t_from || r[0] > t_to) continue;
    s += r[c];
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "no trace rows in the requested window");
  return s / static_cast<double>(count);
}

namespace {

std::string link_name(const char* prefix, std::size_t k, std::size_t j) {
  return std::string(prefix) + "_" + std::to_string(k) + "_" + std::to_string(j);
}

Hypothesis true_hypothesis(std::span<const double> y, double eps) {
  return sync_measure(y).max_abs_deviation() < eps ? Hypothesis::H0 : Hypothesis::H1;
}

struct LearnerLink {
  std::size_t j;
  std::size_t k;
  std::size_t slot;  // position of k among j's in-neighbors
  OnlineLinkLearner learner;
  bool correcting = false;
  double last_base = std::numeric_limits<double>::quiet_NaN();
  double corrected = 0.0;
};

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg);
  SimulationTrace run();

 private:
  void broadcast(std::size_t j, double t, Hypothesis truth, bool count_event);
  void refresh_weights(double t);
  void apply_retunes(double t);
  void sample_detection(double t, bool window_end);
  double received(std::size_t k, std::size_t j, double t);
  void update_inputs(double t);
  void record(double t, bool window_end);
  std::vector<double> outputs() const;

  const ScenarioConfig& cfg_;
  std::size_t n_;
  double lambda_;
  std::size_t ts_steps_;
  std::size_t window_steps_;
  std::vector<std::vector<std::size_t>> in_nb_;
  Degrees designed_deg_;

  std::vector<AgentState> st_;
  std::vector<TriggerState> trig_;
  std::vector<double> deltas_;
  std::vector<double> broadcast_;
  std::vector<const ByzantineProfile*> profile_;
  std::vector<bool> attacking_;
  std::vector<bool> was_active_;
  std::vector<std::mt19937_64> attack_rng_;
  std::vector<std::mt19937_64> noise_rng_;    // detection sensing, per link k*n+j
  std::vector<std::mt19937_64> control_rng_;  // noisy control reception, per link
  std::vector<bool> active_mask_;
  WeightedDigraph weights_;
  std::vector<bool> retune_done_;

  std::vector<std::vector<SummaryStatistic>> stats_;
  std::vector<std::vector<double>> sigma2s_;
  std::vector<int> decision_;
  std::size_t samples_ = 0;
  std::vector<LearnerLink> learners_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> learner_index_;

  bool record_deviation_ = false;
  SimulationTrace trace_;
};

Simulator::Simulator(const ScenarioConfig& cfg)
    : cfg_(cfg), n_(cfg.size()), lambda_(cfg.lambda()), designed_deg_(degrees(cfg.graph)) {
  const auto& sim = cfg.sim;
  ts_steps_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.detection.cfg.Ts / sim.dt)));
  window_steps_ = ts_steps_ * cfg.detection.cfg.L;

  for (std::size_t j = 0; j < n_; ++j) in_nb_.push_back(cfg.graph.in_neighbors(j));

  profile_.assign(n_, nullptr);
  for (const auto& p : cfg.attack) {
    if (profile_[p.agent]) throw Error(ErrorCode::InvalidArgument, "at most one attack profile per agent");
    profile_[p.agent] = &p;
  }
  attacking_.assign(n_, false);
  was_active_.assign(n_, false);
  for (std::size_t j = 0; j < n_; ++j) attack_rng_.push_back(make_stream(sim.seed, StreamPurpose::Attack, j));
  for (std::size_t l = 0; l < n_ * n_; ++l) {
    noise_rng_.push_back(make_stream(sim.seed, StreamPurpose::Noise, l));
    control_rng_.push_back(make_stream(sim.seed, StreamPurpose::Noise, n_ * n_ + l));
  }

  for (const auto& m : cfg.agents) st_.push_back(AgentState::initial(m));
  trig_.resize(n_);
  deltas_ = cfg.trigger.deltas;
  broadcast_.assign(n_, 0.0);
  retune_done_.assign(cfg.mitigation.retune.size(), false);
  weights_ = cfg.graph;
  active_mask_.assign(n_, false);

  decision_.assign(n_, -1);
  for (std::size_t j = 0; j < n_; ++j) {
    stats_.emplace_back(in_nb_[j].size(), SummaryStatistic(cfg.detection.cfg.L));
    std::vector<double> s2;
    for (std::size_t k : in_nb_[j]) s2.push_back(cfg.channels.sigma2(k, j));
    sigma2s_.push_back(std::move(s2));
  }

  if (cfg.learning.enabled) {
    if (!cfg.detection.enabled) throw Error(ErrorCode::InvalidArgument, "learning needs detection enabled");
    for (std::size_t j : cfg.learning.agents) {
      for (std::size_t slot = 0; slot < in_nb_[j].size(); ++slot) {
        const std::size_t k = in_nb_[j][slot];
        const ChannelModel ch = cfg.channels.link(k, j);
        learner_index_[{j, k}] = learners_.size();
        learners_.push_back(
            LearnerLink{j, k, slot, OnlineLinkLearner(cfg.learning.cfg, cfg.detection.cfg.L, ch.sigma2, ch.h)});
      }
    }
  }

  // The deviation inequality needs a positive weighting matrix at the
  // designed trigger gains; otherwise it is not monitored.
  if (!cfg.attack.empty()) {
    DeviationInputs in;
    in.graph = &cfg.graph;
    in.deltas = deltas_;
    std::vector<double> rho;
    for (const auto& m : cfg.agents) rho.push_back(m.rho);
    in.rho = rho;
    in.lambda_g = lambda_;
    in.alpha = cfg.trigger.alpha;
    in.beta = cfg.trigger.beta;
    const auto theta = theta_diagonal(in);
    record_deviation_ = std::all_of(theta.begin(), theta.end(), [](double v) { return v > 0.0; });
  }

  auto& c = trace_.columns;
  c = {"t", "yd_inf", "yd_2", "truth", "wend"};
  for (std::size_t j = 0; j < n_; ++j) {
    for (const char* p : {"y", "u", "ev", "dec", "delta"}) c.push_back(p + std::to_string(j));
  }
  if (cfg.detection.enabled) {
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k : in_nb_[j])
        for (const char* p : {"T", "mr", "mo"}) c.push_back(link_name(p, k, j));
  }
  for (const auto& l : learners_)
    for (const char* p : {"pi1", "dhat", "cls"}) c.push_back(link_name(p, l.k, l.j));
  if (record_deviation_) {
    c.push_back("dev_lhs");
    c.push_back("dev_rhs");
  }
  trace_.dt = sim.dt;
}

std::vector<double> Simulator::outputs() const {
  std::vector<double> y(n_);
  for (std::size_t j = 0; j < n_; ++j) y[j] = st_[j].y;
  return y;
}

void Simulator::broadcast(std::size_t j, double t, Hypothesis truth, bool count_event) {
  const double y = st_[j].y;
  if (count_event) {
    trig_[j].record_event(t, y);
  } else {
    trig_[j].last_sent = y;
  }
  const ByzantineProfile* p = profile_[j];
  broadcast_[j] = (p && p->active(t) && attacking_[j]) ? y + falsification_offset(*p, truth) : y;
}

void Simulator::refresh_weights(double t) {
  std::vector<bool> mask(n_, false);
  std::vector<ByzantineProfile> active;
  for (std::size_t j = 0; j < n_; ++j) {
    if (profile_[j] && profile_[j]->active(t) && profile_[j]->omega > 0.0) {
      mask[j] = true;
      active.push_back(*profile_[j]);
    }
  }
  if (mask == active_mask_) return;
  active_mask_ = mask;
  weights_ = manipulate_weights(cfg_.graph, active, cfg_.mitigation.mode);
}

void Simulator::apply_retunes(double t) {
  const auto& events = cfg_.mitigation.retune;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (retune_done_[i] || t + 1e-12 < events[i].t) continue;
    retune_done_[i] = true;
    const auto& ev = events[i];
    if (ev.delta) {
      deltas_[ev.agent] = *ev.delta;
      continue;
    }
    const auto protocol = WeightAssignmentProtocol::observe(cfg_.graph, weights_, cfg_.mitigation.mode);
    const double omega = estimate_omega(ev.agent, protocol);
    deltas_[ev.agent] = retune_delta(cfg_.agents[ev.agent].rho, lambda_, designed_deg_.in[ev.agent], omega,
                                     cfg_.trigger.alpha, cfg_.trigger.beta);
  }
}

double Simulator::received(std::size_t k, std::size_t j, double t) {
  double base = broadcast_[k];
  if (cfg_.sim.noisy_control) base = sense(base, cfg_.channels.link(k, j), control_rng_[k * n_ + j]);
  auto it = learner_index_.find({j, k});
  if (it == learner_index_.end() || !cfg_.mitigation.correction_enabled ||
      t + 1e-12 < cfg_.mitigation.correction_t_start) {
    return base;
  }
  LearnerLink& l = learners_[it->second];
  const auto snap = l.learner.latest();
  if (!snap || snap->classification.cls != NeighborClass::Byzantine) {
    l.correcting = false;
    return base;
  }
  if (l.correcting && base == l.last_base) return l.corrected;
  const double d = snap->delta.delta_hat;
  const Hypothesis hyp = decision_[j] == 0 ? Hypothesis::H0 : Hypothesis::H1;
  switch (cfg_.mitigation.correction_policy) {
    case CorrectionPolicy::Plain:
      l.corrected = correct_output(base, d, hyp);
      break;
    case CorrectionPolicy::Expected:
      l.corrected = correct_output(base, snap->mixture.pi[1] * d, hyp);
      break;
    case CorrectionPolicy::Nearest:
      l.corrected = correct_output_nearest(base, d, l.correcting ? l.corrected : trig_[j].last_sent);
      break;
  }
  l.correcting = true;
  l.last_base = base;
  return l.corrected;
}

void Simulator::update_inputs(double t) {
  for (std::size_t j = 0; j < n_; ++j) {
    double u = 0.0;
    for (std::size_t k : in_nb_[j]) u += weights_.weight(k, j) * (received(k, j, t) - trig_[j].last_sent);
    st_[j].u_held = u;
  }
}

void Simulator::sample_detection(double t, bool window_end) {
  ++samples_;
  for (std::size_t j = 0; j < n_; ++j) {
    auto& stats = stats_[j];
    for (std::size_t s = 0; s < in_nb_[j].size(); ++s) {
      const std::size_t k = in_nb_[j][s];
      stats[s].push(sense(broadcast_[k], cfg_.channels.link(k, j), noise_rng_[k * n_ + j]), trig_[j].last_sent);
    }
    if (stats.empty() || !stats.front().full()) continue;
    std::vector<double> tv;
    for (const auto& s : stats) tv.push_back(s.t_value());

    // A learner that has flagged a neighbor decides on its honest links only.
    std::vector<NeighborClass> classes(stats.size(), NeighborClass::Honest);
    bool flagged = false;
    for (std::size_t s = 0; s < stats.size(); ++s) {
      auto it = learner_index_.find({j, in_nb_[j][s]});
      if (it == learner_index_.end()) continue;
      const auto snap = learners_[it->second].learner.latest();
      if (snap && snap->classification.cls == NeighborClass::Byzantine) {
        classes[s] = NeighborClass::Byzantine;
        flagged = true;
      }
    }
    const auto& dc = cfg_.detection.cfg;
    Hypothesis h;
    if (flagged && std::count(classes.begin(), classes.end(), NeighborClass::Honest) > 0) {
      h = honest_only_decision(tv, classes, sigma2s_[j], dc.L, dc.lambda_margin);
    } else {
      h = sync_decision(tv, sigma2s_[j], dc.L, dc.lambda_margin);
    }
    decision_[j] = static_cast<int>(h);
  }

  // Learners label each completed window with the true hypothesis.
  if (!window_end || t + 1e-12 < cfg_.learning.t_start) return;
  const Hypothesis truth = true_hypothesis(outputs(), cfg_.sim.sync_eps);
  for (auto& l : learners_) {
    const auto& s = stats_[l.j][l.slot];
    if (!s.full()) continue;
    l.learner.push(s.t_value(), truth, s.mean_own(), s.mean_received(), t);
  }
}

void Simulator::record(double t, bool window_end) {
  const std::vector<double> y = outputs();
  const SyncMeasure sm = sync_measure(y);
  double norm2 = 0.0;
  for (double d : sm.deviation) norm2 += d * d;
  std::vector<double> row;
  row.reserve(trace_.columns.size());
  row.push_back(t);
  row.push_back(sm.max_abs_deviation());
  row.push_back(std::sqrt(norm2));
  row.push_back(static_cast<double>(true_hypothesis(y, cfg_.sim.sync_eps)));
  row.push_back(window_end ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    row.push_back(y[j]);
    row.push_back(st_[j].u_held);
    row.push_back(static_cast<double>(trig_[j].event_times.size()));
    row.push_back(static_cast<double>(decision_[j]));
    row.push_back(deltas_[j]);
  }
  if (cfg_.detection.enabled) {
    for (std::size_t j = 0; j < n_; ++j) {
      for (const auto& s : stats_[j]) {
        row.push_back(s.t_value());
        row.push_back(s.mean_received());
        row.push_back(s.mean_own());
      }
    }
  }
  for (const auto& l : learners_) {
    const auto snap = l.learner.latest();
    row.push_back(snap ? snap->mixture.pi[1] : std::numeric_limits<double>::quiet_NaN());
    row.push_back(snap ? snap->delta.delta_hat : std::numeric_limits<double>::quiet_NaN());
    row.push_back(snap ? static_cast<double>(snap->classification.cls == NeighborClass::Byzantine) : -1.0);
  }
  if (record_deviation_) {
    std::vector<double> e(n_), rho(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      e[j] = trig_[j].error(y[j]);
      rho[j] = cfg_.agents[j].rho;
    }
    DeviationInputs in;
    in.graph = &cfg_.graph;
    in.profiles = cfg_.attack;
    in.y = y;
    in.e = e;
    in.deltas = deltas_;
    in.rho = rho;
    in.lambda_g = lambda_;
    in.alpha = cfg_.trigger.alpha;
    in.beta = cfg_.trigger.beta;
    in.t = t;
    try {
      const DeviationBound b = deviation_bound(in);
      row.push_back(b.lhs);
      row.push_back(b.rhs);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::ThetaNotPositive) throw;
      row.push_back(std::numeric_limits<double>::quiet_NaN());
      row.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  trace_.rows.push_back(std::move(row));
}

SimulationTrace Simulator::run() {
  const auto& sim = cfg_.sim;
  const std::size_t steps = static_cast<std::size_t>(std::llround(sim.t_end / sim.dt));
  trace_.steps = steps;

  // Everyone broadcasts at t = 0.
  refresh_weights(0.0);
  apply_retunes(0.0);
  {
    const Hypothesis truth = true_hypothesis(outputs(), sim.sync_eps);
    for (std::size_t j = 0; j < n_; ++j) {
      const ByzantineProfile* p = profile_[j];
      if (p && p->active(0.0)) {
        attacking_[j] = uniform01(attack_rng_[j]) < p->p;
        was_active_[j] = true;
      }
      broadcast(j, 0.0, truth, true);
    }
  }
  update_inputs(0.0);
  record(0.0, false);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k + 1) * sim.dt;
    for (std::size_t j = 0; j < n_; ++j) st_[j] = step(st_[j], cfg_.agents[j], sim.dt);

    refresh_weights(t);
    apply_retunes(t);
    const Hypothesis truth = true_hypothesis(outputs(), sim.sync_eps);

    // Event checks see the pre-broadcast state of every agent, then all
    // triggered agents transmit together.
    std::vector<bool> fire(n_, false);
    for (std::size_t j = 0; j < n_; ++j) {
      const TriggerConfig tc{deltas_[j], cfg_.trigger.c_offset, cfg_.trigger.alpha, cfg_.trigger.beta};
      fire[j] = check_trigger(st_[j].y, trig_[j], tc);
    }
    for (std::size_t j = 0; j < n_; ++j)
      if (fire[j]) broadcast(j, t, truth, true);

    bool window_end = false;
    if (cfg_.detection.enabled && (k + 1) % ts_steps_ == 0) {
      window_end = (samples_ + 1) % cfg_.detection.cfg.L == 0;
      sample_detection(t, window_end);
    }

    // Attackers redraw on activation and after the last sample of every
    // detection window, and push the new value out immediately.
    const bool window_over = (k + 1) % window_steps_ == 0;
    for (std::size_t j = 0; j < n_; ++j) {
      const ByzantineProfile* p = profile_[j];
      if (!p || !p->active(t)) continue;
      if (!was_active_[j] || window_over) {
        attacking_[j] = uniform01(attack_rng_[j]) < p->p;
        was_active_[j] = true;
        broadcast(j, t, truth, false);
      }
    }
    update_inputs(t);
    if ((k + 1) % sim.record_stride == 0) record(t, window_end);
  }

  for (const auto& tr : trig_) {
    const ZenoReport z = zeno_report(tr, sim.t_end + sim.dt);
    trace_.event_counts.push_back(tr.event_times.size());
    trace_.min_intervals.push_back(z.min_interval);
  }
  for (const auto& l : learners_) trace_.learning.push_back({l.j, l.k, l.learner.history()});
  return std::move(trace_);
}

}  // namespace

SimulationTrace run_scenario(const ScenarioConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

}  // namespace byzsync
