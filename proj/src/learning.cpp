#include "byzsync/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "byzsync/error.hpp"

namespace byzsync {

namespace {

constexpr double kMassFloor = 1e-9;

int idx(Hypothesis h) { return static_cast<int>(h); }

double log_normal_pdf(double x, const Gaussian& g) {
  const double d = x - g.mu;
  return -0.5 * (std::log(2.0 * std::numbers::pi * g.var) + d * d / g.var);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

Gaussian sample_gaussian(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::max(var, kVarianceFloor)};
}

double log_pi(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

}  // namespace

void MomentEstimator::update(std::span<const double> batch, Hypothesis h) {
  if (batch.empty()) return;
  const int i = idx(h);
  const double l = static_cast<double>(iterations[i]);
  const double li = static_cast<double>(batch.size());
  double sum = 0.0;
  for (double t : batch) sum += t;
  const double new_mean = l / (l + 1.0) * mean[i] + sum / ((l + 1.0) * li);
  double sq = 0.0;
  for (double t : batch) sq += (t - new_mean) * (t - new_mean);
  var[i] = l / (l + 1.0) * var[i] + sq / ((l + 1.0) * li);
  mean[i] = new_mean;
  ++iterations[i];
}

bool MixtureEstimate::monotone(double rel_tol) const {
  for (std::size_t i = 1; i < ll_trace.size(); ++i) {
    const double slack = rel_tol * std::max(1.0, std::abs(ll_trace[i - 1]));
    if (ll_trace[i] < ll_trace[i - 1] - slack) return false;
  }
  return true;
}

LabeledData apply_thresholds(const LabeledData& data, const LearningConfig& cfg) {
  LabeledData out;
  if (data.h0.size() >= cfg.tau0) out.h0 = data.h0;
  if (data.h1.size() >= cfg.tau1) out.h1 = data.h1;
  return out;
}

MixtureEstimate em_initialize(const LabeledData& data) {
  MixtureEstimate m;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    const auto& v = data.of(h);
    if (v.size() < 2) continue;
    const Gaussian whole = sample_gaussian(v);
    const double var = std::max(0.5 * whole.var, kVarianceFloor);
    m.comp[idx(h)][0] = {quantile(v, 0.25), var};
    m.comp[idx(h)][1] = {quantile(v, 0.75), var};
    m.fitted[idx(h)] = true;
  }
  m.pi = {0.5, 0.5};
  return m;
}

double mixture_log_likelihood(const LabeledData& data, const MixtureEstimate& m) {
  double ll = 0.0;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    if (!m.fitted[idx(h)]) continue;
    for (double x : data.of(h)) {
      ll += log_add(log_pi(m.pi[0]) + log_normal_pdf(x, m.at(h, 0)),
                    log_pi(m.pi[1]) + log_normal_pdf(x, m.at(h, 1)));
    }
  }
  return ll;
}

double gaussian_log_likelihood(const LabeledData& data, const MomentEstimator& honest) {
  double ll = 0.0;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    if (!honest.has(h)) continue;
    const Gaussian g{honest.mean[idx(h)], std::max(honest.var[idx(h)], kVarianceFloor)};
    for (double x : data.of(h)) ll += log_normal_pdf(x, g);
  }
  return ll;
}

MixtureEstimate em_fit(const LabeledData& data, const MixtureEstimate& init, const LearningConfig& cfg) {
  MixtureEstimate m = init;
  m.ll_trace.clear();
  m.degenerate = false;
  m.iterations = 0;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    if (data.of(h).size() < 2) m.fitted[idx(h)] = false;
  }
  const std::size_t total = (m.fitted[0] ? data.h0.size() : 0) + (m.fitted[1] ? data.h1.size() : 0);
  if (total == 0) {
    m.log_likelihood = 0.0;
    return m;
  }

  double ll = mixture_log_likelihood(data, m);
  m.ll_trace.push_back(ll);
  std::vector<double> resp;

  for (std::size_t it = 0; it < cfg.em_max_iter; ++it) {
    std::array<double, 2> pi_mass{0.0, 0.0};
    std::array<std::array<Gaussian, 2>, 2> next = m.comp;
    bool collapsed = false;

    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
      if (!m.fitted[idx(h)]) continue;
      const auto& v = data.of(h);
      resp.resize(v.size());
      // E-step: responsibility of the attacked component.
      for (std::size_t n = 0; n < v.size(); ++n) {
        const double a = log_pi(m.pi[0]) + log_normal_pdf(v[n], m.at(h, 0));
        const double b = log_pi(m.pi[1]) + log_normal_pdf(v[n], m.at(h, 1));
        resp[n] = std::exp(b - log_add(a, b));
      }
      // M-step per component.
      for (int j = 0; j < 2; ++j) {
        double mass = 0.0, first = 0.0;
        for (std::size_t n = 0; n < v.size(); ++n) {
          const double r = j == 1 ? resp[n] : 1.0 - resp[n];
          mass += r;
          first += r * v[n];
        }
        pi_mass[j] += mass;
        if (mass < kMassFloor) {
          collapsed = true;
          continue;
        }
        const double mu = first / mass;
        double second = 0.0;
        for (std::size_t n = 0; n < v.size(); ++n) {
          const double r = j == 1 ? resp[n] : 1.0 - resp[n];
          second += r * (v[n] - mu) * (v[n] - mu);
        }
        next[idx(h)][j] = {mu, std::max(second / mass, kVarianceFloor)};
      }
    }

    if (collapsed) {
      for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
        if (!m.fitted[idx(h)]) continue;
        const Gaussian g = sample_gaussian(data.of(h));
        m.comp[idx(h)] = {g, g};
      }
      m.pi = {1.0, 0.0};
      m.degenerate = true;
      m.log_likelihood = mixture_log_likelihood(data, m);
      m.ll_trace.push_back(m.log_likelihood);
      return m;
    }

    m.comp = next;
    const double tot = pi_mass[0] + pi_mass[1];
    m.pi = {pi_mass[0] / tot, pi_mass[1] / tot};
    ++m.iterations;

    const double ll_new = mixture_log_likelihood(data, m);
    m.ll_trace.push_back(ll_new);
    const double change = std::abs(ll_new - ll) / std::max(1.0, std::abs(ll));
    ll = ll_new;
    if (change < cfg.em_tol) break;
  }
  m.log_likelihood = ll;
  return m;
}

std::string_view to_string(NeighborClass c) { return c == NeighborClass::Honest ? "honest" : "byzantine"; }

double component_separation(const Gaussian& a, const Gaussian& b) {
  return std::numbers::sqrt2 * std::abs(b.mu - a.mu) / std::sqrt(a.var + b.var);
}

Classification classify_neighbor(const LabeledData& data, const MomentEstimator& honest,
                                 const MixtureEstimate& mixture, double separation_threshold,
                                 double min_attack_weight) {
  // Compare both models on the hypotheses each of them covers.
  LabeledData common;
  MixtureEstimate mix = mixture;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    const bool usable = mixture.fitted[idx(h)] && honest.has(h);
    if (usable) common.of(h) = data.of(h);
    mix.fitted[idx(h)] = usable;
  }
  Classification c;
  if (common.size() == 0) return c;

  c.log_ratio = mixture_log_likelihood(common, mix) - gaussian_log_likelihood(common, honest);
  if (!mixture.degenerate) {
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
      if (!mix.fitted[idx(h)]) continue;
      c.separation = std::max(c.separation, component_separation(mix.at(h, 0), mix.at(h, 1)));
    }
  }
  const bool separated = c.separation >= separation_threshold && mixture.pi[1] >= min_attack_weight;
  c.cls = (separated && c.log_ratio > 0.0) ? NeighborClass::Byzantine : NeighborClass::Honest;
  return c;
}

DeltaEstimate estimate_delta_h0(const MixtureEstimate& m, std::size_t L, double sigma2, double h) {
  DeltaEstimate d;
  d.source = Hypothesis::H0;
  const double gap = m.at(Hypothesis::H0, 1).mu - m.at(Hypothesis::H0, 0).mu;
  if (gap < 0.0) {
    d.warning = true;
    return d;
  }
  d.delta_hat = std::sqrt(gap / (static_cast<double>(L) * sigma2 * h * h));
  return d;
}

DeltaEstimate estimate_delta_h1(const MixtureEstimate& m, std::size_t L, double h, double mu_j,
                                double mu_k, double previous) {
  DeltaEstimate d;
  d.source = Hypothesis::H1;
  const double gap = m.at(Hypothesis::H1, 1).mu - m.at(Hypothesis::H1, 0).mu;
  const double off = mu_j - mu_k;
  const double radicand = gap / (static_cast<double>(L) * h) + off * off / h;
  if (radicand < 0.0) {
    d.delta_hat = previous;
    d.warning = true;
    return d;
  }
  const double sh = std::sqrt(h);
  d.delta_hat = std::max(0.0, (std::sqrt(radicand) - off / sh) / sh);
  return d;
}

OnlineLinkLearner::OnlineLinkLearner(LearningConfig cfg, std::size_t L, double sigma2, double h)
    : cfg_(cfg), L_(L), sigma2_(sigma2), h_(h) {
  if (cfg_.Lp < 4) throw Error(ErrorCode::InvalidArgument, "Lp must be at least 4");
  if (!(cfg_.em_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "em_tol must be positive");
}

std::optional<LearningSnapshot> OnlineLinkLearner::latest() const {
  if (history_.empty()) return std::nullopt;
  return history_.back();
}

std::optional<LearningSnapshot> OnlineLinkLearner::push(double t_value, Hypothesis label, double mu_j,
                                                        double received_mean, double t) {
  if (finished()) return std::nullopt;
  batch_.of(label).push_back(t_value);
  mu_j_sum_ += mu_j;
  received_sum_ += received_mean;
  ++mean_count_;
  if (batch_.size() < cfg_.Lp) return std::nullopt;

  ++iteration_;
  for (Hypothesis hyp : {Hypothesis::H0, Hypothesis::H1}) {
    const auto& b = batch_.of(hyp);
    honest_.update(b, hyp);
    auto& dst = all_.of(hyp);
    dst.insert(dst.end(), b.begin(), b.end());
  }
  const double mean_own = mu_j_sum_ / static_cast<double>(mean_count_);
  const double mean_received = received_sum_ / static_cast<double>(mean_count_);
  batch_ = {};
  mu_j_sum_ = received_sum_ = 0.0;
  mean_count_ = 0;

  LearningSnapshot snap;
  snap.iteration = iteration_;
  snap.t = t;
  snap.honest = honest_;

  const LabeledData accepted = apply_thresholds(all_, cfg_);
  if (accepted.size() == 0) {
    history_.push_back(snap);
    return snap;
  }

  MixtureEstimate init = em_initialize(accepted);
  if (mixture_ && !mixture_->degenerate) {
    for (Hypothesis hyp : {Hypothesis::H0, Hypothesis::H1}) {
      if (mixture_->fitted[idx(hyp)]) init.comp[idx(hyp)] = mixture_->comp[idx(hyp)];
    }
    init.pi = mixture_->pi;
  }
  MixtureEstimate fit = em_fit(accepted, init, cfg_);
  mixture_ = fit;

  snap.mixture = fit;
  snap.classification = classify_neighbor(accepted, honest_, fit, cfg_.separation_threshold, cfg_.min_attack_weight);

  // Estimate from the hypothesis with more accepted data.
  const bool use_h1 = fit.fitted[1] && (!fit.fitted[0] || accepted.h1.size() > accepted.h0.size());
  if (use_h1) {
    // Undo the attacker's expected shift on the received mean once an
    // estimate exists; the first iteration uses the raw mean.
    const double mu_k = mean_received + h_ * fit.pi[1] * delta_prev_;
    snap.delta = estimate_delta_h1(fit, L_, h_, mean_own, mu_k, delta_prev_);
  } else if (fit.fitted[0]) {
    snap.delta = estimate_delta_h0(fit, L_, cfg_.gap_scales_with_noise ? sigma2_ : 1.0, h_);
  }
  snap.delta.iteration = iteration_;
  delta_prev_ = snap.delta.delta_hat;

  history_.push_back(snap);
  return snap;
}

}  // namespace byzsync
