#include "byzsync/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "byzsync/error.hpp"

namespace byzsync {

SummaryStatistic::SummaryStatistic(std::size_t L) : L_(L), received_(L, 0.0), own_(L, 0.0) {
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "window length must be positive");
}

void SummaryStatistic::push(double received, double own) {
  received_[head_] = received;
  own_[head_] = own;
  head_ = (head_ + 1) % L_;
  count_ = std::min(count_ + 1, L_);
}

double SummaryStatistic::t_value() const {
  double t = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    const double d = received_[i] - own_[i];
    t += d * d;
  }
  return t;
}

double SummaryStatistic::eta(double sigma2) const {
  return std::max(0.0, t_value() - static_cast<double>(count_) * sigma2) / sigma2;
}

double SummaryStatistic::mean_received() const {
  if (count_ == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < count_; ++i) s += received_[i];
  return s / static_cast<double>(count_);
}

double SummaryStatistic::mean_own() const {
  if (count_ == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < count_; ++i) s += own_[i];
  return s / static_cast<double>(count_);
}

double decision_threshold(std::span<const double> sigma2s, std::size_t L, double lambda_margin) {
  double g = lambda_margin;
  for (double s2 : sigma2s) g += static_cast<double>(L) * s2;
  return g;
}

Hypothesis sync_decision(std::span<const double> t_values, std::span<const double> sigma2s,
                         std::size_t L, double lambda_margin) {
  if (t_values.size() != sigma2s.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one noise variance per neighbor statistic");
  }
  double total = 0.0;
  for (double t : t_values) total += t;
  return total < decision_threshold(sigma2s, L, lambda_margin) ? Hypothesis::H0 : Hypothesis::H1;
}

Hypothesis sync_decision(std::span<const SummaryStatistic> stats, std::span<const double> sigma2s,
                         const DetectionConfig& cfg) {
  std::vector<double> t;
  t.reserve(stats.size());
  for (const auto& s : stats) {
    if (!s.full()) throw Error(ErrorCode::WindowNotFull, "detection window not yet full");
    t.push_back(s.t_value());
  }
  return sync_decision(t, sigma2s, cfg.L, cfg.lambda_margin);
}

MomentSet link_moments(std::size_t L, double sigma2, double h, double delta, double eta, double eta_prime) {
  const double l = static_cast<double>(L);
  const double s4 = sigma2 * sigma2;
  const double shift = l * h * h * delta * delta;
  MomentSet m;
  m.mu00 = l * sigma2;
  m.mu01 = l * sigma2 + shift * sigma2;
  m.mu10 = (l + eta) * sigma2;
  m.mu11 = (l + eta_prime) * sigma2;
  m.var00 = 2.0 * l * s4;
  m.var01 = 2.0 * (l + 2.0 * shift) * s4;
  m.var10 = 2.0 * (l + 2.0 * eta) * s4;
  m.var11 = 2.0 * (l + 2.0 * eta_prime) * s4;
  return m;
}

double eta_prime(double eta, std::size_t L, double sigma2, double h, double delta, double mean_gap) {
  const double l = static_cast<double>(L);
  return eta + l * (h * h * delta * delta - 2.0 * h * delta * mean_gap) / sigma2;
}

namespace {

struct Component {
  double weight;
  double mean;
  double var;
};

template <class F>
void for_each_component(Hypothesis hyp, std::span<const NeighborModel> neighbors, F&& f) {
  std::vector<const NeighborModel*> byz;
  double base_mean = 0.0, base_var = 0.0;
  for (const auto& nb : neighbors) {
    if (nb.byzantine) {
      byz.push_back(&nb);
    } else if (hyp == Hypothesis::H0) {
      base_mean += nb.moments.mu00;
      base_var += nb.moments.var00;
    } else {
      base_mean += nb.moments.mu10;
      base_var += nb.moments.var10;
    }
  }
  if (byz.size() > kMaxByzantineNeighbors) {
    throw Error(ErrorCode::TooManyByzantines,
                std::to_string(byz.size()) + " Byzantine neighbors exceed the limit of 20");
  }
  const std::size_t subsets = std::size_t{1} << byz.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    Component c{1.0, base_mean, base_var};
    for (std::size_t b = 0; b < byz.size(); ++b) {
      const auto& m = byz[b]->moments;
      const bool attacking = (mask >> b) & 1U;
      c.weight *= attacking ? byz[b]->p : 1.0 - byz[b]->p;
      if (hyp == Hypothesis::H0) {
        c.mean += attacking ? m.mu01 : m.mu00;
        c.var += attacking ? m.var01 : m.var00;
      } else {
        c.mean += attacking ? m.mu11 : m.mu10;
        c.var += attacking ? m.var11 : m.var10;
      }
    }
    f(c);
  }
}

}  // namespace

double mixture_pdf(double x, Hypothesis h, std::span<const NeighborModel> neighbors) {
  double density = 0.0;
  for_each_component(h, neighbors, [&](const Component& c) {
    if (c.weight == 0.0) return;
    const double z = (x - c.mean);
    density += c.weight * std::exp(-0.5 * z * z / c.var) / std::sqrt(2.0 * std::numbers::pi * c.var);
  });
  return density;
}

DetectionProbabilities transient_pd_pfa(double gamma, std::span<const NeighborModel> neighbors) {
  double sd10 = 0.0, sd00 = 0.0;
  for (const auto& nb : neighbors) {
    sd10 += nb.moments.var10;
    sd00 += nb.moments.var00;
  }
  sd10 = std::sqrt(sd10);
  sd00 = std::sqrt(sd00);

  DetectionProbabilities out;
  for_each_component(Hypothesis::H1, neighbors,
                     [&](const Component& c) { out.pd += c.weight * q_function((gamma - c.mean) / sd10); });
  for_each_component(Hypothesis::H0, neighbors,
                     [&](const Component& c) { out.pfa += c.weight * q_function((gamma - c.mean) / sd00); });
  out.pd = std::clamp(out.pd, 0.0, 1.0);
  out.pfa = std::clamp(out.pfa, 0.0, 1.0);
  return out;
}

double q_function(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

DeflectionTerms deflection_terms(std::span<const DeflectionLink> links) {
  DeflectionTerms t;
  for (const auto& k : links) {
    const double l = static_cast<double>(k.L);
    const double s2 = k.sigma2;
    const double s4 = s2 * s2;
    const double honest_h0 = l * s2;
    const double honest_h1 = (l + k.eta) * s2;
    if (!k.byzantine) {
      t.mean_h0 += honest_h0;
      t.mean_h1 += honest_h1;
      t.variance_h0 += 2.0 * l * s4;
      continue;
    }
    const double hd2 = k.h * k.h * k.delta * k.delta;
    const double etap = eta_prime(k.eta, k.L, s2, k.h, k.delta, k.mean_gap);
    t.mean_h0 += k.p * (l + l * hd2) * s2 + (1.0 - k.p) * honest_h0;
    t.mean_h1 += k.p * (l + etap) * s2 + (1.0 - k.p) * honest_h1;
    t.variance_h0 += k.p * l * l * hd2 * hd2 * s4 - k.p * k.p * l * l * hd2 * hd2 * s4 + 2.0 * l * s4;
  }
  return t;
}

double deflection(std::span<const DeflectionLink> links) {
  const DeflectionTerms t = deflection_terms(links);
  if (!(t.variance_h0 > 0.0)) throw Error(ErrorCode::DegenerateVariance, "H0 variance is not positive");
  return (t.mean_h1 - t.mean_h0) / t.variance_h0;
}

double blinding_gap(std::span<const DeflectionLink> links) {
  double attack = 0.0, honest = 0.0;
  for (const auto& k : links) {
    honest += k.eta * k.sigma2;
    if (!k.byzantine) continue;
    attack += static_cast<double>(k.L) * k.p *
              (2.0 * k.h * k.delta * k.mean_gap + k.h * k.h * k.delta * k.delta * (k.sigma2 - 1.0));
  }
  return attack - honest;
}

double homogeneous_blinding_ratio(double eta, double sigma2, std::size_t L, double p, double h,
                                  double delta, double mean_gap) {
  const double denom = static_cast<double>(L) * p *
                       (2.0 * h * delta * mean_gap + h * h * delta * delta * (sigma2 - 1.0));
  return eta * sigma2 / denom;
}

}  // namespace byzsync
