#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "byzsync/attack.hpp"

namespace byzsync {

struct DetectionConfig {
  std::size_t L = 15;
  double lambda_margin = 15.0;
  double Ts = 0.01;
};

/// Sliding window of (received, own last broadcast) pairs for one link.
class SummaryStatistic {
 public:
  explicit SummaryStatistic(std::size_t L = 15);

  void push(double received, double own);
  bool full() const { return count_ == L_; }
  std::size_t size() const { return count_; }
  std::size_t window_length() const { return L_; }

  /// Sum of squared differences over the stored pairs.
  double t_value() const;
  /// Noise-corrected noncentrality max(0, T - L sigma2) / sigma2.
  double eta(double sigma2) const;
  double mean_received() const;
  double mean_own() const;

 private:
  std::size_t L_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::vector<double> received_;
  std::vector<double> own_;
};

/// gamma = sum_k L sigma_k^2 + lambda.
double decision_threshold(std::span<const double> sigma2s, std::size_t L, double lambda_margin);

/// H0 iff sum T < gamma. Throws WindowNotFull if any statistic is short.
Hypothesis sync_decision(std::span<const SummaryStatistic> stats, std::span<const double> sigma2s,
                         const DetectionConfig& cfg);
Hypothesis sync_decision(std::span<const double> t_values, std::span<const double> sigma2s,
                         std::size_t L, double lambda_margin);

/// Means and variances of a link statistic under each hypothesis (index 0)
/// and with the attack applied (index 1).
struct MomentSet {
  double mu00 = 0, mu01 = 0, mu10 = 0, mu11 = 0;
  double var00 = 0, var01 = 0, var10 = 0, var11 = 0;
};

MomentSet link_moments(std::size_t L, double sigma2, double h, double delta, double eta, double eta_prime);

/// Noncentrality of a link whose sender transmits y - delta, given the
/// honest noncentrality and the window mean gap mu_k - mu_j (mu_k already
/// scaled by h). delta may be negative.
double eta_prime(double eta, std::size_t L, double sigma2, double h, double delta, double mean_gap);

struct NeighborModel {
  MomentSet moments;
  bool byzantine = false;
  double p = 0.0;
};

inline constexpr std::size_t kMaxByzantineNeighbors = 20;

/// Density of the summed statistic: a 2^N_B component Gaussian mixture.
double mixture_pdf(double x, Hypothesis h, std::span<const NeighborModel> neighbors);

struct DetectionProbabilities {
  double pd = 0.0;
  double pfa = 0.0;
};

DetectionProbabilities transient_pd_pfa(double gamma, std::span<const NeighborModel> neighbors);

/// Gaussian tail probability P(Z > z).
double q_function(double z);

/// One in-link of the agent whose detector is analysed in steady state.
struct DeflectionLink {
  std::size_t L = 15;
  double sigma2 = 1.0;
  double h = 1.0;
  double eta = 0.0;
  double mean_gap = 0.0;  // mu_k - mu_j
  bool byzantine = false;
  double delta = 0.0;
  double p = 0.0;
};

struct DeflectionTerms {
  double mean_h0 = 0.0;
  double mean_h1 = 0.0;
  double variance_h0 = 0.0;
};

DeflectionTerms deflection_terms(std::span<const DeflectionLink> links);

/// (E[T|H1] - E[T|H0]) / Var[T|H0]. Throws DegenerateVariance.
double deflection(std::span<const DeflectionLink> links);

/// Attack side minus honest side of the blinding condition; zero means the
/// detector is blind, positive means the attacker overshoots.
double blinding_gap(std::span<const DeflectionLink> links);

/// Fraction N_B / N that blinds a homogeneous neighbourhood.
double homogeneous_blinding_ratio(double eta, double sigma2, std::size_t L, double p, double h,
                                  double delta, double mean_gap);

}  // namespace byzsync
