#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "byzsync/attack.hpp"

namespace byzsync {

struct LearningConfig {
  std::size_t Lp = 20;
  std::size_t max_iterations = 20;
  double em_tol = 1e-10;
  std::size_t em_max_iter = 500;
  std::size_t tau0 = 40;
  std::size_t tau1 = 40;
  /// Minimum component separation before a two-component fit is accepted
  /// as evidence of an attacker (see classify_neighbor).
  double separation_threshold = 3.0;
  /// Minimum weight of the attacked component. Below it the second
  /// component is a tail artefact of the skewed statistic, not an attacker.
  double min_attack_weight = 0.05;
  /// When false the H0 gap is inverted as L h^2 delta^2, which is what
  /// additive link noise actually produces; when true it is also divided by
  /// the noise variance as in the closed-form moments.
  bool gap_scales_with_noise = true;
};

inline constexpr double kVarianceFloor = 1e-6;

/// Running per-hypothesis mean and variance updated one batch at a time.
struct MomentEstimator {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> var{0.0, 0.0};
  std::array<std::size_t, 2> iterations{0, 0};

  void update(std::span<const double> batch, Hypothesis h);
  bool has(Hypothesis h) const { return iterations[static_cast<int>(h)] > 0; }
};

/// Batch T-values split by the hypothesis label attached when they were taken.
struct LabeledData {
  std::vector<double> h0;
  std::vector<double> h1;

  const std::vector<double>& of(Hypothesis h) const { return h == Hypothesis::H0 ? h0 : h1; }
  std::vector<double>& of(Hypothesis h) { return h == Hypothesis::H0 ? h0 : h1; }
  std::size_t size() const { return h0.size() + h1.size(); }
};

struct Gaussian {
  double mu = 0.0;
  double var = 1.0;
};

/// Two-component mixture per hypothesis with mixing weights shared across
/// both hypotheses. Component 1 is the attacked component; pi[1] estimates
/// the attack probability.
struct MixtureEstimate {
  std::array<std::array<Gaussian, 2>, 2> comp{};  // [hypothesis][component]
  std::array<double, 2> pi{0.5, 0.5};
  std::array<bool, 2> fitted{false, false};       // per hypothesis
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;
  std::size_t iterations = 0;
  bool degenerate = false;

  const Gaussian& at(Hypothesis h, int j) const { return comp[static_cast<int>(h)][j]; }
  bool monotone(double rel_tol = 1e-9) const;
};

/// Drops per-hypothesis data below the tau thresholds.
LabeledData apply_thresholds(const LabeledData& data, const LearningConfig& cfg);

/// Quantile start: means at the 25th/75th percentiles, variances at half the
/// sample variance.
MixtureEstimate em_initialize(const LabeledData& data);

/// Runs EM from init on every hypothesis that has data. A component whose
/// responsibility mass drops below 1e-9 ends the fit with the single
/// Gaussian fallback and degenerate = true.
MixtureEstimate em_fit(const LabeledData& data, const MixtureEstimate& init, const LearningConfig& cfg);

double mixture_log_likelihood(const LabeledData& data, const MixtureEstimate& m);
double gaussian_log_likelihood(const LabeledData& data, const MomentEstimator& honest);

enum class NeighborClass { Honest, Byzantine };
std::string_view to_string(NeighborClass c);

struct Classification {
  NeighborClass cls = NeighborClass::Honest;
  double log_ratio = 0.0;   // log L(mixture) - log L(single Gaussian)
  double separation = 0.0;  // largest per-hypothesis component separation
};

/// Component separation sqrt(2) |mu1 - mu0| / sqrt(var0 + var1).
double component_separation(const Gaussian& a, const Gaussian& b);

/// Byzantine iff the mixture is strictly more likely than the single
/// Gaussian, its components are separated by at least the threshold and the
/// attacked component carries at least min_attack_weight. A mixture failing
/// either guard is treated as collapsed onto the Gaussian, which ties and
/// resolves to Honest.
Classification classify_neighbor(const LabeledData& data, const MomentEstimator& honest,
                                 const MixtureEstimate& mixture, double separation_threshold,
                                 double min_attack_weight = 0.0);

struct DeltaEstimate {
  double delta_hat = 0.0;
  Hypothesis source = Hypothesis::H0;
  std::size_t iteration = 0;
  bool warning = false;
};

/// sqrt((mu01 - mu00) / (L sigma2 h^2)); a negative gap yields 0 with warning.
DeltaEstimate estimate_delta_h0(const MixtureEstimate& m, std::size_t L, double sigma2, double h);

/// Inverse of mu11 - mu10 = L h delta^2 ... for the H1 components; a negative
/// radicand returns `previous` with warning.
DeltaEstimate estimate_delta_h1(const MixtureEstimate& m, std::size_t L, double h, double mu_j,
                                double mu_k, double previous);

/// Per-link record after each learning iteration.
struct LearningSnapshot {
  std::size_t iteration = 0;
  double t = 0.0;
  MixtureEstimate mixture;
  MomentEstimator honest;
  Classification classification;
  DeltaEstimate delta;
};

/// Accumulates labelled T-values for one link and refits every Lp points.
/// Each refit runs EM on all accepted points so far, warm-started from the
/// previous estimate.
class OnlineLinkLearner {
 public:
  OnlineLinkLearner(LearningConfig cfg, std::size_t L, double sigma2, double h);

  /// Adds one data point. mu_j is the mean of the learner's own broadcasts
  /// over the window and received_mean the mean sensed value (already
  /// scaled by the channel gain) from the neighbor.
  /// Returns a snapshot when an iteration completes.
  std::optional<LearningSnapshot> push(double t_value, Hypothesis label, double mu_j,
                                       double received_mean, double t);

  bool finished() const { return iteration_ >= cfg_.max_iterations; }
  const std::vector<LearningSnapshot>& history() const { return history_; }
  std::optional<LearningSnapshot> latest() const;

 private:
  LearningConfig cfg_;
  std::size_t L_;
  double sigma2_;
  double h_;
  LabeledData all_;
  LabeledData batch_;
  double mu_j_sum_ = 0.0;
  double received_sum_ = 0.0;
  std::size_t mean_count_ = 0;
  std::size_t iteration_ = 0;
  MomentEstimator honest_;
  std::optional<MixtureEstimate> mixture_;
  double delta_prev_ = 0.0;
  std::vector<LearningSnapshot> history_;
};

}  // namespace byzsync
