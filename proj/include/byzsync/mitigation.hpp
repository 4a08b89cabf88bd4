#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "byzsync/attack.hpp"
#include "byzsync/graph.hpp"
#include "byzsync/learning.hpp"

namespace byzsync {

struct WeightAssignmentProtocol {
  WeightMode mode = WeightMode::SelfDesigned;
  std::vector<double> expected_d_in;
  std::vector<double> observed_d_in;  // sum of gains actually assigned to each agent

  static WeightAssignmentProtocol observe(const WeightedDigraph& designed, const WeightedDigraph& actual,
                                         WeightMode mode);
};

/// Excess of assigned gain over the agent's known in-degree. Throws
/// ModeMismatch for self-designed weights.
double estimate_omega(std::size_t j, const WeightAssignmentProtocol& protocol);

/// Largest trigger gain that keeps the agent's passivity surplus above the
/// manipulation it has to absorb. Throws InfeasibleMitigation when <= 0.
double retune_delta(double rho, double lambda_g, double d_in, double omega_sum, double alpha, double beta);

struct PassivitySurplus {
  double rho_required = 0.0;
  double rho_surplus = 0.0;
};

PassivitySurplus passivity_surplus(double rho, double lambda_g, double d_in, double delta, double alpha,
                                   double beta);

/// Undo the falsification sign: subtract under H0, add under H1.
double correct_output(double y_received, double delta_hat, Hypothesis h);

/// Of {r, r - delta_hat, r + delta_hat}, the one closest to `reference`.
double correct_output_nearest(double y_received, double delta_hat, double reference);

/// Synchronization decision restricted to neighbors classified honest.
/// Throws NoHonestNeighbors.
Hypothesis honest_only_decision(std::span<const double> t_values, std::span<const NeighborClass> classes,
                                std::span<const double> sigma2s, std::size_t L, double lambda_margin);

struct DeviationBound {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack = 0.0) const { return lhs <= rhs + slack; }
};

/// Inputs for the attacked-network deviation inequality at one instant.
struct DeviationInputs {
  const WeightedDigraph* graph = nullptr;  // designed (pre-attack) topology
  std::span<const ByzantineProfile> profiles;
  std::span<const double> y;       // true outputs
  std::span<const double> e;       // y - last broadcast
  std::span<const double> deltas;  // trigger gains
  std::span<const double> rho;
  double lambda_g = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double t = 0.0;                  // profiles inactive before their start time
};

/// Diagonal of the weighting matrix in the deviation inequality.
std::vector<double> theta_diagonal(const DeviationInputs& in);

/// lhs = Yd^T Theta Yd; rhs = the omega, error and delta^2 terms. Throws
/// ThetaNotPositive.
DeviationBound deviation_bound(const DeviationInputs& in);

}  // namespace byzsync
