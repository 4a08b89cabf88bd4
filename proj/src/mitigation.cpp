#include "byzsync/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "byzsync/detection.hpp"
#include "byzsync/error.hpp"

namespace byzsync {

WeightAssignmentProtocol WeightAssignmentProtocol::observe(const WeightedDigraph& designed,
                                                           const WeightedDigraph& actual, WeightMode mode) {
  WeightAssignmentProtocol p;
  p.mode = mode;
  p.expected_d_in = degrees(designed).in;
  p.observed_d_in = degrees(actual).in;
  return p;
}

double estimate_omega(std::size_t j, const WeightAssignmentProtocol& protocol) {
  if (protocol.mode != WeightMode::NeighborAssigned) {
    throw Error(ErrorCode::ModeMismatch, "weight excess is only observable when neighbors assign gains");
  }
  if (j >= protocol.expected_d_in.size() || j >= protocol.observed_d_in.size()) {
    throw Error(ErrorCode::InvalidArgument, "agent index out of range");
  }
  return std::max(0.0, protocol.observed_d_in[j] - protocol.expected_d_in[j]);
}

double retune_delta(double rho, double lambda_g, double d_in, double omega_sum, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha, beta must be > 0");
  const double num = rho + lambda_g - d_in * (1.0 / (2.0 * alpha) + 1.0 / (2.0 * beta)) - omega_sum / (2.0 * alpha);
  const double den = (d_in + omega_sum) * (alpha + beta) / 2.0;
  const double d = num / den;
  if (!(d > 0.0)) {
    std::ostringstream msg;
    msg << "no positive trigger gain absorbs omega=" << omega_sum << " (bound " << d << ")";
    throw Error(ErrorCode::InfeasibleMitigation, msg.str());
  }
  return d;
}

PassivitySurplus passivity_surplus(double rho, double lambda_g, double d_in, double delta, double alpha,
                                   double beta) {
  PassivitySurplus s;
  s.rho_required = d_in * ((alpha + beta) * delta / 2.0 + 1.0 / (2.0 * alpha) + 1.0 / (2.0 * beta)) - lambda_g;
  s.rho_surplus = rho - s.rho_required;
  return s;
}

double correct_output(double y_received, double delta_hat, Hypothesis h) {
  return h == Hypothesis::H0 ? y_received - delta_hat : y_received + delta_hat;
}

double correct_output_nearest(double y_received, double delta_hat, double reference) {
  double best = y_received;
  for (double c : {y_received - delta_hat, y_received + delta_hat}) {
    if (std::abs(c - reference) < std::abs(best - reference)) best = c;
  }
  return best;
}

Hypothesis honest_only_decision(std::span<const double> t_values, std::span<const NeighborClass> classes,
                                std::span<const double> sigma2s, std::size_t L, double lambda_margin) {
  if (t_values.size() != classes.size() || t_values.size() != sigma2s.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one class and variance per neighbor statistic");
  }
  std::vector<double> t, s2;
  for (std::size_t k = 0; k < t_values.size(); ++k) {
    if (classes[k] != NeighborClass::Honest) continue;
    t.push_back(t_values[k]);
    s2.push_back(sigma2s[k]);
  }
  if (t.empty()) throw Error(ErrorCode::NoHonestNeighbors, "every neighbor is classified Byzantine");
  return sync_decision(t, s2, L, lambda_margin);
}

std::vector<double> theta_diagonal(const DeviationInputs& in) {
  const Degrees deg = degrees(*in.graph);
  const std::size_t n = in.graph->size();
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta[j] = in.lambda_g + in.rho[j] -
               deg.in[j] * ((in.alpha + in.beta) * in.deltas[j] / 2.0 + 1.0 / (2.0 * in.alpha) +
                            1.0 / (2.0 * in.beta));
  }
  return theta;
}

DeviationBound deviation_bound(const DeviationInputs& in) {
  const WeightedDigraph& g = *in.graph;
  const std::size_t n = g.size();
  if (in.y.size() != n || in.e.size() != n || in.deltas.size() != n || in.rho.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "deviation bound inputs must have one entry per agent");
  }
  const std::vector<double> theta = theta_diagonal(in);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(theta[j] > 0.0)) {
      throw Error(ErrorCode::ThetaNotPositive, "weighting entry for agent " + std::to_string(j) + " is not positive");
    }
  }
  const Degrees deg = degrees(g);
  const SyncMeasure sm = sync_measure(in.y);

  DeviationBound b;
  for (std::size_t j = 0; j < n; ++j) b.lhs += theta[j] * sm.deviation[j] * sm.deviation[j];

  // Per-agent omega, delta and unweighted in-neighbor count (Byzantine only).
  std::vector<double> omega(n, 0.0), delta(n, 0.0), nb(n, 0.0);
  std::vector<bool> byz(n, false);
  for (const auto& p : in.profiles) {
    if (!p.active(in.t)) continue;
    byz[p.agent] = true;
    omega[p.agent] += p.omega;
    delta[p.agent] = std::max(delta[p.agent], p.delta);
  }
  for (std::size_t j = 0; j < n; ++j)
    if (byz[j]) nb[j] = static_cast<double>(g.in_neighbors(j).size());

  double err_terms = 0.0, delta_terms = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    err_terms += (deg.in[j] / 2.0 + nb[j] * omega[j]) * in.e[j] * in.e[j];
    if (!byz[j]) continue;
    delta_terms += (deg.in[j] + nb[j] * omega[j]) * delta[j] * delta[j];
    b.rhs += nb[j] * omega[j] / (2.0 * in.alpha) * in.y[j] * in.y[j];
    for (std::size_t k : g.in_neighbors(j)) {
      b.rhs += (0.25 + 1.0 / (2.0 * in.beta)) * omega[j] * in.y[k] * in.y[k];
    }
  }
  b.rhs += (in.alpha + in.beta) * (err_terms + delta_terms);
  return b;
}

}  // namespace byzsync
