#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace byzsync {

struct TriggerConfig {
  double delta = 0.1;
  double c_offset = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
};

struct TriggerState {
  double last_sent = 0.0;
  std::vector<double> event_times;
  double min_interval = std::numeric_limits<double>::infinity();

  double error(double y) const { return y - last_sent; }
  /// Broadcast y at time t: resets the error and updates interval stats.
  void record_event(double t, double y);
};

/// Right-hand side of the event-trigger design bound
///   delta <= ((2 / d_in)(lambda + rho) - 1/alpha - 1/beta) / (alpha + beta).
double theorem_bound(double d_in, double lambda_g, double rho, double alpha, double beta);

/// Same bound, but throws InfeasibleDesign when it is not positive.
double design_delta(double d_in, double lambda_g, double rho, double alpha, double beta);

/// |e|^2 > delta |y|^2 + c_offset, strictly.
bool check_trigger(double y, const TriggerState& state, const TriggerConfig& cfg);

struct InputTerm {
  double gain;
  double received;
};

/// Diffusive input sum_k a_k (received_k - own_last_sent).
double control_input(std::span<const InputTerm> terms, double own_last_sent);

struct ZenoReport {
  std::size_t event_count = 0;
  double min_interval = std::numeric_limits<double>::infinity();
};

/// Events strictly inside the horizon and the smallest gap between them.
ZenoReport zeno_report(const TriggerState& state, double horizon);

}  // namespace byzsync
