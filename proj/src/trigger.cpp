#include "byzsync/trigger.hpp"

#include <algorithm>
#include <sstream>

#include "byzsync/error.hpp"

namespace byzsync {

void TriggerState::record_event(double t, double y) {
  if (!event_times.empty()) min_interval = std::min(min_interval, t - event_times.back());
  event_times.push_back(t);
  last_sent = y;
}

double theorem_bound(double d_in, double lambda_g, double rho, double alpha, double beta) {
  if (!(d_in > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "design bound needs d_in, alpha, beta > 0");
  }
  return ((2.0 / d_in) * (lambda_g + rho) - 1.0 / alpha - 1.0 / beta) / (alpha + beta);
}

double design_delta(double d_in, double lambda_g, double rho, double alpha, double beta) {
  const double bound = theorem_bound(d_in, lambda_g, rho, alpha, beta);
  if (!(bound > 0.0)) {
    std::ostringstream msg;
    msg << "trigger gain bound is " << bound << " (d_in=" << d_in << ", rho=" << rho << ")";
    throw Error(ErrorCode::InfeasibleDesign, msg.str());
  }
  return bound;
}

bool check_trigger(double y, const TriggerState& state, const TriggerConfig& cfg) {
  const double e = state.error(y);
  return e * e > cfg.delta * y * y + cfg.c_offset;
}

double control_input(std::span<const InputTerm> terms, double own_last_sent) {
  double u = 0.0;
  for (const auto& t : terms) u += t.gain * (t.received - own_last_sent);
  return u;
}

ZenoReport zeno_report(const TriggerState& state, double horizon) {
  ZenoReport r;
  double prev = 0.0;
  bool have_prev = false;
  for (double t : state.event_times) {
    if (t > horizon) break;
    ++r.event_count;
    if (have_prev) r.min_interval = std::min(r.min_interval, t - prev);
    prev = t;
    have_prev = true;
  }
  return r;
}

}  // namespace byzsync
