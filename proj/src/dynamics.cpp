#include "byzsync/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "byzsync/error.hpp"

namespace byzsync {

AgentState AgentState::initial(const AgentModel& m) {
  AgentState s;
  s.x = m.x0;
  s.y = m.x0;
  s.storage = 0.5 * m.x0 * m.x0;
  return s;
}

AgentState step(const AgentState& s, const AgentModel& m, double dt) {
  // Augmented state (x, int u y, int y^2) so the supply integrals share the
  // integrator's accuracy.
  using V3 = std::array<double, 3>;
  const double u = s.u_held;
  auto f = [&](const V3& z) -> V3 { return {-m.c * z[0] + u, u * z[0], z[0] * z[0]}; };
  auto axpy = [](const V3& a, double h, const V3& k) -> V3 {
    return {a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2]};
  };

  const V3 z0{s.x, 0.0, 0.0};
  const V3 k1 = f(z0);
  const V3 k2 = f(axpy(z0, dt / 2, k1));
  const V3 k3 = f(axpy(z0, dt / 2, k2));
  const V3 k4 = f(axpy(z0, dt, k3));
  V3 z1;
  for (int i = 0; i < 3; ++i) z1[i] = z0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

  if (!std::isfinite(z1[0])) throw Error(ErrorCode::NonFinite, "agent state diverged");

  AgentState out = s;
  out.x = z1[0];
  out.y = z1[0];
  out.storage = 0.5 * z1[0] * z1[0];
  out.supply_integral += z1[1];
  out.output_energy += z1[2];
  return out;
}

double passivity_residual(std::span<const PassivitySample> trace, double rho, double dt) {
  double worst = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double dv = trace[i].storage - trace[i - 1].storage;
    const double supply = trace[i].supply_integral - trace[i - 1].supply_integral;
    const double energy = trace[i].output_energy - trace[i - 1].output_energy;
    worst = std::max(worst, (dv - supply + rho * energy) / dt);
  }
  return worst;
}

}  // namespace byzsync
