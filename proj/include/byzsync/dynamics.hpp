#pragma once

#include <span>

namespace byzsync {

/// First-order plant xdot = -c x + u, y = x. With storage V = x^2 / 2 it is
/// output passive with index rho = c.
struct AgentModel {
  double c = 1.0;
  double rho = 1.0;
  double x0 = 0.0;

  static AgentModel first_order(double c, double x0) { return {c, c, x0}; }
};

/// The two integrals carry the supply rate along the trajectory so passivity
/// can be audited without differentiating sampled data.
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double u_held = 0.0;
  double storage = 0.0;
  double supply_integral = 0.0;  // int u*y dt
  double output_energy = 0.0;    // int y*y dt

  static AgentState initial(const AgentModel& m);
};

/// One classical RK4 step with the input held constant. Throws NonFinite.
AgentState step(const AgentState& s, const AgentModel& m, double dt);

struct PassivitySample {
  double storage;
  double supply_integral;
  double output_energy;
};

/// Worst (dV - int u y + rho int y^2) / dt over consecutive samples spaced
/// dt apart. Nonpositive up to integration error for a plant that is output
/// passive with index rho.
double passivity_residual(std::span<const PassivitySample> trace, double rho, double dt);

}  // namespace byzsync
