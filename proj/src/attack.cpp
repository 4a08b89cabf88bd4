#include "byzsync/attack.hpp"

#include <cmath>
#include <string>

#include "byzsync/error.hpp"
#include "byzsync/rng.hpp"

namespace byzsync {

std::string_view to_string(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

double falsification_offset(const ByzantineProfile& profile, Hypothesis truth) {
  switch (profile.sign) {
    case FalsifySign::Plus: return profile.delta;
    case FalsifySign::Minus: return -profile.delta;
    case FalsifySign::Hypothesis: break;
  }
  return truth == Hypothesis::H0 ? profile.delta : -profile.delta;
}

double falsify(double y_true, const ByzantineProfile& profile, Hypothesis truth, std::mt19937_64& rng) {
  const double draw = uniform01(rng);
  if (draw >= profile.p) return y_true;
  return y_true + falsification_offset(profile, truth);
}

WeightedDigraph manipulate_weights(const WeightedDigraph& g, std::span<const ByzantineProfile> profiles,
                                   WeightMode mode) {
  Matrix w = g.weights();
  const std::size_t n = g.size();
  for (const auto& p : profiles) {
    if (p.agent >= n) {
      throw Error(ErrorCode::InvalidArgument, "attack profile names agent " + std::to_string(p.agent));
    }
    if (p.omega == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) {
      if (mode == WeightMode::SelfDesigned) {
        if (g.weight(k, p.agent) > 0.0) w(k, p.agent) += p.omega;
      } else {
        if (g.weight(p.agent, k) > 0.0) w(p.agent, k) += p.omega;
      }
    }
  }
  return WeightedDigraph(std::move(w));
}

double sense(double y_sent, const ChannelModel& ch, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, std::sqrt(ch.sigma2));
  return ch.h * y_sent + noise(rng);
}

}  // namespace byzsync
