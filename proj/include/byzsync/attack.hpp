#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string_view>

#include "byzsync/graph.hpp"

namespace byzsync {

/// H0: the network is synchronized. H1: it is not.
enum class Hypothesis { H0 = 0, H1 = 1 };

std::string_view to_string(Hypothesis h);

/// Sign rule for the falsification offset.
enum class FalsifySign { Hypothesis, Plus, Minus };

struct ByzantineProfile {
  std::size_t agent = 0;
  double delta = 0.0;  // falsification magnitude
  double p = 0.0;      // falsification probability per broadcast
  double omega = 0.0;  // gain inflation
  double t_start = 0.0;
  FalsifySign sign = FalsifySign::Hypothesis;

  bool active(double t) const { return t >= t_start; }
};

struct ChannelModel {
  double h = 1.0;
  double sigma2 = 1.0;
};

/// Who controls a feedback gain. Self-designed: each agent picks the gains on
/// its own in-edges. Neighbor-assigned: the sender of an edge picks its gain.
enum class WeightMode { SelfDesigned, NeighborAssigned };

/// Offset an attacking broadcast carries: +delta under H0 and -delta under
/// H1 unless the profile fixes the sign.
double falsification_offset(const ByzantineProfile& profile, Hypothesis truth);

/// y + offset with probability p, otherwise y. Exactly one uniform draw is
/// consumed per call.
double falsify(double y_true, const ByzantineProfile& profile, Hypothesis truth, std::mt19937_64& rng);

/// Gains after every profile with omega > 0 has inflated the edges it
/// controls under the given mode.
WeightedDigraph manipulate_weights(const WeightedDigraph& g, std::span<const ByzantineProfile> profiles,
                                   WeightMode mode);

/// h * y_sent + n, n ~ N(0, sigma2).
double sense(double y_sent, const ChannelModel& ch, std::mt19937_64& rng);

}  // namespace byzsync
