#pragma once

#include <cstdint>
#include <random>

namespace byzsync {

enum class StreamPurpose : std::uint64_t {
  Noise = 1,
  Attack = 2,
  Synthetic = 3,
  Sweep = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for (purpose, id) derived from the master seed.
/// The result depends only on its arguments, never on call order.
std::mt19937_64 make_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t id);

/// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);

}  // namespace byzsync
