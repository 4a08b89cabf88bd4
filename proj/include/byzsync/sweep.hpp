#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <string_view>
#include <vector>

#include "byzsync/detection.hpp"
#include "byzsync/learning.hpp"
#include "byzsync/scenario.hpp"

namespace byzsync {

enum class Execution { Serial, Parallel };

/// Inclusive evenly spaced grid lo:hi:steps (steps points; one point when
/// steps == 1).
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t steps = 1;

  /// Throws InvalidArgument on anything but "a:b:steps" with steps >= 1.
  static GridSpec parse(std::string_view text);
  std::vector<double> values() const;
};

/// results[i] = f(i) for i < count. Items must not share mutable state; the
/// output order never depends on the schedule.
template <class R, class F>
std::vector<R> fan_out(std::size_t count, F&& f, Execution exec) {
  std::vector<R> out(count);
  const long long n = static_cast<long long>(count);
  if (exec == Execution::Parallel) {
    // Exceptions cannot cross the parallel region; keep the first and
    // rethrow it afterwards.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(byzsync_fan_out)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  }
  return out;
}

/// In-links of the analysed agent with noncentralities taken from the
/// configured window outputs. Byzantine links carry `delta` signed by the
/// sign policy and attack probability `p` (negative p keeps each profile's).
std::vector<DeflectionLink> analysis_links(const ScenarioConfig& cfg, double p, double delta);
std::vector<NeighborModel> analysis_neighbors(const ScenarioConfig& cfg, double delta);
double analysis_threshold(const ScenarioConfig& cfg);

struct DeflectionRow {
  double delta;
  double p;
  double d;

  friend bool operator==(const DeflectionRow&, const DeflectionRow&) = default;
};

/// Rows ordered delta-major, p-minor.
std::vector<DeflectionRow> deflection_surface(const ScenarioConfig& cfg, const GridSpec& p_grid,
                                              const GridSpec& delta_grid, Execution exec);

struct RocRow {
  double delta;
  double p;
  double pd;
  double pfa;

  friend bool operator==(const RocRow&, const RocRow&) = default;
};

std::vector<RocRow> roc_curve(const ScenarioConfig& cfg, const std::vector<double>& deltas, Execution exec);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

/// T over `windows` independent honest windows of length L with constant
/// outputs y_k (sender) and y_j (receiver). Window i draws from its own
/// stream, so serial and parallel runs agree exactly.
SampleMoments monte_carlo_link(std::size_t L, double sigma2, double h, double y_k, double y_j,
                               std::size_t windows, std::uint64_t seed, Execution exec);

/// Windows of a link whose sender falsifies with probability p; under H0
/// both ends sit at y and the offset is +delta, under H1 the ends sit at
/// y_k and y_j and the offset is -delta.
struct SyntheticLink {
  std::size_t L = 12;
  double sigma2 = 1.0;
  double h = 1.0;
  double delta = 0.0;
  double p = 0.0;
  double y_k = 0.0;
  double y_j = 0.0;
};

std::vector<double> synthetic_windows(const SyntheticLink& link, Hypothesis h, std::size_t windows,
                                      std::uint64_t seed);

}  // namespace byzsync
