#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "byzsync/learning.hpp"
#include "byzsync/scenario.hpp"

namespace byzsync {

struct LinkLearningResult {
  std::size_t learner = 0;
  std::size_t neighbor = 0;
  std::vector<LearningSnapshot> history;
};

/// Recorded time series. Columns (0-based agent indices):
///   t, yd_inf, yd_2, truth, wend          global
///   y<j>, u<j>, ev<j>, dec<j>, delta<j>   per agent
///   T_<k>_<j>, mr_<k>_<j>, mo_<k>_<j>     per detection link k -> j
///   pi1_<k>_<j>, dhat_<k>_<j>, cls_<k>_<j> per learning link
///   dev_lhs, dev_rhs                     when an attack is configured
/// dec and cls are -1 until available. wend is 1 on rows where a detection
/// window has just been completed.
struct SimulationTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<std::size_t> event_counts;
  std::vector<double> min_intervals;
  std::vector<LinkLearningResult> learning;

  /// Throws InvalidArgument for unknown names.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> series(std::string_view name) const;
};

SimulationTrace run_scenario(const ScenarioConfig& cfg);

/// Mean of a column over rows with t in [t_from, t_to].
double window_mean(const SimulationTrace& trace, std::string_view column, double t_from, double t_to);

}  // namespace byzsync
