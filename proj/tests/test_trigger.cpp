#include <vector>

#include "byzsync/error.hpp"
#include "byzsync/graph.hpp"
#include "byzsync/trigger.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzsync;

namespace {
// Hand form of the design bound.
double bound_by_hand(double d_in, double lam, double rho, double a, double b) {
  return ((2.0 / d_in) * (lam + rho) - 1.0 / a - 1.0 / b) / (a + b);
}
}  // namespace

TEST_CASE("design bounds for the five-agent example") {
  const auto g = testing::fig1_graph();
  const double lam = algebraic_connectivity(g);
  const Degrees d = degrees(g);
  const std::vector<double> rho{1.2, 2.2, 2.4, 0.6, 4.0};
  const std::vector<double> expected{0.217, 0.1447, 0.2113, 0.834, 0.3085};
  const std::vector<double> chosen{0.21, 0.14, 0.20, 0.60, 0.29};
  for (std::size_t j = 0; j < 5; ++j) {
    const double b = design_delta(d.in[j], lam, rho[j], 1.0, 1.0);
    CHECK(b == doctest::Approx(expected[j]).epsilon(1e-3 / expected[j]));
    CHECK(b == doctest::Approx(bound_by_hand(d.in[j], lam, rho[j], 1.0, 1.0)));
    CHECK(b >= chosen[j]);
  }
  CHECK(design_delta(2, 1.234, 1.2, 1, 1) == doctest::Approx(0.217));
  CHECK(design_delta(4, 1.234, 4, 1, 1) == doctest::Approx(0.3085));
  CHECK(theorem_bound(3, 2.0, 1.0, 2.0, 0.5) == doctest::Approx(bound_by_hand(3, 2.0, 1.0, 2.0, 0.5)));
}

TEST_CASE("infeasible design") {
  CHECK(theorem_bound(1, 0, 1, 1, 1) == 0.0);
  CHECK_THROWS_AS(design_delta(1, 0, 1, 1, 1), Error);
  try {
    design_delta(1, 0, 1, 1, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleDesign);
  }
}

TEST_CASE("trigger condition is strict") {
  TriggerState s;
  TriggerConfig cfg{0.21, 0.0, 1.0, 1.0};
  s.last_sent = 5.0;
  CHECK_FALSE(check_trigger(5.0, s, cfg));
  s.last_sent = 1.0;
  CHECK(check_trigger(2.0, s, cfg));
  TriggerConfig quarter{0.25, 0.0, 1.0, 1.0};
  s.last_sent = 1.0;
  CHECK_FALSE(check_trigger(2.0, s, quarter));  // 1 == 0.25 * 4
  TriggerConfig offset{0.25, 0.5, 1.0, 1.0};
  s.last_sent = 0.0;
  CHECK(check_trigger(1.2, s, offset));  // 1.44 > 0.36 + 0.5
  s.last_sent = 0.8;
  CHECK_FALSE(check_trigger(1.2, s, offset));  // 0.16 < 0.86
}

TEST_CASE("events reset the error and track intervals") {
  TriggerState s;
  s.record_event(0.0, 1.0);
  s.record_event(0.5, 2.0);
  s.record_event(0.7, 3.0);
  CHECK(s.error(3.0) == 0.0);
  CHECK(s.min_interval == doctest::Approx(0.2));
  const auto z = zeno_report(s, 10.0);
  CHECK(z.event_count == 3);
  CHECK(z.min_interval == doctest::Approx(0.2));
  const auto none = zeno_report(TriggerState{}, 10.0);
  CHECK(none.event_count == 0);
  CHECK(std::isinf(none.min_interval));
}

TEST_CASE("diffusive input") {
  const std::vector<InputTerm> same{{1.0, 4.0}, {2.0, 4.0}};
  CHECK(control_input(same, 4.0) == 0.0);
  const std::vector<InputTerm> agent1{{2.0, -3.0}};
  CHECK(control_input(agent1, 5.0) == -16.0);
  const std::vector<InputTerm> a{{1.0, 10.0}}, b{{1.0, 5.0}};
  CHECK(control_input(a, 5.0) == 5.0);
  CHECK(control_input(b, 10.0) == -5.0);
}
