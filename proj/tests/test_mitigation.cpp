#include <cmath>
#include <vector>

#include "byzsync/attack.hpp"
#include "byzsync/detection.hpp"
#include "byzsync/error.hpp"
#include "byzsync/mitigation.hpp"
#include "byzsync/trigger.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzsync;

TEST_CASE("assigned gain excess") {
  const auto g = testing::example4_graph();
  const auto honest = WeightAssignmentProtocol::observe(g, g, WeightMode::NeighborAssigned);
  for (std::size_t j = 0; j < 4; ++j) CHECK(estimate_omega(j, honest) == 0.0);

  const std::vector<ByzantineProfile> ex4{{1, 0.0, 0.0, 2.5, 0.0}, {3, 0.0, 0.0, 2.0, 0.0}};
  const auto attacked = manipulate_weights(g, ex4, WeightMode::NeighborAssigned);
  const auto proto = WeightAssignmentProtocol::observe(g, attacked, WeightMode::NeighborAssigned);
  CHECK(proto.expected_d_in[2] == 2.0);
  CHECK(estimate_omega(2, proto) == doctest::Approx(2.5));
  CHECK(estimate_omega(0, proto) == doctest::Approx(2.0));

  // Two inflating senders add up.
  const WeightedDigraph star(Matrix::from_rows({{0, 0, 1}, {0, 0, 1}, {0, 0, 0}}));
  const std::vector<ByzantineProfile> both{{0, 0, 0, 1.0, 0}, {1, 0, 0, 1.0, 0}};
  const auto p2 = WeightAssignmentProtocol::observe(
      star, manipulate_weights(star, both, WeightMode::NeighborAssigned), WeightMode::NeighborAssigned);
  CHECK(estimate_omega(2, p2) == doctest::Approx(2.0));

  const auto self = WeightAssignmentProtocol::observe(g, attacked, WeightMode::SelfDesigned);
  CHECK_THROWS_AS(estimate_omega(2, self), Error);
}

TEST_CASE("retuned trigger gain") {
  CHECK(retune_delta(1.2, 2.0, 1.0, 2.0, 1.0, 1.0) == doctest::Approx(0.40).epsilon(1e-14));
  CHECK(retune_delta(2.6, 2.0, 2.0, 2.5, 1.0, 1.0) == doctest::Approx(0.30).epsilon(1e-14));
  CHECK(retune_delta(2.6, 2.0, 2.0, 2.5, 1.0, 1.0) >= 0.15);
  for (double rho : {1.2, 2.2, 4.0}) {
    CHECK(retune_delta(rho, 1.234, 2.0, 0.0, 1.0, 1.0) == theorem_bound(2.0, 1.234, rho, 1.0, 1.0));
  }
  CHECK_THROWS_AS(retune_delta(0.5, 0.1, 2.0, 5.0, 1.0, 1.0), Error);
}

TEST_CASE("passivity surplus") {
  // At the design bound the surplus is exactly absorbed.
  const double b = theorem_bound(2.0, 1.234, 1.2, 1.0, 1.0);
  const auto at_bound = passivity_surplus(1.2, 1.234, 2.0, b, 1.0, 1.0);
  CHECK(std::abs(at_bound.rho_surplus) < 1e-12);
  const auto lower = passivity_surplus(1.2, 1.234, 2.0, 0.5 * b, 1.0, 1.0);
  CHECK(lower.rho_surplus > at_bound.rho_surplus);
}

TEST_CASE("output correction") {
  CHECK(correct_output(7.0, 0.0, Hypothesis::H0) == 7.0);
  CHECK(correct_output(10.0, 8.0, Hypothesis::H0) == 2.0);
  CHECK(correct_output(-6.0, 8.0, Hypothesis::H1) == 2.0);
  CHECK(correct_output_nearest(10.0, 8.0, 2.5) == 2.0);
  CHECK(correct_output_nearest(10.0, 8.0, 17.0) == 18.0);
  CHECK(correct_output_nearest(10.0, 8.0, 9.0) == 10.0);

  std::mt19937_64 rng(9);
  const ByzantineProfile p{0, 8.0, 1.0, 0.0, 0.0};
  for (double y : {-3.0, 0.0, 2.0, 5.5}) {
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
      CHECK(correct_output(falsify(y, p, h, rng), 8.0, h) == y);
    }
  }
}

TEST_CASE("decision over honest neighbors only") {
  const std::vector<double> t{14, 16, 15}, s2{1, 1, 1};
  const std::vector<NeighborClass> all_honest(3, NeighborClass::Honest);
  CHECK(honest_only_decision(t, all_honest, s2, 15, 15) == sync_decision(t, s2, 15, 15));

  const std::vector<double> polluted{14, 16, 400};
  const std::vector<NeighborClass> one_bad{NeighborClass::Honest, NeighborClass::Honest, NeighborClass::Byzantine};
  CHECK(sync_decision(polluted, s2, 15, 15) == Hypothesis::H1);
  CHECK(honest_only_decision(polluted, one_bad, s2, 15, 15) == Hypothesis::H0);

  const std::vector<NeighborClass> none(3, NeighborClass::Byzantine);
  CHECK_THROWS_AS(honest_only_decision(t, none, s2, 15, 15), Error);
}

namespace {
struct Fig1Inputs {
  WeightedDigraph g = testing::fig1_graph();
  std::vector<ByzantineProfile> profiles;
  std::vector<double> y, e, deltas{0.21, 0.14, 0.20, 0.60, 0.29}, rho{1.2, 2.2, 2.4, 0.6, 4.0};

  DeviationInputs view() const {
    DeviationInputs in;
    in.graph = &g;
    in.profiles = profiles;
    in.y = y;
    in.e = e;
    in.deltas = deltas;
    in.rho = rho;
    in.lambda_g = algebraic_connectivity(g);
    in.t = 1.0;
    return in;
  }
};
}  // namespace

TEST_CASE("deviation bound at synchronization") {
  Fig1Inputs f;
  f.y.assign(5, 0.7);
  f.e.assign(5, 0.0);
  const auto b = deviation_bound(f.view());
  CHECK(std::abs(b.lhs) < 1e-12);
  CHECK(std::abs(b.rhs) < 1e-12);
  CHECK(b.holds(1e-12));
  for (double th : theta_diagonal(f.view())) CHECK(th > 0.0);
}

TEST_CASE("falsification term scales with the square of its size") {
  Fig1Inputs f;
  f.y = {1.0, 0.5, -0.2, 0.3, 0.0};
  f.e.assign(5, 0.0);
  f.profiles = {{0, 1.0, 1.0, 0.0, 0.0}};
  const double base = deviation_bound(f.view()).rhs;
  f.profiles[0].delta = 2.0;
  const double doubled = deviation_bound(f.view()).rhs;
  f.profiles.clear();
  const double none = deviation_bound(f.view()).rhs;
  CHECK((doubled - none) == doctest::Approx(4.0 * (base - none)).epsilon(1e-12));
  CHECK(base > none);

  // Before the start time the profile is ignored.
  f.profiles = {{0, 2.0, 1.0, 0.0, 5.0}};
  CHECK(deviation_bound(f.view()).rhs == none);
}

TEST_CASE("deviation bound errors") {
  Fig1Inputs f;
  f.y = {1, 2, 3};
  f.e = {0, 0, 0};
  CHECK_THROWS_AS(deviation_bound(f.view()), Error);

  Fig1Inputs big;
  big.y.assign(5, 1.0);
  big.e.assign(5, 0.0);
  big.deltas.assign(5, 5.0);
  try {
    deviation_bound(big.view());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ThetaNotPositive);
  }
}
