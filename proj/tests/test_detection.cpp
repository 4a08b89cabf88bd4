#include <cmath>
#include <vector>

#include "byzsync/detection.hpp"
#include "byzsync/error.hpp"
#include "byzsync/sweep.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace byzsync;

TEST_CASE("summary statistic window") {
  SummaryStatistic same(3);
  for (int i = 0; i < 5; ++i) same.push(1.5, 1.5);
  CHECK(same.full());
  CHECK(same.t_value() == 0.0);

  SummaryStatistic two(2);
  two.push(0, 1);
  two.push(0, 2);
  CHECK(two.t_value() == 5.0);
  two.push(3, 3);  // slides out the first pair
  CHECK(two.t_value() == 4.0);
  CHECK(two.mean_received() == 1.5);
  CHECK(two.mean_own() == 2.5);
  CHECK(two.eta(1.0) == doctest::Approx(2.0));
}

TEST_CASE("threshold and decision") {
  const std::vector<double> s2{1, 1, 1};
  CHECK(decision_threshold(s2, 15, 15) == 60.0);
  const std::vector<double> zero{0, 0, 0}, edge{20, 20, 20}, below{20, 20, 19.999};
  CHECK(sync_decision(zero, s2, 15, 15) == Hypothesis::H0);
  CHECK(sync_decision(edge, s2, 15, 15) == Hypothesis::H1);
  CHECK(sync_decision(below, s2, 15, 15) == Hypothesis::H0);

  std::vector<SummaryStatistic> short_stats(1, SummaryStatistic(4));
  short_stats[0].push(1, 1);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(sync_decision(short_stats, one, DetectionConfig{4, 15, 0.01}), Error);
}

TEST_CASE("closed-form link moments") {
  const MomentSet m = link_moments(15, 1.0, 0.96, 1.0, 0.0, 0.0);
  CHECK(m.mu01 == doctest::Approx(28.824));
  CHECK(m.mu00 == 15.0);
  const MomentSet z = link_moments(15, 1.3, 0.9, 0.0, 2.0, 2.0);
  CHECK(z.mu01 == z.mu00);
  CHECK(z.var01 == z.var00);
  CHECK(z.mu11 == z.mu10);
  const MomentSet g = link_moments(12, 1.22, 1.0, 8.0, 3.0, 1.0);
  CHECK(g.mu01 >= g.mu00);
  CHECK(g.var01 >= g.var00);
}

TEST_CASE("noncentrality with a falsified sender") {
  // Sender mean 2 above receiver, falsified down by delta: the new gap is
  // 2 - delta, so the shifted energy is L (2 - delta)^2 / sigma2.
  const double L = 10, s2 = 2.0, gap = 2.0, d = 0.5;
  const double eta = L * gap * gap / s2;
  CHECK(eta_prime(eta, 10, s2, 1.0, d, gap) == doctest::Approx(L * (gap - d) * (gap - d) / s2));
}

TEST_CASE("honest link moments match Monte Carlo at L = 50") {
  const std::size_t L = 50;
  const double s2 = 1.3, h = 0.9, yk = 2.0, yj = 1.5;
  const SampleMoments mc = monte_carlo_link(L, s2, h, yk, yj, 10000, 99, Execution::Parallel);
  const double eta = L * (h * yk - yj) * (h * yk - yj) / s2;
  const MomentSet cf = link_moments(L, s2, h, 0.0, eta, eta);
  CHECK(std::abs(mc.mean / cf.mu10 - 1.0) <= 0.02);
  CHECK(std::abs(mc.variance / cf.var10 - 1.0) <= 0.02);

  const SampleMoments h0 = monte_carlo_link(L, 1.0, 1.0, 0.0, 0.0, 1000, 5, Execution::Serial);
  CHECK(std::abs(h0.mean / 50.0 - 1.0) <= 0.05);
}

namespace {
std::vector<NeighborModel> neighbours(std::size_t byz, double p) {
  std::vector<NeighborModel> out;
  for (std::size_t i = 0; i < 4; ++i) {
    NeighborModel nb;
    nb.moments = link_moments(15, 1.0 + 0.1 * i, 0.9, 1.0 + 0.3 * i, 2.0 + i, 1.0 + 0.5 * i);
    nb.byzantine = i < byz;
    nb.p = p;
    out.push_back(nb);
  }
  return out;
}

double integrate(Hypothesis h, const std::vector<NeighborModel>& nb) {
  // Composite Simpson over a range far beyond every component's tails.
  const double a = -400.0, b = 600.0;
  const int n = 200000;
  const double dx = (b - a) / n;
  double s = mixture_pdf(a, h, nb) + mixture_pdf(b, h, nb);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * mixture_pdf(a + i * dx, h, nb);
  return s * dx / 3.0;
}
}  // namespace

TEST_CASE("mixture density integrates to one") {
  for (std::size_t byz = 0; byz <= 4; ++byz) {
    for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
      CHECK(std::abs(integrate(h, neighbours(byz, 0.5)) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("mixture reductions") {
  const auto honest = neighbours(0, 0.0);
  const auto idle = neighbours(2, 0.0);
  double mean = 0, var = 0;
  for (const auto& nb : honest) {
    mean += nb.moments.mu00;
    var += nb.moments.var00;
  }
  const double x = mean + 3.0;
  const double gauss = std::exp(-0.5 * 9.0 / var) / std::sqrt(2 * M_PI * var);
  CHECK(mixture_pdf(x, Hypothesis::H0, honest) == doctest::Approx(gauss).epsilon(1e-12));
  CHECK(mixture_pdf(x, Hypothesis::H0, idle) == doctest::Approx(gauss).epsilon(1e-12));

  std::vector<NeighborModel> many(21);
  for (auto& nb : many) {
    nb.byzantine = true;
    nb.moments = link_moments(5, 1, 1, 1, 0, 0);
  }
  CHECK_THROWS_AS(mixture_pdf(0.0, Hypothesis::H0, many), Error);
}

TEST_CASE("gaussian tail against its series") {
  for (double z : {-4.0, -2.5, -1.0, -0.3, 0.0, 0.4, 1.0, 1.96, 3.0, 4.5}) {
    CHECK(q_function(z) == doctest::Approx(testing::q_series(z)).epsilon(1e-10));
  }
  CHECK(q_function(0.0) == 0.5);
}

TEST_CASE("transient probabilities") {
  const auto honest = neighbours(0, 0.0);
  double g = 0;
  for (const auto& nb : honest) g += nb.moments.mu00;
  CHECK(transient_pd_pfa(g, honest).pfa == doctest::Approx(0.5));
  const auto a = transient_pd_pfa(g + 4, honest);
  const auto b = transient_pd_pfa(g + 4, neighbours(3, 0.0));
  CHECK(a.pd == doctest::Approx(b.pd));
  CHECK(a.pfa == doctest::Approx(b.pfa));
}

TEST_CASE("deflection special cases") {
  std::vector<DeflectionLink> quiet(3);
  CHECK(deflection(quiet) == 0.0);
  CHECK(blinding_gap(quiet) == 0.0);

  std::vector<DeflectionLink> honest{{15, 1.2, 0.8, 2.0, 0.0, false, 0, 0},
                                     {20, 0.9, 0.9, 3.5, 0.0, false, 0, 0}};
  const double num = 2.0 * 1.2 + 3.5 * 0.9;
  const double den = 2 * 15 * 1.44 + 2 * 20 * 0.81;
  CHECK(deflection(honest) == doctest::Approx(num / den));

  std::vector<DeflectionLink> degenerate{{15, 0.0, 1.0, 0.0, 0.0, false, 0, 0}};
  CHECK_THROWS_AS(deflection(degenerate), Error);
}

TEST_CASE("deflection numerator is the negated blinding gap") {
  std::vector<DeflectionLink> links{{20, 1.2, 0.8, 1.5, 0.4, false, 0, 0},
                                    {20, 1.2, 0.9, 0.7, -0.3, true, 1.3, 0.6},
                                    {20, 1.2, 0.72, 2.0, 0.8, false, 0, 0}};
  const auto t = deflection_terms(links);
  CHECK(t.mean_h1 - t.mean_h0 == doctest::Approx(-blinding_gap(links)).epsilon(1e-12));
}

TEST_CASE("blinding gap grows with attack strength") {
  double prev = -INFINITY;
  for (double d = 0.0; d <= 3.0; d += 0.25) {
    std::vector<DeflectionLink> links{{10, 1.5, 1.0, 1.0, 0.7, true, d, 0.5}};
    const double g = blinding_gap(links);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("homogeneous blinding fraction") {
  // N_B / N = eta sigma2 / (L p (2 h delta D + h^2 delta^2 (sigma2 - 1)))
  //         = 2 / (10 * 0.5 * (2 + 1)) = 2 / 15.
  const double ratio = homogeneous_blinding_ratio(1.0, 2.0, 10, 0.5, 1.0, 1.0, 1.0);
  CHECK(std::abs(ratio - 2.0 / 15.0) <= 1e-12);
  CHECK(std::abs(4.0 * ratio - 8.0 / 15.0) <= 1e-12);
  CHECK(std::abs(homogeneous_blinding_ratio(3.0, 1.0, 12, 0.25, 0.5, 2.0, 1.5) - 3.0 / (12 * 0.25 * 3.0)) <= 1e-12);

  // With N_B = ratio * N the full gap vanishes; one more attacker overshoots.
  auto gap = [](std::size_t nb) {
    std::vector<DeflectionLink> links;
    for (std::size_t i = 0; i < 15; ++i) links.push_back({10, 2.0, 1.0, 1.0, 1.0, i < nb, 1.0, 0.5});
    return blinding_gap(links);
  };
  CHECK(std::abs(gap(2)) <= 1e-12);
  CHECK(gap(3) > 0.0);
  CHECK(gap(1) < 0.0);
}

TEST_CASE("link moments carry no bias at large sample size") {
  // At 1e4 windows one standard error of the variance is about 1.4%, so the
  // 2% check above is seed-sensitive; 2e5 windows shrink that to about 0.3%.
  const std::size_t L = 50;
  const double s2 = 1.2, h = 0.95, yk = 1.0, yj = 0.6;
  const double eta = L * (h * yk - yj) * (h * yk - yj) / s2;
  const MomentSet cf = link_moments(L, s2, h, 0.0, eta, eta);
  const SampleMoments mc = monte_carlo_link(L, s2, h, yk, yj, 200000, 31, Execution::Parallel);
  CHECK(std::abs(mc.mean / cf.mu10 - 1.0) <= 0.002);
  CHECK(std::abs(mc.variance / cf.var10 - 1.0) <= 0.01);
}
