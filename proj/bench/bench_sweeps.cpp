// Times each sweep kernel serially and with OpenMP, and checks that both
// produce the same rows.
#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include "byzsync/scenario.hpp"
#include "byzsync/simulation.hpp"
#include "byzsync/sweep.hpp"

using namespace byzsync;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
bool compare(const char* name, F&& kernel) {
  decltype(kernel(Execution::Serial)) a, b;
  const double ts = seconds([&] { a = kernel(Execution::Serial); });
  const double tp = seconds([&] { b = kernel(Execution::Parallel); });
  const bool same = a == b;
  std::printf("%-22s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, ts, tp, ts / tp,
              same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "scenarios";
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  bool ok = true;

  const ScenarioConfig ex2 = load_scenario(dir + "/example2.json");
  ok &= compare("deflection 200x200", [&](Execution e) {
    return deflection_surface(ex2, GridSpec{0.0, 1.0, 200}, GridSpec{0.0, 3.0, 200}, e);
  });

  const ScenarioConfig roc = load_scenario(dir + "/roc_transient.json");
  ok &= compare("roc 2000 points", [&](Execution e) { return roc_curve(roc, GridSpec{0.0, 3.0, 2000}.values(), e); });

  ok &= compare("monte carlo 1e5", [&](Execution e) {
    const auto m = monte_carlo_link(50, 1.0, 1.0, 0.0, 0.0, 100000, 7, e);
    return std::vector<double>{m.mean, m.variance};
  });

  const ScenarioConfig ex5 = load_scenario(dir + "/example5.json");
  ok &= compare("example5 x 8 seeds", [&](Execution e) {
    return fan_out<double>(
        8,
        [&](std::size_t i) {
          ScenarioConfig c = ex5;
          c.sim.seed = 100 + i;
          const auto tr = run_scenario(c);
          return tr.rows.back()[tr.column("yd_2")];
        },
        e);
  });
  return ok ? 0 : 1;
}
