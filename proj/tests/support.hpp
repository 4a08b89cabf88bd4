#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "byzsync/graph.hpp"
#include "byzsync/matrix.hpp"

namespace testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(BYZSYNC_SCENARIO_DIR) + "/" + name + ".json";
}

inline byzsync::WeightedDigraph fig1_graph() {
  return byzsync::WeightedDigraph(byzsync::Matrix::from_rows(
      {{0, 1, 1, 0, 0}, {0, 0, 2, 0, 1}, {0, 0, 0, 0, 3}, {0, 1, 0, 0, 0}, {2, 1, 0, 1, 0}}));
}

inline byzsync::WeightedDigraph example4_graph() {
  return byzsync::WeightedDigraph(
      byzsync::Matrix::from_rows({{0, 1, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}, {1, 1, 0, 0}}));
}

inline byzsync::WeightedDigraph example5_graph() {
  return byzsync::WeightedDigraph(
      byzsync::Matrix::from_rows({{0, 0, 1, 0}, {0, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}}));
}

// Characteristic polynomial coefficients c[0..n] of det(zI - m), monic, by
// Faddeev-LeVerrier.
inline std::vector<double> char_poly(const byzsync::Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  byzsync::Matrix mk(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    byzsync::Matrix t = mk;
    for (std::size_t i = 0; i < n; ++i) t(i, i) += c[n - k + 1];
    mk = m * t;
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += mk(i, i);
    c[n - k] = -tr / static_cast<double>(k);
  }
  return c;
}

// All roots of the monic polynomial with coefficients c (ascending powers),
// Durand-Kerner iteration followed by Newton polishing.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  using cd = std::complex<double>;
  const std::size_t n = c.size() - 1;
  auto eval = [&](cd z) {
    cd v = c[n];
    for (std::size_t i = n; i-- > 0;) v = v * z + c[i];
    return v;
  };
  auto deriv = [&](cd z) {
    cd v = static_cast<double>(n) * c[n];
    for (std::size_t i = n - 1; i >= 1; --i) v = v * z + static_cast<double>(i) * c[i];
    return v;
  };
  std::vector<cd> z(n);
  const cd seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
  for (int it = 0; it < 2000; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cd den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const cd step = eval(z[i]) / den;
      z[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15) break;
  }
  for (auto& r : z) {
    for (int it = 0; it < 5; ++it) {
      const cd d = deriv(r);
      if (std::abs(d) < 1e-300) break;
      r -= eval(r) / d;
    }
  }
  return z;
}

// Smallest real part above `floor` among the roots.
inline double smallest_real_above(const std::vector<std::complex<double>>& roots, double floor) {
  double best = INFINITY;
  for (const auto& r : roots)
    if (r.real() > floor) best = std::min(best, r.real());
  return best;
}

// P(Z > z) from the Maclaurin series of the normal integral; accurate for
// |z| <= 6 in long double.
inline double q_series(double z) {
  const long double x = z;
  long double term = x, sum = x;
  for (int k = 1; k < 400; ++k) {
    term *= -x * x / 2.0L / k;
    const long double add = term / (2 * k + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return static_cast<double>(0.5L - sum / std::sqrt(2.0L * 3.14159265358979323846L));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testing
