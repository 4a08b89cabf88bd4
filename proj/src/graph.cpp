#include "byzsync/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "byzsync/error.hpp"

namespace byzsync {

WeightedDigraph::WeightedDigraph(Matrix weights) : weights_(std::move(weights)) {
  const std::size_t n = weights_.rows();
  if (n < 2 || weights_.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "graph needs a square weight matrix with n >= 2");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (weights_(i, i) != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "self-loop on agent " + std::to_string(i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(ErrorCode::InvalidArgument, "edge weights must be finite and nonnegative");
      }
    }
  }
}

std::vector<std::size_t> WeightedDigraph::in_neighbors(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size(); ++k)
    if (weights_(k, j) > 0.0) out.push_back(k);
  return out;
}

std::vector<std::size_t> WeightedDigraph::out_neighbors(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size(); ++k)
    if (weights_(j, k) > 0.0) out.push_back(k);
  return out;
}

Matrix laplacian(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double out_deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out_deg += g.weight(i, j);
      l(i, j) = -g.weight(i, j);
    }
    l(i, i) = out_deg;
  }
  return l;
}

Degrees degrees(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  Degrees d{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      d.out[i] += g.weight(i, j);
      d.in[j] += g.weight(i, j);
    }
  return d;
}

bool is_balanced(const WeightedDigraph& g, double tol) {
  const Degrees d = degrees(g);
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(d.in[j] - d.out[j]) > tol) return false;
  return true;
}

std::vector<double> symmetric_eigenvalues(const Matrix& s, JacobiOptions opts) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw Error(ErrorCode::DimensionMismatch, "eigensolver needs a square matrix");
  Matrix a = s;

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  const double threshold = opts.tolerance * std::max(1.0, std::sqrt(frob));

  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(off);
  };

  int sweep = 0;
  while (off_norm() > threshold) {
    if (sweep++ >= opts.max_sweeps) {
      throw Error(ErrorCode::NonConvergence,
                  "Jacobi did not converge in " + std::to_string(opts.max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<std::complex<double>> laplacian_spectrum(const WeightedDigraph& g) {
  const Matrix l = laplacian(g);
  const auto n = static_cast<Eigen::Index>(l.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = l(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "general eigensolver failed on the Laplacian");
  }
  std::vector<std::complex<double>> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

double algebraic_connectivity(const WeightedDigraph& g, ConnectivityMethod method) {
  if (method == ConnectivityMethod::SymmetricPart) {
    const Matrix l = laplacian(g);
    const Matrix sym = 0.5 * (l + l.transposed());
    return symmetric_eigenvalues(sym)[1];
  }
  // L always has the eigenvalue 0 (row sums vanish); drop the eigenvalue
  // closest to it and take the smallest real part of what remains.
  auto spectrum = laplacian_spectrum(g);
  const auto zero = std::min_element(spectrum.begin(), spectrum.end(),
                                     [](auto a, auto b) { return std::abs(a) < std::abs(b); });
  spectrum.erase(zero);
  double best = std::numeric_limits<double>::infinity();
  for (auto v : spectrum) best = std::min(best, v.real());
  return best;
}

SpectralSummary summarize(const WeightedDigraph& g, double balance_tol) {
  SpectralSummary s;
  s.laplacian = laplacian(g);
  Degrees d = degrees(g);
  s.in_degree = std::move(d.in);
  s.out_degree = std::move(d.out);
  s.balanced = is_balanced(g, balance_tol);
  s.lambda_g = algebraic_connectivity(g, ConnectivityMethod::LaplacianSpectrum);
  s.lambda_symmetric = algebraic_connectivity(g, ConnectivityMethod::SymmetricPart);
  return s;
}

Matrix phi_matrix(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "phi_matrix needs n >= 2");
  const double nn = static_cast<double>(n);
  const double nu = (nn - std::sqrt(nn)) / (nn * (nn - 1.0));
  Matrix phi(n - 1, n, -nu);
  for (std::size_t r = 0; r + 1 < n; ++r) {
    phi(r, 0) = -1.0 + (nn - 1.0) * nu;
    phi(r, r + 1) = 1.0 - nu;
  }
  return phi;
}

double SyncMeasure::max_abs_deviation() const {
  double m = 0.0;
  for (double d : deviation) m = std::max(m, std::abs(d));
  return m;
}

SyncMeasure sync_measure(std::span<const double> y) {
  SyncMeasure m;
  if (y.empty()) return m;
  double sum = 0.0;
  for (double v : y) sum += v;
  m.mean = sum / static_cast<double>(y.size());
  m.deviation.reserve(y.size());
  for (double v : y) m.deviation.push_back(v - m.mean);
  return m;
}

}  // namespace byzsync
