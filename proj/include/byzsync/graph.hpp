#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "byzsync/matrix.hpp"

namespace byzsync {

/// Communication topology. weights(i, j) is the gain on edge i -> j, so the
/// in-neighbors of agent j are the nonzero entries of column j.
class WeightedDigraph {
 public:
  WeightedDigraph() = default;
  /// Throws InvalidArgument on negative weights, self-loops or n < 2.
  explicit WeightedDigraph(Matrix weights);

  std::size_t size() const noexcept { return weights_.rows(); }
  double weight(std::size_t from, std::size_t to) const { return weights_(from, to); }
  const Matrix& weights() const noexcept { return weights_; }

  std::vector<std::size_t> in_neighbors(std::size_t j) const;
  std::vector<std::size_t> out_neighbors(std::size_t j) const;

 private:
  Matrix weights_;
};

struct Degrees {
  std::vector<double> in;
  std::vector<double> out;
};

Matrix laplacian(const WeightedDigraph& g);
Degrees degrees(const WeightedDigraph& g);

inline constexpr double kBalanceTolerance = 1e-9;
bool is_balanced(const WeightedDigraph& g, double tol = kBalanceTolerance);

struct JacobiOptions {
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Eigenvalues are
/// returned in ascending order. Throws NonConvergence.
std::vector<double> symmetric_eigenvalues(const Matrix& s, JacobiOptions opts = {});

/// Eigenvalues of L (generally complex for directed graphs), sorted by
/// ascending real part.
std::vector<std::complex<double>> laplacian_spectrum(const WeightedDigraph& g);

enum class ConnectivityMethod {
  /// Smallest nonzero real part in the spectrum of L. Reproduces the
  /// connectivity values reported for the bundled example graphs.
  LaplacianSpectrum,
  /// Second-smallest eigenvalue of (L + L^T) / 2; the tight constant in
  /// y_d^T L^T y_d >= lambda * |y_d|^2.
  SymmetricPart,
};

double algebraic_connectivity(const WeightedDigraph& g,
                              ConnectivityMethod method = ConnectivityMethod::LaplacianSpectrum);

struct SpectralSummary {
  Matrix laplacian;
  double lambda_g = 0.0;
  double lambda_symmetric = 0.0;
  bool balanced = false;
  std::vector<double> in_degree;
  std::vector<double> out_degree;
};

SpectralSummary summarize(const WeightedDigraph& g, double balance_tol = kBalanceTolerance);

/// (n-1) x n projection with Phi 1 = 0, Phi Phi^T = I and
/// Phi^T Phi = I - 11^T / n.
Matrix phi_matrix(std::size_t n);

struct SyncMeasure {
  double mean = 0.0;
  std::vector<double> deviation;

  double max_abs_deviation() const;
};

SyncMeasure sync_measure(std::span<const double> y);

}  // namespace byzsync
