#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dufs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Feature matrix (rows are samples, columns are features) after centering
/// and unit-norm scaling of every column. Zero-variance columns are kept as
/// all-zero and listed in `constant_columns`.
struct DataMatrix {
  Matrix values;
  std::vector<std::size_t> constant_columns;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(values.cols()); }
};

/// Fixed user bandwidth sigma_b.
struct GlobalBandwidth {
  double sigma = 1.0;
};

/// max_i C * ||x_i - x_(i,k)||^2 over the k-th nearest Euclidean neighbor.
struct LocalMaxBandwidth {
  int k = 2;
  double c = 5.0;
};

enum class Denominator {
  TwoSigmaSquared,  // exp(-s / (2 b^2))
  SigmaHat,         // exp(-s / b)
};

struct KernelConfig {
  std::variant<GlobalBandwidth, LocalMaxBandwidth> rule = LocalMaxBandwidth{};
  Denominator denominator = Denominator::SigmaHat;
};

/// Kernel, degrees and both Laplacians of one point set.
struct GraphArtifacts {
  Matrix kernel;           // K, symmetric, unit diagonal
  Vector degree;           // D_i = sum_j K_ij
  Matrix unnormalized;     // L_un = diag(D) - K
  Matrix random_walk;      // L_rw = diag(D)^-1 K
  double denominator = 0;  // beta used in exp(-s / beta)
};

/// Eigenpairs ordered by the convention of the Laplacian they came from.
struct Spectrum {
  Vector values;
  Matrix vectors;  // one eigenvector per column
};

/// Centers every column and scales it to unit 2-norm.
/// Throws InvalidInput for an empty matrix or fewer than two rows.
DataMatrix preprocess(const Matrix& raw);

/// Squared Euclidean distances between all rows; exact zeros for identical rows.
Matrix pairwise_sq_distances(const Matrix& x);

/// C * (squared distance to the k-th nearest neighbor), maximized over points.
/// Returns 0 for coincident data; the caller decides whether that is an error.
double local_bandwidth_from_distances(const Matrix& sq_dist, int k, double c);

/// Value of the local bandwidth together with the point pair that attains it:
/// value = c * sq_dist(row, neighbor).
struct LocalBandwidthArgmax {
  double value = 0.0;
  Eigen::Index row = 0;
  Eigen::Index neighbor = 0;
};

LocalBandwidthArgmax local_bandwidth_argmax(const Matrix& sq_dist, int k, double c);

/// Checked local bandwidth on raw points.
/// Throws InvalidInput unless 1 <= k < n, DegenerateBandwidth on a zero result.
double local_bandwidth(const Matrix& x, int k, double c);

/// Bandwidth b selected by the kernel rule (sigma_b, or sigma-hat for LocalMax).
double resolve_bandwidth(const Matrix& sq_dist, const KernelConfig& cfg);

/// beta such that K = exp(-s / beta).
double kernel_denominator(double bandwidth, Denominator convention);

/// Builds all graph matrices from precomputed squared distances and beta > 0.
GraphArtifacts graph_from_distances(const Matrix& sq_dist, double beta);

/// Gaussian kernel graph of the rows of `x`.
/// Throws DegenerateBandwidth when the resolved bandwidth is zero.
GraphArtifacts gaussian_kernel(const Matrix& x, const KernelConfig& cfg);

/// L^t by repeated multiplication. Throws InvalidInput for t < 1.
Matrix laplacian_power(const Matrix& laplacian, int t);

/// Eigenpairs of L_rw in descending order, computed on the symmetric
/// conjugate D^-1/2 K D^-1/2 and mapped back with v -> D^-1/2 v.
/// Throws DegenerateGraph if a degree is not strictly positive.
Spectrum random_walk_spectrum(const GraphArtifacts& graph);

/// Eigenpairs of L_un in ascending order.
Spectrum unnormalized_spectrum(const GraphArtifacts& graph);

/// Eigenpairs of D^-1/2 K D^-1/2 in descending order (no back-mapping).
Spectrum normalized_kernel_spectrum(const GraphArtifacts& graph);

bool is_row_stochastic(const Matrix& m, double tol = 1e-10);

}  // namespace dufs
