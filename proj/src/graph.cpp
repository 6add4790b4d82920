#include "dufs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dufs/error.hpp"

namespace dufs {

namespace {

void check_neighbor_count(int k, Eigen::Index n) {
  if (k < 1 || k >= n) {
    throw InvalidInput("nearest-neighbor k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                       ", n=" + std::to_string(n) + ")");
  }
}

Spectrum descending(const Eigen::SelfAdjointEigenSolver<Matrix>& solver) {
  // Eigen returns ascending order.
  Spectrum s;
  s.values = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();
  return s;
}

Vector inverse_sqrt_degree(const GraphArtifacts& graph) {
  if ((graph.degree.array() <= 0.0).any()) {
    throw DegenerateGraph("graph has a node with non-positive degree");
  }
  return graph.degree.array().rsqrt();
}

}  // namespace

DataMatrix preprocess(const Matrix& raw) {
  if (raw.size() == 0) {
    throw InvalidInput("cannot preprocess an empty matrix");
  }
  if (raw.rows() < 2) {
    throw InvalidInput("preprocessing needs at least two samples");
  }
  DataMatrix out;
  out.values.resize(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    Vector centered = raw.col(j).array() - mean;
    const double norm = centered.norm();
    const double scale = raw.col(j).lpNorm<Eigen::Infinity>();
    if (norm <= 1e-12 * std::max(1.0, scale)) {
      out.values.col(j).setZero();
      out.constant_columns.push_back(static_cast<std::size_t>(j));
    } else {
      out.values.col(j) = centered / norm;
    }
  }
  return out;
}

Matrix pairwise_sq_distances(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Matrix xt = x.transpose();  // contiguous points
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (xt.col(i) - xt.col(j)).squaredNorm();
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

LocalBandwidthArgmax local_bandwidth_argmax(const Matrix& sq_dist, int k, double c) {
  const Eigen::Index n = sq_dist.rows();
  check_neighbor_count(k, n);
  std::vector<Eigen::Index> others(static_cast<std::size_t>(n - 1));
  LocalBandwidthArgmax best;
  bool first = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) others[w++] = j;
    }
    auto kth = others.begin() + (k - 1);
    std::nth_element(others.begin(), kth, others.end(), [&](Eigen::Index a, Eigen::Index b) {
      return sq_dist(i, a) < sq_dist(i, b) || (sq_dist(i, a) == sq_dist(i, b) && a < b);
    });
    const double v = c * sq_dist(i, *kth);
    if (first || v > best.value) {
      best = {v, i, *kth};
      first = false;
    }
  }
  return best;
}

double local_bandwidth_from_distances(const Matrix& sq_dist, int k, double c) {
  return local_bandwidth_argmax(sq_dist, k, c).value;
}

double local_bandwidth(const Matrix& x, int k, double c) {
  check_neighbor_count(k, x.rows());
  const double b = local_bandwidth_from_distances(pairwise_sq_distances(x), k, c);
  if (!(b > 0.0)) {
    throw DegenerateBandwidth("local bandwidth is zero: k-th neighbors coincide with their points");
  }
  return b;
}

double resolve_bandwidth(const Matrix& sq_dist, const KernelConfig& cfg) {
  if (const auto* g = std::get_if<GlobalBandwidth>(&cfg.rule)) {
    if (!(g->sigma > 0.0)) throw InvalidInput("global bandwidth must be positive");
    return g->sigma;
  }
  const auto& local = std::get<LocalMaxBandwidth>(cfg.rule);
  if (!(local.c >= 1.0 && local.c <= 5.0)) {
    throw InvalidInput("bandwidth constant C must lie in [1, 5]");
  }
  return local_bandwidth_from_distances(sq_dist, local.k, local.c);
}

double kernel_denominator(double bandwidth, Denominator convention) {
  return convention == Denominator::SigmaHat ? bandwidth : 2.0 * bandwidth * bandwidth;
}

GraphArtifacts graph_from_distances(const Matrix& sq_dist, double beta) {
  if (!(beta > 0.0)) {
    throw DegenerateBandwidth("kernel denominator must be positive");
  }
  GraphArtifacts g;
  g.denominator = beta;
  g.kernel = (-sq_dist.array() / beta).exp().matrix();
  g.degree = g.kernel.rowwise().sum();
  if ((g.degree.array() <= 0.0).any()) {
    throw DegenerateGraph("graph has a node with zero degree");
  }
  g.unnormalized = -g.kernel;
  g.unnormalized.diagonal() += g.degree;
  g.random_walk = g.degree.cwiseInverse().asDiagonal() * g.kernel;
  return g;
}

GraphArtifacts gaussian_kernel(const Matrix& x, const KernelConfig& cfg) {
  const Matrix s = pairwise_sq_distances(x);
  const double b = resolve_bandwidth(s, cfg);
  if (!(b > 0.0)) {
    throw DegenerateBandwidth("resolved kernel bandwidth is zero");
  }
  return graph_from_distances(s, kernel_denominator(b, cfg.denominator));
}

Matrix laplacian_power(const Matrix& laplacian, int t) {
  if (t < 1) throw InvalidInput("Laplacian power t must be >= 1");
  if (laplacian.rows() != laplacian.cols()) throw InvalidInput("Laplacian must be square");
  Matrix out = laplacian;
  for (int i = 1; i < t; ++i) out = out * laplacian;
  return out;
}

Spectrum normalized_kernel_spectrum(const GraphArtifacts& graph) {
  const Vector inv_sqrt = inverse_sqrt_degree(graph);
  const Matrix sym = inv_sqrt.asDiagonal() * graph.kernel * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  return descending(solver);
}

Spectrum random_walk_spectrum(const GraphArtifacts& graph) {
  Spectrum s = normalized_kernel_spectrum(graph);
  s.vectors = inverse_sqrt_degree(graph).asDiagonal() * s.vectors;
  return s;
}

Spectrum unnormalized_spectrum(const GraphArtifacts& graph) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(graph.unnormalized);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

bool is_row_stochastic(const Matrix& m, double tol) {
  return ((m.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

}  // namespace dufs
