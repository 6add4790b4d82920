#include "dufs/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "dufs/error.hpp"

namespace dufs {

namespace {

constexpr int kMaxLloydIterations = 300;

Matrix seed_centers(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Eigen::Index first = pick(rng);
  centers.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  Vector best_sq = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = best_sq.sum();
    Eigen::Index next = -1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (best_sq[i] <= 0.0) continue;
        target -= best_sq[i];
        next = i;
        if (target <= 0.0) break;
      }
    }
    if (next < 0) {
      // every point coincides with a center; take the first unused one
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }
    chosen[static_cast<std::size_t>(next)] = true;
    centers.row(c) = x.row(next);
    best_sq = best_sq.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

KMeansResult lloyd(const Matrix& x, Matrix centers) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(centers.rows());
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  Vector dist(n);

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist[i] = (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      centers.row(c) = x.row(far);
      dist[far] = 0.0;
      labels[static_cast<std::size_t>(far)] = c;
    }
  }

  KMeansResult out;
  out.centers = centers;
  out.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.wcss += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  out.assignment = {std::move(labels), k};
  return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, int n_init, std::uint64_t seed) {
  if (x.rows() == 0 || x.cols() == 0) throw InvalidInput("k-means needs a non-empty matrix");
  if (k < 1 || k > x.rows()) throw InvalidInput("k-means requires 1 <= k <= n");
  if (n_init < 1) throw InvalidInput("k-means needs at least one initialization");
  Rng rng(seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int run = 0; run < n_init; ++run) {
    KMeansResult r = lloyd(x, seed_centers(x, k, rng));
    if (r.wcss < best.wcss) best = std::move(r);
  }
  return best;
}

ClusterAssignment spectral_clustering(const Matrix& x, int k, const KernelConfig& cfg,
                                      std::uint64_t seed, int n_init) {
  if (k < 1 || k > x.rows()) throw InvalidInput("spectral clustering requires 1 <= k <= n");
  const Spectrum s = normalized_kernel_spectrum(gaussian_kernel(x, cfg));
  Matrix embed = s.vectors.leftCols(k);
  for (Eigen::Index i = 0; i < embed.rows(); ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }
  return kmeans(embed, k, n_init, seed).assignment;
}

std::vector<int> min_cost_assignment(const Matrix& cost) {
  // Hungarian algorithm with potentials, O(n^3); 1-based internal indexing.
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != cost.rows()) throw InvalidInput("assignment cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(r0 - 1, j - 1) - u[r0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] > 0) row_to_col[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  }
  return row_to_col;
}

ClusterAssignment make_assignment(std::vector<int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidInput("cluster labels must be non-negative");
    k = std::max(k, l + 1);
  }
  return {std::move(labels), k};
}

double clustering_accuracy(const ClusterAssignment& pred, const ClusterAssignment& truth) {
  if (pred.labels.size() != truth.labels.size()) {
    throw InvalidInput("prediction and truth have different lengths");
  }
  if (pred.labels.empty()) throw InvalidInput("cannot score an empty clustering");
  int size = std::max(pred.k, truth.k);
  for (int l : pred.labels) size = std::max(size, l + 1);
  for (int l : truth.labels) size = std::max(size, l + 1);

  Matrix confusion = Matrix::Zero(size, size);
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    confusion(pred.labels[i], truth.labels[i]) += 1.0;
  }
  const std::vector<int> match = min_cost_assignment(-confusion);
  double hits = 0.0;
  for (int r = 0; r < size; ++r) hits += confusion(r, match[static_cast<std::size_t>(r)]);
  return hits / static_cast<double>(pred.labels.size());
}

PrecisionRecall precision_recall_from_probabilities(const Vector& p,
                                                    const std::vector<std::size_t>& informative) {
  if (informative.empty()) throw InvalidInput("informative feature set must be non-empty");
  const std::set<std::size_t> unique(informative.begin(), informative.end());
  double hit = 0.0;
  for (std::size_t i : unique) {
    if (i >= static_cast<std::size_t>(p.size())) throw InvalidInput("informative index out of range");
    hit += p[static_cast<Eigen::Index>(i)];
  }
  PrecisionRecall out;
  const double total = p.sum();
  if (total > 0.0) {
    out.precision = hit / total;
  } else {
    out.precision_undefined = true;
  }
  out.recall = hit / static_cast<double>(unique.size());
  return out;
}

PrecisionRecall selection_precision_recall(const GateParams& params,
                                           const std::vector<std::size_t>& informative) {
  return precision_recall_from_probabilities(open_probability(params), informative);
}

Correlation eigvec_label_correlation(const Matrix& x, const std::vector<int>& truth,
                                     const KernelConfig& cfg) {
  if (static_cast<Eigen::Index>(truth.size()) != x.rows()) {
    throw InvalidInput("label count must match sample count");
  }
  const std::set<int> classes(truth.begin(), truth.end());
  if (classes.size() != 2) throw InvalidInput("eigenvector correlation needs exactly two classes");
  const int positive = *classes.rbegin();

  const Spectrum s = random_walk_spectrum(gaussian_kernel(x, cfg));
  const Vector psi = s.vectors.col(1);
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] = truth[static_cast<std::size_t>(i)] == positive ? 1.0 : -1.0;
  }
  const Vector pc = psi.array() - psi.mean();
  const Vector yc = y.array() - y.mean();
  const double denom = pc.norm() * yc.norm();
  if (!(denom > 1e-300) || pc.norm() <= 1e-14 * std::max(1.0, psi.cwiseAbs().maxCoeff())) {
    return {0.0, true};
  }
  return {std::min(1.0, std::abs(pc.dot(yc)) / denom), false};
}

double second_eigenvalue(const Matrix& x, const KernelConfig& cfg) {
  if (x.rows() < 2) throw InvalidInput("need at least two points for a second eigenvalue");
  return random_walk_spectrum(gaussian_kernel(x, cfg)).values[1];
}

}  // namespace dufs
