#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dufs/gates.hpp"
#include "dufs/graph.hpp"

namespace dufs {

struct ClusterAssignment {
  std::vector<int> labels;  // each in [0, k)
  int k = 0;
};

struct KMeansResult {
  ClusterAssignment assignment;
  Matrix centers;     // k x d'
  double wcss = 0.0;  // within-cluster sum of squares
};

/// Lloyd's algorithm with k-means++ seeding; the best of `n_init` restarts
/// by WCSS. Deterministic for a given seed. Throws InvalidInput if k > n or k < 1.
KMeansResult kmeans(const Matrix& x, int k, int n_init, std::uint64_t seed);

/// Ng-Jordan-Weiss: top-k eigenvectors of D^-1/2 K D^-1/2, rows scaled to
/// unit length, then k-means.
ClusterAssignment spectral_clustering(const Matrix& x, int k, const KernelConfig& cfg,
                                      std::uint64_t seed, int n_init = 10);

/// Optimal one-to-one assignment minimizing total cost on a square matrix.
/// Returns, for each row, the column assigned to it.
std::vector<int> min_cost_assignment(const Matrix& cost);

/// Fraction of points matched under the best bijection between labels.
/// Throws InvalidInput on length mismatch or empty input.
double clustering_accuracy(const ClusterAssignment& pred, const ClusterAssignment& truth);

/// Builds an assignment from arbitrary non-negative integer labels.
ClusterAssignment make_assignment(std::vector<int> labels);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;  // all open probabilities were zero
};

/// Soft precision/recall of gate probabilities p against the informative set:
/// precision = sum_{S*} p / sum p, recall = sum_{S*} p / |S*|.
PrecisionRecall precision_recall_from_probabilities(const Vector& p,
                                                    const std::vector<std::size_t>& informative);

PrecisionRecall selection_precision_recall(const GateParams& params,
                                           const std::vector<std::size_t>& informative);

struct Correlation {
  double value = 0.0;
  bool degenerate = false;  // eigenvector had zero variance
};

/// |Pearson correlation| between the second eigenvector of L_rw and the
/// +-1 coded two-class labels.
Correlation eigvec_label_correlation(const Matrix& x, const std::vector<int>& truth,
                                     const KernelConfig& cfg);

/// Second largest eigenvalue of L_rw.
double second_eigenvalue(const Matrix& x, const KernelConfig& cfg);

}  // namespace dufs
