#pragma once

#include <cstddef>
#include <vector>

#include "dufs/graph.hpp"

namespace dufs {

enum class ScoreConvention {
  SmallIsGood_Lun,  // f^T L_un f: smooth features score low
  LargeIsGood_Lrw,  // f^T L_rw^t f: smooth features score high
};

struct FeatureScores {
  Vector scores;
  ScoreConvention convention = ScoreConvention::SmallIsGood_Lun;

  /// Feature indices from best to worst under `convention`; ties by index.
  std::vector<std::size_t> ranking() const;
};

/// Per-feature f_j^T L_un f_j with L_un built on all features.
/// With `degree_normalized`, uses the He et al. form: f is D-centered and the
/// quadratic form divided by f^T D f (zero features score 0).
FeatureScores laplacian_score_baseline(const DataMatrix& x, const KernelConfig& cfg,
                                       bool degree_normalized = false);

/// (1/m) Tr[X^T L X] for a gated batch of m rows.
double gated_trace_score(const Matrix& x_gated, const Matrix& laplacian, std::size_t m);

/// Column-wise quadratic forms f_j^T L f_j.
Vector per_feature_quadratic_forms(const Matrix& x, const Matrix& laplacian);

/// Scores f_j^T (L_rw^t) f_j where L_rw is built on x scaled column-wise by
/// `gates`. Columns of the *ungated* x are scored.
FeatureScores gated_feature_scores(const Matrix& x, const Vector& gates, const KernelConfig& cfg,
                                   int t);

}  // namespace dufs
