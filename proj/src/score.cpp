#include "dufs/score.hpp"

#include <algorithm>
#include <numeric>

#include "dufs/error.hpp"

namespace dufs {

std::vector<std::size_t> FeatureScores::ranking() const {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool ascending = convention == ScoreConvention::SmallIsGood_Lun;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)];
    const double sb = scores[static_cast<Eigen::Index>(b)];
    return ascending ? sa < sb : sa > sb;
  });
  return order;
}

Vector per_feature_quadratic_forms(const Matrix& x, const Matrix& laplacian) {
  if (laplacian.rows() != x.rows() || laplacian.cols() != x.rows()) {
    throw InvalidInput("Laplacian size does not match sample count");
  }
  return (x.array() * (laplacian * x).array()).colwise().sum().transpose();
}

FeatureScores laplacian_score_baseline(const DataMatrix& x, const KernelConfig& cfg,
                                       bool degree_normalized) {
  const GraphArtifacts g = gaussian_kernel(x.values, cfg);
  FeatureScores out;
  out.convention = ScoreConvention::SmallIsGood_Lun;
  if (!degree_normalized) {
    out.scores = per_feature_quadratic_forms(x.values, g.unnormalized);
    return out;
  }
  const double total_degree = g.degree.sum();
  out.scores.resize(x.values.cols());
  for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
    const Vector f = x.values.col(j);
    const Vector centered = f.array() - f.dot(g.degree) / total_degree;
    const double denom = centered.dot(g.degree.asDiagonal() * centered);
    out.scores[j] = denom > 0.0 ? centered.dot(g.unnormalized * centered) / denom : 0.0;
  }
  return out;
}

double gated_trace_score(const Matrix& x_gated, const Matrix& laplacian, std::size_t m) {
  if (m == 0 || static_cast<Eigen::Index>(m) != x_gated.rows()) {
    throw InvalidInput("batch size must equal the gated matrix row count");
  }
  return per_feature_quadratic_forms(x_gated, laplacian).sum() / static_cast<double>(m);
}

FeatureScores gated_feature_scores(const Matrix& x, const Vector& gates, const KernelConfig& cfg,
                                   int t) {
  if (gates.size() != x.cols()) throw InvalidInput("gate count must match feature count");
  const Matrix gated = x * gates.asDiagonal();
  const GraphArtifacts g = gaussian_kernel(gated, cfg);
  FeatureScores out;
  out.convention = ScoreConvention::LargeIsGood_Lrw;
  out.scores = per_feature_quadratic_forms(x, laplacian_power(g.random_walk, t));
  return out;
}

}  // namespace dufs
