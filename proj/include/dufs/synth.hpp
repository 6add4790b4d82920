#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dufs/graph.hpp"

namespace dufs {

enum class NuisanceDistribution { StandardGaussian, Uniform01 };

struct LabeledData {
  Matrix x;                              // raw, not preprocessed
  std::vector<int> labels;               // ground-truth cluster of each row
  std::vector<std::size_t> informative;  // 0-based informative columns
};

struct TwoMoonsConfig {
  std::size_t n = 100;  // total samples, even
  std::size_t d_nuisance = 8;
  double signal_noise_var = 0.1;
  NuisanceDistribution nuisance = NuisanceDistribution::StandardGaussian;
  std::uint64_t seed = 0;
};

/// Columns 0-1: two interleaved half circles
///   A = (cos t, sin t), B = (1 - cos t, 1/2 - sin t), t ~ U[0, pi],
/// plus N(0, signal_noise_var) noise; the rest i.i.d. nuisance columns.
/// Rows alternate between the two moons.
LabeledData gen_two_moons(const TwoMoonsConfig& cfg);

struct TwoClusterConfig {
  std::size_t n_per_cluster = 50;
  double r = 5.0;
  std::size_t d_nuisance = 0;
  double nuisance_std = 0.70710678118654752;  // 1/sqrt(2): unit-variance differences
  std::uint64_t seed = 0;
};

/// 2n rows in R^(1+d): coordinate 0 is 0 or r by cluster, the rest N(0, std^2).
LabeledData gen_two_clusters(const TwoClusterConfig& cfg);

/// One-sided chi-square concentration bounds for X ~ chi2_d:
///   P(X - d >= 2 sqrt(d g) + 2 g) <= exp(-g),  P(d - X >= 2 sqrt(d g)) <= exp(-g).
struct TailBound {
  double upper_threshold = 0.0;
  double lower_threshold = 0.0;
  double upper_probability_bound = 1.0;
  double lower_probability_bound = 1.0;
};

/// Throws InvalidInput for d < 1 or gamma < 0 (gamma = 0 gives the vacuous bound 1).
TailBound chi_square_tail_bound(int d, double gamma);

enum class PairExponent {
  TwoNSqMinusN,    // 2n^2 - n
  TwoNSqMinusOne,  // 2n^2 - 1
};

struct BoundInputs {
  double r = 1.0;
  std::size_t n = 50;  // per cluster
  double fail_prob = 0.05;
  PairExponent exponent = PairExponent::TwoNSqMinusN;
};

struct NuisanceBound {
  double gamma = 0.0;
  double d_max = 0.0;
};

/// gamma = -log(1 - (1 - eps)^(1/E)); d_max = ((r^2 - 2 gamma) / (4 sqrt(gamma)))^2,
/// or 0 when r^2 <= 2 gamma. Throws NumericalFailure when gamma is not finite.
NuisanceBound predicted_max_nuisance_dims(const BoundInputs& in);

struct SweepCell {
  double r = 0.0;
  std::size_t d = 0;
  double mean_corr = 0.0;
  double std_corr = 0.0;
};

struct BreakdownPoint {
  double r = 0.0;
  std::optional<double> d_star;  // empty: censored, never dropped below threshold
};

struct BreakdownSweep {
  std::vector<SweepCell> cells;
  std::vector<BreakdownPoint> breakdown;
};

struct SweepConfig {
  std::vector<double> r_grid;
  std::vector<std::size_t> d_grid;  // ascending
  std::size_t n_per_cluster = 50;
  double threshold = 0.7;
  int seeds = 10;
  std::uint64_t base_seed = 0;
  double nuisance_std = 0.70710678118654752;
  KernelConfig kernel;
  bool stop_at_breakdown = false;  // skip larger d for an r once it has crossed
};

/// Mean |corr(psi_2, y)| over seeds on each (r, d) cell, and for each r the
/// first d where it falls below the threshold (linear interpolation).
/// Throws InvalidInput on empty grids or a threshold outside (0, 1).
BreakdownSweep empirical_breakdown_sweep(const SweepConfig& cfg);

/// Least-squares slope of log d* against log r over uncensored points.
/// Throws InvalidInput with fewer than two usable points.
double loglog_slope(const std::vector<BreakdownPoint>& points);

/// Deterministic derivation of a child seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace dufs
