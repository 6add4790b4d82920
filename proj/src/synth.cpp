#include "dufs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dufs/error.hpp"
#include "dufs/evalkit.hpp"
#include "dufs/gates.hpp"

namespace dufs {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

LabeledData gen_two_moons(const TwoMoonsConfig& cfg) {
  if (cfg.n < 2 || cfg.n % 2 != 0) throw InvalidInput("two-moons sample count must be even and >= 2");
  if (!(cfg.signal_noise_var >= 0.0)) throw InvalidInput("signal noise variance must be >= 0");
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> signal_noise(0.0, std::sqrt(cfg.signal_noise_var));
  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(cfg.n);
  LabeledData out;
  out.x.resize(n, 2 + static_cast<Eigen::Index>(cfg.d_nuisance));
  out.labels.resize(cfg.n);
  out.informative = {0, 1};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int moon = static_cast<int>(i % 2);
    const double t = angle(rng);
    double a = moon == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double b = moon == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (cfg.signal_noise_var > 0.0) {
      a += signal_noise(rng);
      b += signal_noise(rng);
    }
    out.x(i, 0) = a;
    out.x(i, 1) = b;
    out.labels[static_cast<std::size_t>(i)] = moon;
  }
  for (Eigen::Index j = 2; j < out.x.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.x(i, j) = cfg.nuisance == NuisanceDistribution::StandardGaussian ? gaussian(rng) : uniform(rng);
    }
  }
  return out;
}

LabeledData gen_two_clusters(const TwoClusterConfig& cfg) {
  if (cfg.n_per_cluster < 1) throw InvalidInput("each cluster needs at least one point");
  if (!(cfg.nuisance_std > 0.0)) throw InvalidInput("nuisance standard deviation must be > 0");
  Rng rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.nuisance_std);
  const auto n = static_cast<Eigen::Index>(2 * cfg.n_per_cluster);
  LabeledData out;
  out.x.resize(n, 1 + static_cast<Eigen::Index>(cfg.d_nuisance));
  out.labels.resize(static_cast<std::size_t>(n));
  out.informative = {0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int cluster = i < static_cast<Eigen::Index>(cfg.n_per_cluster) ? 0 : 1;
    out.labels[static_cast<std::size_t>(i)] = cluster;
    out.x(i, 0) = cluster == 0 ? 0.0 : cfg.r;
    for (Eigen::Index j = 1; j < out.x.cols(); ++j) out.x(i, j) = noise(rng);
  }
  return out;
}

TailBound chi_square_tail_bound(int d, double gamma) {
  if (d < 1) throw InvalidInput("chi-square degrees of freedom must be >= 1");
  if (!(gamma >= 0.0)) throw InvalidInput("gamma must be >= 0");
  TailBound b;
  const double root = 2.0 * std::sqrt(static_cast<double>(d) * gamma);
  b.upper_threshold = root + 2.0 * gamma;
  b.lower_threshold = root;
  b.upper_probability_bound = std::exp(-gamma);
  b.lower_probability_bound = std::exp(-gamma);
  return b;
}

NuisanceBound predicted_max_nuisance_dims(const BoundInputs& in) {
  if (!(in.fail_prob > 0.0 && in.fail_prob < 1.0)) throw InvalidInput("failure probability must lie in (0, 1)");
  if (in.n < 1) throw InvalidInput("cluster size must be >= 1");
  if (!(in.r >= 0.0)) throw InvalidInput("separation r must be >= 0");
  const double n = static_cast<double>(in.n);
  const double exponent = in.exponent == PairExponent::TwoNSqMinusN ? 2.0 * n * n - n : 2.0 * n * n - 1.0;
  // 1 - (1 - eps)^(1/E), evaluated without cancellation
  const double per_pair = -std::expm1(std::log1p(-in.fail_prob) / exponent);
  const double gamma = -std::log(per_pair);
  if (!std::isfinite(gamma) || !(per_pair > 0.0)) {
    throw NumericalFailure("separation insufficient: per-pair failure probability underflows (eps=" +
                           std::to_string(in.fail_prob) + ", E=" + std::to_string(exponent) + ")");
  }
  NuisanceBound out;
  out.gamma = gamma;
  const double r2 = in.r * in.r;
  if (r2 > 2.0 * gamma) {
    const double root_d = (r2 - 2.0 * gamma) / (4.0 * std::sqrt(gamma));
    out.d_max = root_d * root_d;
  }
  return out;
}

BreakdownSweep empirical_breakdown_sweep(const SweepConfig& cfg) {
  if (cfg.r_grid.empty() || cfg.d_grid.empty()) throw InvalidInput("sweep grids must be non-empty");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw InvalidInput("threshold must lie in (0, 1)");
  if (cfg.seeds < 1) throw InvalidInput("sweep needs at least one seed");
  if (!std::is_sorted(cfg.d_grid.begin(), cfg.d_grid.end())) throw InvalidInput("d grid must be ascending");

  BreakdownSweep out;
  for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
    const double r = cfg.r_grid[ri];
    std::vector<double> means;
    for (std::size_t d : cfg.d_grid) {
      std::vector<double> corr;
      for (int s = 0; s < cfg.seeds; ++s) {
        TwoClusterConfig gen;
        gen.n_per_cluster = cfg.n_per_cluster;
        gen.r = r;
        gen.d_nuisance = d;
        gen.nuisance_std = cfg.nuisance_std;
        gen.seed = mix_seed(mix_seed(cfg.base_seed, ri), d * 1000003ULL + static_cast<std::uint64_t>(s));
        const LabeledData data = gen_two_clusters(gen);
        corr.push_back(eigvec_label_correlation(data.x, data.labels, cfg.kernel).value);
      }
      double mean = 0.0;
      for (double c : corr) mean += c;
      mean /= static_cast<double>(corr.size());
      double var = 0.0;
      for (double c : corr) var += (c - mean) * (c - mean);
      const double sd = corr.size() > 1 ? std::sqrt(var / static_cast<double>(corr.size() - 1)) : 0.0;
      out.cells.push_back({r, d, mean, sd});
      means.push_back(mean);
      if (cfg.stop_at_breakdown && mean < cfg.threshold) break;
    }

    BreakdownPoint point{r, std::nullopt};
    for (std::size_t j = 0; j < means.size(); ++j) {
      if (means[j] >= cfg.threshold) continue;
      if (j == 0) {
        point.d_star = static_cast<double>(cfg.d_grid[0]);
      } else {
        const double d0 = static_cast<double>(cfg.d_grid[j - 1]);
        const double d1 = static_cast<double>(cfg.d_grid[j]);
        const double frac = (means[j - 1] - cfg.threshold) / (means[j - 1] - means[j]);
        point.d_star = d0 + frac * (d1 - d0);
      }
      break;
    }
    out.breakdown.push_back(point);
  }
  return out;
}

double loglog_slope(const std::vector<BreakdownPoint>& points) {
  std::vector<double> lx, ly;
  for (const auto& p : points) {
    if (p.d_star && *p.d_star > 0.0 && p.r > 0.0) {
      lx.push_back(std::log(p.r));
      ly.push_back(std::log(*p.d_star));
    }
  }
  if (lx.size() < 2) throw InvalidInput("need at least two uncensored breakdown points for a slope");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw InvalidInput("breakdown points share a single r value");
  return sxy / sxx;
}

}  // namespace dufs
