#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "dufs/objective.hpp"

namespace dufs {

using GradientFn = std::function<Vector(const Matrix&, const GateParams&, const GateSample&,
                                        const TrainConfig&)>;

struct GradCheckOptions {
  std::uint64_t seed = 0;
  int instances = 50;
  int n_min = 6, n_max = 16;
  int d_min = 3, d_max = 8;
  double step = 1e-5;
  double tolerance = 1e-4;       // relative, per coordinate
  double absolute_floor = 1e-8;  // below this magnitude compare absolutely
};

struct GradCheckReport {
  bool passed = true;
  int instances = 0;
  double max_error = 0.0;  // worst per-coordinate error (relative, or absolute below the floor)
  int worst_instance = -1;
  Eigen::Index worst_coordinate = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central differences of the configured loss in mu, holding the gate noise
/// and the kernel denominator fixed at their values at `params`.
Vector finite_difference_gradient(const Matrix& x, const GateParams& params, const Vector& epsilon,
                                  const TrainConfig& cfg, double step);

/// Compares `gradient` (the library's analytic gradient by default) with
/// central differences on random small instances of both loss variants.
/// Throws InvalidInput on empty size ranges.
GradCheckReport run_gradient_check(const GradCheckOptions& opts, const GradientFn& gradient = loss_gradient);

}  // namespace dufs
