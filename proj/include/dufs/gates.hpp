#pragma once

#include <cstddef>
#include <random>

#include "dufs/graph.hpp"

namespace dufs {

using Rng = std::mt19937_64;

/// Trainable means of the clipped-Gaussian gates and their fixed noise scale.
struct GateParams {
  Vector mu;
  double sigma_g = 0.5;

  std::size_t d() const { return static_cast<std::size_t>(mu.size()); }
};

/// One realization z = clamp(mu + eps, 0, 1) with the noise that produced it.
struct GateSample {
  Vector z;
  Vector epsilon;
  Vector shifted;  // mu + eps before clipping
};

/// d gates at the fair-coin initialization mu_i = 0.5.
/// Throws InvalidInput when sigma_g <= 0.
GateParams initial_gates(std::size_t d, double sigma_g = 0.5);

/// Draws eps_i ~ N(0, sigma_g^2) i.i.d. and clips.
GateSample sample_gates(const GateParams& params, Rng& rng);

/// Same clipping with caller-provided noise (used to replay a fixed sample).
GateSample gates_from_noise(const GateParams& params, const Vector& epsilon);

/// clamp(mu, 0, 1): the gate with its noise removed.
Vector deterministic_gates(const GateParams& params);

/// P(Z_i > 0) = 1/2 - 1/2 erf(-mu_i / (sqrt(2) sigma_g)).
Vector open_probability(const GateParams& params);

/// d/dmu_i of open_probability: the N(0, sigma_g^2) density at mu_i.
Vector open_probability_grad(const GateParams& params);

/// dz_i/dmu_i: 1 strictly inside (0, 1), 0 on or beyond the clip points.
Vector gate_subgradient_mask(const GateSample& sample);

}  // namespace dufs
