#include "dufs/gates.hpp"

#include <cmath>
#include <numbers>

#include "dufs/error.hpp"

namespace dufs {

GateParams initial_gates(std::size_t d, double sigma_g) {
  if (!(sigma_g > 0.0)) throw InvalidInput("gate noise scale sigma_g must be positive");
  return {Vector::Constant(static_cast<Eigen::Index>(d), 0.5), sigma_g};
}

GateSample gates_from_noise(const GateParams& params, const Vector& epsilon) {
  if (epsilon.size() != params.mu.size()) throw InvalidInput("noise length must match gate count");
  GateSample s;
  s.epsilon = epsilon;
  s.shifted = params.mu + epsilon;
  s.z = s.shifted.cwiseMax(0.0).cwiseMin(1.0);
  return s;
}

GateSample sample_gates(const GateParams& params, Rng& rng) {
  std::normal_distribution<double> noise(0.0, params.sigma_g);
  Vector eps(params.mu.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = noise(rng);
  return gates_from_noise(params, eps);
}

Vector deterministic_gates(const GateParams& params) {
  return params.mu.cwiseMax(0.0).cwiseMin(1.0);
}

Vector open_probability(const GateParams& params) {
  const double scale = std::numbers::sqrt2 * params.sigma_g;
  return params.mu.unaryExpr([scale](double m) { return 0.5 - 0.5 * std::erf(-m / scale); });
}

Vector open_probability_grad(const GateParams& params) {
  const double s = params.sigma_g;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * s);
  return params.mu.unaryExpr(
      [s, norm](double m) { return norm * std::exp(-m * m / (2.0 * s * s)); });
}

Vector gate_subgradient_mask(const GateSample& sample) {
  return sample.shifted.unaryExpr([](double v) { return (v > 0.0 && v < 1.0) ? 1.0 : 0.0; });
}

}  // namespace dufs
