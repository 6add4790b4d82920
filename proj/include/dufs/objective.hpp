#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>

#include "dufs/gates.hpp"
#include "dufs/graph.hpp"

namespace dufs {

/// -Tr[X~^T L X~]/m + lambda * sum_i P(Z_i > 0)
struct LambdaRegularized {
  double lambda = 1.0;
};

/// -Tr[X~^T L X~] / (m * sum_i P(Z_i > 0) + delta)
struct ParameterFree {
  double delta = 1e-8;
};

using LossVariant = std::variant<LambdaRegularized, ParameterFree>;

struct TrainConfig {
  LossVariant loss = ParameterFree{};
  int t = 2;                    // power of the random-walk Laplacian
  double learning_rate = 1.0;
  int epochs = 5000;
  std::optional<std::size_t> batch_size;  // empty: full batch
  KernelConfig kernel;
  std::uint64_t seed = 0;
  double sigma_g = 0.5;
  int log_every = 1;            // trace stride in epochs

  /// Throws InvalidInput on any out-of-range field.
  void validate() const;
};

/// Smallest kernel denominator used when the gated inputs collapse.
inline constexpr double kMinKernelDenominator = 1e-12;

struct LossEvaluation {
  double value = 0.0;
  double trace = 0.0;        // Tr[X~^T L^t X~]
  double open_sum = 0.0;     // sum_i P(Z_i > 0)
  double denominator = 0.0;  // kernel beta actually used
  Vector gradient;           // d value / d mu; empty unless requested
};

/// Evaluates the configured loss on a batch `x` (m x d) at a fixed gate
/// sample. The kernel bandwidth is recomputed from the gated batch unless
/// `fixed_denominator` is given; it is never differentiated. The gradient
/// includes the dependence of K, D, L_rw and L_rw^t on the gates.
LossEvaluation evaluate_loss(const Matrix& x, const GateParams& params, const GateSample& sample,
                             const TrainConfig& cfg, bool with_gradient,
                             std::optional<double> fixed_denominator = std::nullopt);

/// Value of the lambda-regularized loss. Throws InvalidInput for the other variant.
double loss_lambda(const Matrix& x, const GateParams& params, const GateSample& sample,
                   const TrainConfig& cfg);

/// Value of the parameter-free loss. Throws InvalidInput for the other variant.
double loss_paramfree(const Matrix& x, const GateParams& params, const GateSample& sample,
                      const TrainConfig& cfg);

/// Analytic gradient of the configured loss with respect to mu.
Vector loss_gradient(const Matrix& x, const GateParams& params, const GateSample& sample,
                     const TrainConfig& cfg);

}  // namespace dufs
