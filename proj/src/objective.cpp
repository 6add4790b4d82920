#include "dufs/objective.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dufs/error.hpp"

namespace dufs {

void TrainConfig::validate() const {
  if (const auto* l = std::get_if<LambdaRegularized>(&loss)) {
    if (!(l->lambda >= 0.0)) throw InvalidInput("lambda must be >= 0");
  } else if (!(std::get<ParameterFree>(loss).delta > 0.0)) {
    throw InvalidInput("delta must be > 0");
  }
  if (t < 1) throw InvalidInput("Laplacian power t must be >= 1");
  if (!(learning_rate >= 0.0)) throw InvalidInput("learning rate must be >= 0");
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (batch_size && *batch_size < 2) throw InvalidInput("batch size must be >= 2");
  if (!(sigma_g > 0.0)) throw InvalidInput("sigma_g must be > 0");
  if (log_every < 1) throw InvalidInput("log stride must be >= 1");
  if (const auto* g = std::get_if<GlobalBandwidth>(&kernel.rule)) {
    if (!(g->sigma > 0.0)) throw InvalidInput("global bandwidth must be > 0");
  } else {
    const auto& lm = std::get<LocalMaxBandwidth>(kernel.rule);
    if (lm.k < 1) throw InvalidInput("nearest-neighbor k must be >= 1");
    if (!(lm.c >= 1.0 && lm.c <= 5.0)) throw InvalidInput("bandwidth constant C must lie in [1, 5]");
  }
}

LossEvaluation evaluate_loss(const Matrix& x, const GateParams& params, const GateSample& sample,
                             const TrainConfig& cfg, bool with_gradient,
                             std::optional<double> fixed_denominator) {
  const Eigen::Index m = x.rows();
  const Eigen::Index d = x.cols();
  if (params.mu.size() != d || sample.z.size() != d) {
    throw InvalidInput("gate count must match feature count");
  }
  if (cfg.t < 1) throw InvalidInput("Laplacian power t must be >= 1");
  const int t = cfg.t;
  const Vector& z = sample.z;

  const Matrix gated = x * z.asDiagonal();
  const Matrix sq = pairwise_sq_distances(gated);
  double beta = fixed_denominator
                    ? *fixed_denominator
                    : kernel_denominator(resolve_bandwidth(sq, cfg.kernel), cfg.kernel.denominator);
  beta = std::max(beta, kMinKernelDenominator);

  const Matrix k = (-sq.array() / beta).exp().matrix();
  const Vector deg = k.rowwise().sum();
  const Matrix p = deg.cwiseInverse().asDiagonal() * k;

  // forward[j] = P^j X on the ungated columns; gating enters through z^2.
  std::vector<Matrix> forward(static_cast<std::size_t>(t) + 1);
  forward[0] = x;
  for (int j = 1; j <= t; ++j) forward[j] = p * forward[j - 1];
  const Vector quad = (x.array() * forward[t].array()).colwise().sum().transpose();
  const Vector z2 = z.cwiseProduct(z);

  LossEvaluation out;
  out.denominator = beta;
  out.trace = z2.dot(quad);
  const Vector prob = open_probability(params);
  out.open_sum = prob.sum();

  const double md = static_cast<double>(m);
  double trace_weight = 0.0;  // d value / d trace
  if (const auto* l = std::get_if<LambdaRegularized>(&cfg.loss)) {
    out.value = -out.trace / md + l->lambda * out.open_sum;
    trace_weight = -1.0 / md;
  } else {
    const double den = md * out.open_sum + std::get<ParameterFree>(cfg.loss).delta;
    out.value = -out.trace / den;
    trace_weight = -1.0 / den;
  }
  if (!with_gradient) return out;

  // Adjoint of T = Tr[P^t G], G = X~ X~^T, with respect to P:
  //   dT/dP = sum_{s<t} (P^T)^s G (P^T)^{t-1-s}
  //         = sum_s backward[s] diag(z^2) forward[t-1-s]^T
  std::vector<Matrix> backward(static_cast<std::size_t>(t));
  backward[0] = x;
  for (int s = 1; s < t; ++s) backward[s] = p.transpose() * backward[s - 1];
  Matrix grad_p = Matrix::Zero(m, m);
  for (int s = 0; s < t; ++s) {
    grad_p.noalias() += backward[s] * z2.asDiagonal() * forward[t - 1 - s].transpose();
  }

  // Through P = D^-1 K: dT/dK_ij = (dT/dP_ij - sum_l dT/dP_il P_il) / D_i.
  const Vector row_dot = (grad_p.array() * p.array()).rowwise().sum();
  Matrix weights = ((grad_p.colwise() - row_dot).array().colwise() / deg.array()).matrix();
  // Through K = exp(-S/beta), S_ij = sum_k z_k^2 (x_ik - x_jk)^2.
  weights.array() *= k.array();
  const Vector degree_sum = weights.rowwise().sum() + weights.colwise().sum().transpose();
  const Matrix wx = weights * x;
  const Vector pair_sum = (x.array().square().matrix().transpose() * degree_sum) -
                          2.0 * (x.array() * wx.array()).colwise().sum().transpose().matrix();

  const Vector dtrace_dz = 2.0 * z.cwiseProduct(quad) - (2.0 / beta) * z.cwiseProduct(pair_sum);
  const Vector dtrace_dmu = dtrace_dz.cwiseProduct(gate_subgradient_mask(sample));
  const Vector dprob = open_probability_grad(params);

  if (const auto* l = std::get_if<LambdaRegularized>(&cfg.loss)) {
    out.gradient = trace_weight * dtrace_dmu + l->lambda * dprob;
  } else {
    const double den = md * out.open_sum + std::get<ParameterFree>(cfg.loss).delta;
    out.gradient = trace_weight * dtrace_dmu + (out.trace * md / (den * den)) * dprob;
  }
  return out;
}

double loss_lambda(const Matrix& x, const GateParams& params, const GateSample& sample,
                   const TrainConfig& cfg) {
  if (!std::holds_alternative<LambdaRegularized>(cfg.loss)) {
    throw InvalidInput("loss_lambda requires the lambda-regularized variant");
  }
  return evaluate_loss(x, params, sample, cfg, false).value;
}

double loss_paramfree(const Matrix& x, const GateParams& params, const GateSample& sample,
                      const TrainConfig& cfg) {
  if (!std::holds_alternative<ParameterFree>(cfg.loss)) {
    throw InvalidInput("loss_paramfree requires the parameter-free variant");
  }
  return evaluate_loss(x, params, sample, cfg, false).value;
}

Vector loss_gradient(const Matrix& x, const GateParams& params, const GateSample& sample,
                     const TrainConfig& cfg) {
  return evaluate_loss(x, params, sample, cfg, true).gradient;
}

}  // namespace dufs
