#include "dufs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dufs/error.hpp"

namespace dufs {

Vector finite_difference_gradient(const Matrix& x, const GateParams& params, const Vector& epsilon,
                                  const TrainConfig& cfg, double step) {
  const GateSample base = gates_from_noise(params, epsilon);
  const double beta = evaluate_loss(x, params, base, cfg, false).denominator;
  Vector grad(params.mu.size());
  for (Eigen::Index i = 0; i < params.mu.size(); ++i) {
    GateParams plus = params;
    GateParams minus = params;
    plus.mu[i] += step;
    minus.mu[i] -= step;
    const double up = evaluate_loss(x, plus, gates_from_noise(plus, epsilon), cfg, false, beta).value;
    const double down = evaluate_loss(x, minus, gates_from_noise(minus, epsilon), cfg, false, beta).value;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

GradCheckReport run_gradient_check(const GradCheckOptions& opts, const GradientFn& gradient) {
  if (opts.instances < 1) throw InvalidInput("gradient check needs at least one instance");
  if (opts.d_min < 1 || opts.d_max < opts.d_min) throw InvalidInput("feature count range must satisfy 1 <= d_min <= d_max");
  if (opts.n_min < 3 || opts.n_max < opts.n_min) throw InvalidInput("sample count range must satisfy 3 <= n_min <= n_max");

  Rng rng(opts.seed);
  std::uniform_int_distribution<int> pick_n(opts.n_min, opts.n_max);
  std::uniform_int_distribution<int> pick_d(opts.d_min, opts.d_max);
  std::uniform_real_distribution<double> pick_mu(-0.2, 1.2);
  std::uniform_real_distribution<double> pick_lambda(0.05, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double margin = std::max(1e-3, 100.0 * opts.step);

  GradCheckReport report;
  for (int inst = 0; inst < opts.instances; ++inst) {
    const int n = pick_n(rng);
    const int d = pick_d(rng);
    Matrix raw(n, d);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = gauss(rng);
    const Matrix x = preprocess(raw).values;

    TrainConfig cfg;
    cfg.t = 1 + inst % 3;
    if (inst % 2 == 0) {
      cfg.loss = LambdaRegularized{pick_lambda(rng)};
    } else {
      cfg.loss = ParameterFree{1e-8};
    }
    if (inst % 5 == 4) {
      cfg.kernel = {GlobalBandwidth{0.3}, Denominator::TwoSigmaSquared};
    } else {
      cfg.kernel = {LocalMaxBandwidth{std::min(2, n - 1), inst % 2 ? 5.0 : 2.0}, Denominator::SigmaHat};
    }

    GateParams params = initial_gates(static_cast<std::size_t>(d), cfg.sigma_g);
    Vector eps(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      params.mu[j] = pick_mu(rng);
      // keep mu + eps clear of the clip points so the difference quotient is smooth
      do {
        eps[j] = cfg.sigma_g * gauss(rng);
      } while (std::abs(params.mu[j] + eps[j]) < margin || std::abs(params.mu[j] + eps[j] - 1.0) < margin);
    }

    const GateSample sample = gates_from_noise(params, eps);
    const Vector analytic = gradient(x, params, sample, cfg);
    const Vector numeric = finite_difference_gradient(x, params, eps, cfg, opts.step);

    for (Eigen::Index j = 0; j < d; ++j) {
      const double diff = std::abs(analytic[j] - numeric[j]);
      const double mag = std::max(std::abs(analytic[j]), std::abs(numeric[j]));
      double err = 0.0;
      bool ok = true;
      if (mag < opts.absolute_floor) {
        ok = diff <= opts.absolute_floor;
        err = ok ? 0.0 : diff / opts.absolute_floor;
      } else {
        err = diff / mag;
        ok = err < opts.tolerance;
      }
      if (!std::isfinite(err)) {
        err = std::numeric_limits<double>::infinity();
        ok = false;
      }
      if (!ok) report.passed = false;
      if (err > report.max_error || report.worst_instance < 0) {
        report.max_error = std::max(report.max_error, err);
        report.worst_instance = inst;
        report.worst_coordinate = j;
        report.worst_analytic = analytic[j];
        report.worst_numeric = numeric[j];
      }
    }
    ++report.instances;
  }
  return report;
}

}  // namespace dufs
