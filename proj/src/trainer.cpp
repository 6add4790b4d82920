#include "dufs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dufs/error.hpp"
#include "dufs/evalkit.hpp"

namespace dufs {

namespace {

[[noreturn]] void abort_non_finite(int epoch, const GateParams& params, double loss) {
  std::ostringstream msg;
  msg << "non-finite loss or gradient at epoch " << epoch << " (loss=" << loss << "); mu = [";
  for (Eigen::Index i = 0; i < params.mu.size(); ++i) {
    msg << (i ? ", " : "") << params.mu[i];
  }
  msg << "]";
  throw NumericalFailure(msg.str());
}

Matrix gather_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  return out;
}

}  // namespace

SelectionResult select_features(const GateParams& params, std::optional<std::size_t> top_k) {
  const std::size_t d = params.d();
  if (top_k && *top_k > d) throw InvalidInput("top_k exceeds the number of features");

  SelectionResult out;
  out.open_probabilities = open_probability(params);
  out.ranking.resize(d);
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
    return out.open_probabilities[static_cast<Eigen::Index>(a)] >
           out.open_probabilities[static_cast<Eigen::Index>(b)];
  });
  if (top_k) {
    out.retained.assign(out.ranking.begin(), out.ranking.begin() + static_cast<std::ptrdiff_t>(*top_k));
    std::sort(out.retained.begin(), out.retained.end());
  } else {
    const Vector gates = deterministic_gates(params);
    for (std::size_t i = 0; i < d; ++i) {
      if (gates[static_cast<Eigen::Index>(i)] > 0.0) out.retained.push_back(i);
    }
  }
  return out;
}

TrainResult train(const DataMatrix& x, const TrainConfig& cfg,
                  const std::optional<std::vector<std::size_t>>& informative) {
  cfg.validate();
  const Eigen::Index n = x.values.rows();
  if (n < 2 || x.values.cols() < 1) throw InvalidInput("training needs n >= 2 and d >= 1");
  if (const auto* lm = std::get_if<LocalMaxBandwidth>(&cfg.kernel.rule)) {
    const Eigen::Index m = cfg.batch_size ? std::min<Eigen::Index>(n, *cfg.batch_size) : n;
    if (lm->k >= m) throw InvalidInput("nearest-neighbor k must be smaller than the batch size");
  }

  TrainResult result;
  result.params = initial_gates(x.d(), cfg.sigma_g);
  GateParams& params = result.params;
  Rng rng(cfg.seed);

  const bool full_batch = !cfg.batch_size || static_cast<Eigen::Index>(*cfg.batch_size) >= n;
  const Eigen::Index batch = full_batch ? n : static_cast<Eigen::Index>(*cfg.batch_size);
  const Eigen::Index steps_per_epoch = full_batch ? 1 : n / batch;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (!full_batch) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index step = 0; step < steps_per_epoch; ++step) {
      const GateSample sample = sample_gates(params, rng);
      LossEvaluation eval;
      if (full_batch) {
        eval = evaluate_loss(x.values, params, sample, cfg, true);
      } else {
        const std::vector<Eigen::Index> rows(order.begin() + step * batch,
                                             order.begin() + (step + 1) * batch);
        eval = evaluate_loss(gather_rows(x.values, rows), params, sample, cfg, true);
      }
      if (!std::isfinite(eval.value) || !eval.gradient.allFinite()) {
        abort_non_finite(epoch, params, eval.value);
      }
      epoch_loss += eval.value;
      params.mu -= cfg.learning_rate * eval.gradient;
    }

    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs) {
      TraceRecord rec;
      rec.epoch = epoch;
      rec.loss = epoch_loss / static_cast<double>(steps_per_epoch);
      const Vector p = open_probability(params);
      rec.sum_open_prob = p.sum();
      if (informative) {
        const PrecisionRecall pr = precision_recall_from_probabilities(p, *informative);
        rec.precision = pr.precision;
        rec.recall = pr.recall;
      }
      result.trace.records.push_back(rec);
    }
  }
  result.selection = select_features(params);
  return result;
}

}  // namespace dufs
