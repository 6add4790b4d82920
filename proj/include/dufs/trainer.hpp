#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dufs/gates.hpp"
#include "dufs/graph.hpp"
#include "dufs/objective.hpp"

namespace dufs {

struct TraceRecord {
  int epoch = 0;
  double loss = 0.0;
  double sum_open_prob = 0.0;  // "active gate count"
  std::optional<double> precision;
  std::optional<double> recall;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

struct SelectionResult {
  Vector open_probabilities;
  std::vector<std::size_t> retained;  // ascending feature indices
  std::vector<std::size_t> ranking;   // by open probability, descending; ties by index
};

struct TrainResult {
  GateParams params;
  TrainTrace trace;
  SelectionResult selection;
};

/// Retained features are those whose noise-free gate is open (mu_i > 0).
/// With `top_k`, the retained set is the top_k highest-probability features.
/// Throws InvalidInput if top_k > d.
SelectionResult select_features(const GateParams& params,
                                std::optional<std::size_t> top_k = std::nullopt);

/// Plain SGD on the gate means: one gate sample per step, replicated over the
/// batch rows. `informative` (0-based) adds precision/recall to the trace.
/// Throws NumericalFailure if the loss or gradient becomes non-finite.
TrainResult train(const DataMatrix& x, const TrainConfig& cfg,
                  const std::optional<std::vector<std::size_t>>& informative = std::nullopt);

}  // namespace dufs
