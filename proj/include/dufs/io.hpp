#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dufs/evalkit.hpp"
#include "dufs/score.hpp"
#include "dufs/synth.hpp"
#include "dufs/trainer.hpp"

namespace dufs {

/// Feature table read from CSV. The header names every column; a column
/// named `label` (if any) is split off as integer class labels.
struct CsvDataset {
  Matrix x;
  std::vector<std::string> feature_names;
  std::optional<std::vector<int>> labels;
};

/// Throws IoError if the file cannot be opened and InvalidInput (with the
/// 1-based line and column) on ragged rows, empty cells or non-numeric values.
CsvDataset read_csv(const std::filesystem::path& path);
CsvDataset parse_csv(std::string_view text);

/// Shortest round-trip decimal form; identical bits give identical text.
std::string format_number(double v);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// epoch,loss,sum_open_prob,precision,recall (empty cells when unknown).
std::string trace_csv(const TrainTrace& trace);

/// {"open_probabilities": [...], "retained": [...], "ranking": [...], "mu": [...]}
/// with 0-based indices; feature names are included when given.
std::string selection_json(const SelectionResult& sel, const GateParams& params,
                           const std::vector<std::string>& names = {});

/// Reads the ranking and probabilities back from selection_json output.
SelectionResult read_selection_json(const std::filesystem::path& path);

/// rank,feature,name,score
std::string scores_csv(const FeatureScores& scores, const std::vector<std::string>& names);

/// r,d,mean_corr,std_corr
std::string sweep_cells_csv(const BreakdownSweep& sweep);
/// r,d_star (empty cell when censored)
std::string breakdown_csv(const BreakdownSweep& sweep);

}  // namespace dufs
