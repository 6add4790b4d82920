#include "dufs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "dufs/error.hpp"

namespace dufs {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

double parse_double(std::string_view cell, std::size_t line, std::size_t column) {
  if (cell.empty()) throw InvalidInput("empty cell at " + where(line, column));
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw InvalidInput("non-numeric value '" + std::string(cell) + "' at " + where(line, column));
  }
  if (!std::isfinite(v)) throw InvalidInput("non-finite value at " + where(line, column));
  return v;
}

}  // namespace

CsvDataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw InvalidInput("CSV is empty");

  const auto header = split_fields(lines[header_line]);
  std::optional<std::size_t> label_col;
  CsvDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw InvalidInput("empty column name at " + where(header_line + 1, c + 1));
    if (header[c] == "label") {
      if (label_col) throw InvalidInput("duplicate label column at " + where(header_line + 1, c + 1));
      label_col = c;
    } else {
      out.feature_names.emplace_back(header[c]);
    }
  }
  if (out.feature_names.empty()) throw InvalidInput("CSV has no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != header.size()) {
      throw InvalidInput("line " + std::to_string(li + 1) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(out.feature_names.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_double(fields[c], li + 1, c + 1);
      if (label_col && c == *label_col) {
        if (v != std::floor(v) || v < 0.0 || v > 1e9) {
          throw InvalidInput("label must be a non-negative integer at " + where(li + 1, c + 1));
        }
        labels.push_back(static_cast<int>(v));
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("CSV has a header but no data rows");

  out.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (label_col) out.labels = std::move(labels);
  return out;
}

CsvDataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string trace_csv(const TrainTrace& trace) {
  std::string s = "epoch,loss,sum_open_prob,precision,recall\n";
  for (const auto& r : trace.records) {
    s += std::to_string(r.epoch) + ',' + format_number(r.loss) + ',' + format_number(r.sum_open_prob) + ',';
    if (r.precision) s += format_number(*r.precision);
    s += ',';
    if (r.recall) s += format_number(*r.recall);
    s += '\n';
  }
  return s;
}

std::string selection_json(const SelectionResult& sel, const GateParams& params,
                           const std::vector<std::string>& names) {
  nlohmann::ordered_json j;
  j["open_probabilities"] = std::vector<double>(sel.open_probabilities.data(),
                                                sel.open_probabilities.data() + sel.open_probabilities.size());
  j["mu"] = std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size());
  j["sigma_g"] = params.sigma_g;
  j["retained"] = sel.retained;
  j["ranking"] = sel.ranking;
  if (!names.empty()) j["feature_names"] = names;
  return j.dump(2) + "\n";
}

SelectionResult read_selection_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  SelectionResult sel;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto p = j.at("open_probabilities").get<std::vector<double>>();
    sel.open_probabilities = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
    sel.retained = j.at("retained").get<std::vector<std::size_t>>();
    sel.ranking = j.at("ranking").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": malformed selection file: " + e.what());
  }
  const std::size_t d = static_cast<std::size_t>(sel.open_probabilities.size());
  std::vector<bool> seen(d, false);
  if (sel.ranking.size() != d) throw InvalidInput(path.string() + ": ranking is not a permutation");
  for (auto i : sel.ranking) {
    if (i >= d || seen[i]) throw InvalidInput(path.string() + ": ranking is not a permutation");
    seen[i] = true;
  }
  return sel;
}

std::string scores_csv(const FeatureScores& scores, const std::vector<std::string>& names) {
  std::string s = "rank,feature,name,score\n";
  const auto order = scores.ranking();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto f = order[r];
    s += std::to_string(r + 1) + ',' + std::to_string(f) + ',' + (f < names.size() ? names[f] : "") + ',' +
         format_number(scores.scores[static_cast<Eigen::Index>(f)]) + '\n';
  }
  return s;
}

std::string sweep_cells_csv(const BreakdownSweep& sweep) {
  std::string s = "r,d,mean_corr,std_corr\n";
  for (const auto& c : sweep.cells) {
    s += format_number(c.r) + ',' + std::to_string(c.d) + ',' + format_number(c.mean_corr) + ',' +
         format_number(c.std_corr) + '\n';
  }
  return s;
}

std::string breakdown_csv(const BreakdownSweep& sweep) {
  std::string s = "r,d_star\n";
  for (const auto& b : sweep.breakdown) {
    s += format_number(b.r) + ',' + (b.d_star ? format_number(*b.d_star) : std::string()) + '\n';
  }
  return s;
}

}  // namespace dufs
