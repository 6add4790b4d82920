#include "dufs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dufs/error.hpp"
#include "dufs/evalkit.hpp"
#include "dufs/io.hpp"
#include "dufs/score.hpp"
#include "dufs/synth.hpp"
#include "dufs/trainer.hpp"

namespace dufs {

namespace fs = std::filesystem;

namespace {

struct DataOptions {
  std::string input;
  std::string synth;
  std::size_t n = 100;
  std::size_t nuisance = 8;
  std::string nuisance_dist = "gaussian";
  double r = 5.0;
};

struct KernelOptions {
  int knn = 2;
  double c = 5.0;
};

struct TrainOptions {
  std::string loss = "param-free";
  double lambda = 1.0;
  int t = 2;
  double lr = 1.0;
  int epochs = 5000;
  std::size_t batch = 0;  // 0: full batch
  double sigma_g = 0.5;
  int log_every = 1;
};

struct Options {
  DataOptions data;
  KernelOptions kernel;
  TrainOptions train;
  std::uint64_t seed = 0;
  std::string out;
  // select
  std::size_t top_k = 0;
  // score
  bool normalized = false;
  // cluster
  std::string selection;
  std::vector<std::size_t> counts;
  int runs = 20;
  std::string method = "kmeans";
  // sweep lambda
  std::vector<double> lambdas;
  // sweep chi
  std::vector<double> r_grid{3, 4, 5, 6, 7, 8};
  std::vector<std::size_t> d_grid{1,    2,    4,    8,     16,    32,    64,    128,    256,
                                  512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072};
  bool full_grid = false;
  std::size_t per_cluster = 50;
  int seeds = 10;
  double threshold = 0.7;
  double nuisance_std = 0.70710678118654752;
  double fail_prob = 0.05;
  // gradcheck
  GradCheckOptions grad;
};

struct LoadedData {
  DataMatrix x;
  std::vector<std::string> names;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<std::size_t>> informative;
};

void add_data_options(CLI::App* app, Options& o) {
  app->add_option("--input", o.data.input, "CSV with a header row and optional 'label' column");
  app->add_option("--synth", o.data.synth, "synthetic generator")
      ->check(CLI::IsMember({"two-moons", "two-clusters"}));
  app->add_option("--n", o.data.n, "synthetic sample count (total)");
  app->add_option("--nuisance", o.data.nuisance, "synthetic nuisance columns");
  app->add_option("--nuisance-dist", o.data.nuisance_dist, "two-moons nuisance law")
      ->check(CLI::IsMember({"gaussian", "uniform"}));
  app->add_option("--r", o.data.r, "two-clusters separation");
}

void add_kernel_options(CLI::App* app, Options& o) {
  app->add_option("--knn", o.kernel.knn, "nearest neighbor used for the bandwidth");
  app->add_option("--bandwidth-c", o.kernel.c, "bandwidth constant C in [1, 5]");
}

void add_train_options(CLI::App* app, Options& o, bool with_loss) {
  if (with_loss) {
    app->add_option("--loss", o.train.loss)->check(CLI::IsMember({"lambda", "param-free"}));
    app->add_option("--lambda", o.train.lambda, "regularization weight of the lambda loss");
  }
  app->add_option("--t", o.train.t, "power of the random-walk Laplacian");
  app->add_option("--lr", o.train.lr, "SGD learning rate");
  app->add_option("--epochs", o.train.epochs);
  app->add_option("--batch", o.train.batch, "minibatch size, 0 for full batch");
  app->add_option("--sigma-g", o.train.sigma_g, "gate noise standard deviation");
  app->add_option("--log-every", o.train.log_every, "trace stride in epochs");
}

KernelConfig make_kernel(const KernelOptions& k) {
  return {LocalMaxBandwidth{k.knn, k.c}, Denominator::SigmaHat};
}

TrainConfig make_train_config(const Options& o) {
  TrainConfig cfg;
  if (o.train.loss == "lambda") {
    cfg.loss = LambdaRegularized{o.train.lambda};
  } else {
    cfg.loss = ParameterFree{};
  }
  cfg.t = o.train.t;
  cfg.learning_rate = o.train.lr;
  cfg.epochs = o.train.epochs;
  if (o.train.batch > 0) cfg.batch_size = o.train.batch;
  cfg.kernel = make_kernel(o.kernel);
  cfg.seed = o.seed;
  cfg.sigma_g = o.train.sigma_g;
  cfg.log_every = o.train.log_every;
  cfg.validate();
  return cfg;
}

LoadedData load_data(const DataOptions& o, std::uint64_t seed, std::ostream& err) {
  if (o.input.empty() == o.synth.empty()) throw InvalidInput("give exactly one of --input and --synth");
  LoadedData out;
  Matrix raw;
  if (!o.input.empty()) {
    auto csv = read_csv(o.input);
    raw = std::move(csv.x);
    out.names = std::move(csv.feature_names);
    out.labels = std::move(csv.labels);
  } else {
    LabeledData gen;
    if (o.synth == "two-moons") {
      TwoMoonsConfig c;
      c.n = o.n;
      c.d_nuisance = o.nuisance;
      c.nuisance = o.nuisance_dist == "uniform" ? NuisanceDistribution::Uniform01
                                                : NuisanceDistribution::StandardGaussian;
      c.seed = seed;
      gen = gen_two_moons(c);
    } else {
      if (o.n < 2 || o.n % 2 != 0) throw InvalidInput("two-clusters sample count must be even and >= 2");
      TwoClusterConfig c;
      c.n_per_cluster = o.n / 2;
      c.r = o.r;
      c.d_nuisance = o.nuisance;
      c.seed = seed;
      gen = gen_two_clusters(c);
    }
    raw = std::move(gen.x);
    out.labels = std::move(gen.labels);
    out.informative = std::move(gen.informative);
    for (Eigen::Index j = 0; j < raw.cols(); ++j) out.names.push_back("f" + std::to_string(j));
  }
  out.x = preprocess(raw);
  for (auto j : out.x.constant_columns) {
    err << "warning: column " << j << " (" << out.names[j] << ") is constant\n";
  }
  return out;
}

void prepare_out_dir(const std::string& out) {
  if (out.empty()) throw InvalidInput("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out);
}

std::string effective_config(const CLI::App* app) {
  std::istringstream in(app->config_to_str(true, false));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.rfind("config=", 0) == 0) continue;
    kept += line + '\n';
  }
  return kept;
}

std::string ids(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

int cmd_select(const Options& o, const CLI::App* app, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = make_train_config(o);
  prepare_out_dir(o.out);
  const auto data = load_data(o.data, o.seed, err);
  auto res = train(data.x, cfg, data.informative);
  if (o.top_k > 0) res.selection = select_features(res.params, o.top_k);
  write_file_atomic(fs::path(o.out) / "selection.json", selection_json(res.selection, res.params, data.names));
  write_file_atomic(fs::path(o.out) / "trace.csv", trace_csv(res.trace));
  write_file_atomic(fs::path(o.out) / "config.ini", effective_config(app));
  out << "retained: " << ids(res.selection.retained) << '\n';
  const auto& last = res.trace.records.back();
  out << "final loss " << format_number(last.loss) << ", sum of open probabilities "
      << format_number(last.sum_open_prob) << '\n';
  if (last.precision) {
    out << "precision " << format_number(*last.precision) << ", recall " << format_number(*last.recall) << '\n';
  }
  return 0;
}

int cmd_score(const Options& o, const CLI::App* app, std::ostream& out, std::ostream& err) {
  prepare_out_dir(o.out);
  const auto data = load_data(o.data, o.seed, err);
  const auto scores = laplacian_score_baseline(data.x, make_kernel(o.kernel), o.normalized);
  write_file_atomic(fs::path(o.out) / "scores.csv", scores_csv(scores, data.names));
  write_file_atomic(fs::path(o.out) / "config.ini", effective_config(app));
  const auto order = scores.ranking();
  out << "top features (small score first): "
      << ids(std::vector<std::size_t>(order.begin(), order.begin() + std::min<std::size_t>(order.size(), 10)))
      << '\n';
  return 0;
}

int cmd_cluster(const Options& o, const CLI::App* app, std::ostream& out, std::ostream& err) {
  if (o.selection.empty()) throw InvalidInput("--selection is required");
  if (o.runs < 1) throw InvalidInput("--runs must be >= 1");
  prepare_out_dir(o.out);
  const auto data = load_data(o.data, o.seed, err);
  if (!data.labels) throw InvalidInput("clustering accuracy needs labels (a 'label' column or --synth)");
  const auto sel = read_selection_json(o.selection);
  const std::size_t d = data.x.d();
  if (sel.ranking.size() != d) {
    throw InvalidInput("selection has " + std::to_string(sel.ranking.size()) + " features, data has " +
                       std::to_string(d));
  }
  std::vector<std::size_t> counts = o.counts;
  if (counts.empty()) {
    if (sel.retained.empty()) throw InvalidInput("selection retains no features; pass --counts");
    counts.push_back(sel.retained.size());
  }
  for (auto c : counts) {
    if (c < 1 || c > d) throw InvalidInput("feature count " + std::to_string(c) + " outside [1, " + std::to_string(d) + "]");
  }
  const auto truth = make_assignment(*data.labels);
  const KernelConfig kernel = make_kernel(o.kernel);

  std::string csv = "features,mean_accuracy,std_accuracy,runs\n";
  for (auto c : counts) {
    Matrix sub(data.x.values.rows(), static_cast<Eigen::Index>(c));
    for (std::size_t j = 0; j < c; ++j) sub.col(static_cast<Eigen::Index>(j)) = data.x.values.col(static_cast<Eigen::Index>(sel.ranking[j]));
    std::vector<double> acc;
    for (int run = 0; run < o.runs; ++run) {
      const auto seed = mix_seed(o.seed, static_cast<std::uint64_t>(run));
      const ClusterAssignment pred = o.method == "spectral" ? spectral_clustering(sub, truth.k, kernel, seed)
                                                            : kmeans(sub, truth.k, 10, seed).assignment;
      acc.push_back(clustering_accuracy(pred, truth));
    }
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(acc.size()));
    csv += std::to_string(c) + ',' + format_number(mean) + ',' + format_number(sd) + ',' + std::to_string(o.runs) + '\n';
    out << c << " features: accuracy " << format_number(mean) << " +- " << format_number(sd) << '\n';
  }
  write_file_atomic(fs::path(o.out) / "accuracy.csv", csv);
  write_file_atomic(fs::path(o.out) / "config.ini", effective_config(app));
  return 0;
}

int cmd_sweep_lambda(Options o, const CLI::App* app, std::ostream& out, std::ostream& err) {
  if (o.lambdas.empty()) throw InvalidInput("--lambdas grid is empty");
  o.train.loss = "lambda";
  make_train_config(o);
  prepare_out_dir(o.out);
  const auto data = load_data(o.data, o.seed, err);
  std::string csv = "lambda,retained,sum_open_prob,precision,recall,final_loss\n";
  for (double lambda : o.lambdas) {
    o.train.lambda = lambda;
    const auto res = train(data.x, make_train_config(o), data.informative);
    const auto& last = res.trace.records.back();
    csv += format_number(lambda) + ',' + std::to_string(res.selection.retained.size()) + ',' +
           format_number(last.sum_open_prob) + ',' + (last.precision ? format_number(*last.precision) : "") + ',' +
           (last.recall ? format_number(*last.recall) : "") + ',' + format_number(last.loss) + '\n';
    out << "lambda " << format_number(lambda) << ": retained " << res.selection.retained.size() << '\n';
  }
  write_file_atomic(fs::path(o.out) / "lambda_sweep.csv", csv);
  write_file_atomic(fs::path(o.out) / "config.ini", effective_config(app));
  return 0;
}

int cmd_sweep_chi(const Options& o, const CLI::App* app, std::ostream& out) {
  SweepConfig cfg;
  cfg.r_grid = o.r_grid;
  cfg.d_grid = o.d_grid;
  cfg.n_per_cluster = o.per_cluster;
  cfg.threshold = o.threshold;
  cfg.seeds = o.seeds;
  cfg.base_seed = o.seed;
  cfg.nuisance_std = o.nuisance_std;
  cfg.kernel = make_kernel(o.kernel);
  cfg.stop_at_breakdown = !o.full_grid;
  if (cfg.r_grid.empty() || cfg.d_grid.empty()) throw InvalidInput("sweep grids must be non-empty");
  prepare_out_dir(o.out);
  const auto sweep = empirical_breakdown_sweep(cfg);

  std::string bound = "r,gamma,d_max\n";
  for (double r : cfg.r_grid) {
    BoundInputs in;
    in.r = r;
    in.n = cfg.n_per_cluster;
    in.fail_prob = o.fail_prob;
    const auto b = predicted_max_nuisance_dims(in);
    bound += format_number(r) + ',' + format_number(b.gamma) + ',' + format_number(b.d_max) + '\n';
  }

  nlohmann::ordered_json fit;
  std::size_t uncensored = 0;
  for (const auto& b : sweep.breakdown) uncensored += b.d_star.has_value();
  fit["uncensored_points"] = uncensored;
  if (uncensored >= 2) {
    const double slope = loglog_slope(sweep.breakdown);
    fit["loglog_slope"] = slope;
    out << "log-log slope of d*(r): " << format_number(slope) << '\n';
  } else {
    fit["loglog_slope"] = nullptr;
    out << "fewer than two uncensored breakdown points; no slope\n";
  }
  for (const auto& b : sweep.breakdown) {
    out << "r " << format_number(b.r) << ": d* " << (b.d_star ? format_number(*b.d_star) : "censored") << '\n';
  }
  write_file_atomic(fs::path(o.out) / "cells.csv", sweep_cells_csv(sweep));
  write_file_atomic(fs::path(o.out) / "breakdown.csv", breakdown_csv(sweep));
  write_file_atomic(fs::path(o.out) / "bound.csv", bound);
  write_file_atomic(fs::path(o.out) / "fit.json", fit.dump(2) + "\n");
  write_file_atomic(fs::path(o.out) / "config.ini", effective_config(app));
  return 0;
}

int cmd_gradcheck(const Options& o, std::ostream& out, const CliHooks& hooks) {
  GradCheckOptions g = o.grad;
  g.seed = o.seed;
  const auto rep = run_gradient_check(g, hooks.gradient);
  out << "instances " << rep.instances << ", max error " << format_number(rep.max_error) << '\n';
  if (!rep.passed) {
    out << "FAILED: worst instance " << rep.worst_instance << ", coordinate " << rep.worst_coordinate
        << ", analytic " << format_number(rep.worst_analytic) << ", numeric " << format_number(rep.worst_numeric)
        << '\n';
    return 1;
  }
  out << "passed\n";
  return 0;
}

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Expands a flat key=value config file into command-line tokens for the
// options of `target` that the command line leaves unset.
std::vector<std::string> config_tokens(const std::string& path, const CLI::App* target,
                                       const std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key == "config" || given_on_command_line(args, key)) continue;
    const CLI::Option* opt = target->get_option_no_throw("--" + key);
    if (opt == nullptr) throw InvalidInput(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    auto value = trim(line.substr(eq + 1));
    std::vector<std::string> values;
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      value = value.substr(1, value.size() - 2);
      std::size_t start = 0;
      while (start < value.size()) {
        const auto comma = value.find(',', start);
        const auto item = unquote(value.substr(start, comma == std::string_view::npos ? value.size() - start : comma - start));
        if (!item.empty()) values.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    } else {
      const auto v = unquote(value);
      if (!v.empty()) values.push_back(v);
    }
    if (opt->get_type_size() == 0) {
      if (!values.empty() && (values[0] == "true" || values[0] == "1")) tokens.push_back("--" + key);
      continue;
    }
    if (values.empty()) continue;
    tokens.push_back("--" + key);
    tokens.insert(tokens.end(), values.begin(), values.end());
  }
  return tokens;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks) {
  Options o;
  CLI::App app{"Differentiable unsupervised feature selection with gated Laplacians"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* select = app.add_subcommand("select", "train gates and write the selected features");
  auto* score = app.add_subcommand("score", "baseline Laplacian scores on all features");
  auto* cluster = app.add_subcommand("cluster", "clustering accuracy on top-ranked features");
  auto* sweep = app.add_subcommand("sweep", "grid experiments");
  auto* sweep_lambda = sweep->add_subcommand("lambda", "retained features across a lambda grid");
  auto* sweep_chi = sweep->add_subcommand("chi", "eigenvector breakdown against nuisance dimension");
  auto* gradcheck = app.add_subcommand("gradcheck", "analytic vs finite-difference gradient");
  sweep->require_subcommand(1);

  std::string config_path;
  for (auto* sub : {select, score, cluster, sweep_lambda, sweep_chi, gradcheck}) {
    sub->add_option("--config", config_path, "flat key=value file; flags override it");
    sub->add_option("--seed", o.seed);
  }
  for (auto* sub : {select, score, cluster, sweep_lambda, sweep_chi}) sub->add_option("--out", o.out, "output directory");
  for (auto* sub : {select, score, cluster, sweep_lambda}) add_data_options(sub, o);
  for (auto* sub : {select, score, cluster, sweep_lambda, sweep_chi}) add_kernel_options(sub, o);

  add_train_options(select, o, true);
  select->add_option("--top-k", o.top_k, "keep the k most probable features, 0 to use the sign of mu");
  score->add_flag("--normalized", o.normalized, "degree-normalized score");
  cluster->add_option("--selection", o.selection, "selection.json written by select");
  cluster->add_option("--counts", o.counts, "numbers of top-ranked features to cluster on")->delimiter(',');
  cluster->add_option("--runs", o.runs);
  cluster->add_option("--method", o.method)->check(CLI::IsMember({"kmeans", "spectral"}));
  add_train_options(sweep_lambda, o, false);
  sweep_lambda->add_option("--lambdas", o.lambdas, "lambda grid")->delimiter(',');
  sweep_chi->add_option("--r-grid", o.r_grid)->delimiter(',');
  sweep_chi->add_option("--d-grid", o.d_grid, "ascending nuisance dimensions")->delimiter(',');
  sweep_chi->add_option("--per-cluster", o.per_cluster);
  sweep_chi->add_option("--seeds", o.seeds);
  sweep_chi->add_option("--threshold", o.threshold);
  sweep_chi->add_option("--nuisance-std", o.nuisance_std);
  sweep_chi->add_option("--fail-prob", o.fail_prob, "failure probability of the bound");
  sweep_chi->add_flag("--full-grid", o.full_grid, "keep sweeping d after an r has broken down");
  gradcheck->add_option("--instances", o.grad.instances);
  gradcheck->add_option("--n-min", o.grad.n_min);
  gradcheck->add_option("--n-max", o.grad.n_max);
  gradcheck->add_option("--d-min", o.grad.d_min);
  gradcheck->add_option("--d-max", o.grad.d_max);
  gradcheck->add_option("--step", o.grad.step);
  gradcheck->add_option("--tolerance", o.grad.tolerance);

  std::vector<std::string> full = args;
  if (const auto path = find_config_path(args)) {
    std::size_t depth = 0;
    const CLI::App* target = &app;
    while (depth < full.size()) {
      const CLI::App* next = nullptr;
      for (const auto* s : target->get_subcommands({})) {
        if (s->get_name() == full[depth]) next = s;
      }
      if (next == nullptr) break;
      target = next;
      ++depth;
    }
    const auto extra = config_tokens(*path, target, args);
    full.insert(full.begin() + static_cast<std::ptrdiff_t>(depth), extra.begin(), extra.end());
  }

  try {
    std::vector<std::string> reversed(full.rbegin(), full.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (select->parsed()) return cmd_select(o, select, out, err);
  if (score->parsed()) return cmd_score(o, score, out, err);
  if (cluster->parsed()) return cmd_cluster(o, cluster, out, err);
  if (sweep_lambda->parsed()) return cmd_sweep_lambda(o, sweep_lambda, out, err);
  if (sweep_chi->parsed()) return cmd_sweep_chi(o, sweep_chi, out);
  return cmd_gradcheck(o, out, hooks);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks) {
  try {
    return dispatch(args, out, err, hooks);
  } catch (const InvalidInput& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dufs
