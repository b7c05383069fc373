#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wstl/dataset.hpp"
#include "wstl/grad.hpp"
#include "wstl/learn.hpp"
#include "wstl/metrics.hpp"
#include "wstl/properties.hpp"
#include "wstl/semantics.hpp"
#include "wstl/sparsify.hpp"
#include "wstl/text.hpp"

namespace wstl::cli {

namespace {

namespace fs = std::filesystem;

struct Failure {
  int code;
  std::string category;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& category, const std::string& message) {
  throw Failure{code, category, message};
}

struct DataOptions {
  std::vector<std::string> files;
  std::size_t synthetic = 0;  // windows per class; 0 = read CSV files
  std::size_t ki = 16;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  std::size_t epochs = 10;
  double sigma = 1.0;
  double zeta = 1.0;
  double learning_rate = 0.05;
  std::size_t batch = 32;
  std::string optimizer = "adam";
  bool no_scale = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.files, "Occupancy CSV files, concatenated in order (default: $WSTL_DATA_DIR)");
  cmd->add_option("--synthetic", d.synthetic, "Use N synthetic windows per class instead of CSV data");
  cmd->add_option("--ki", d.ki, "Window length")->capture_default_str();
  cmd->add_option("--seed", d.seed, "Seed for splitting, initialization and synthetic data")->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--sigma", t.sigma, "Softmin temperature")->capture_default_str();
  cmd->add_option("--zeta", t.zeta, "Loss sharpness")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--batch", t.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--optimizer", t.optimizer, "adam or sgd")->capture_default_str();
  cmd->add_flag("--no-scale", t.no_scale, "Train on raw features instead of standardized ones");
}

Sigma make_sigma(double v) {
  if (!(v > 0.0)) fail(kUsageError, "usage", "--sigma must be positive");
  return Sigma(v);
}

TrainConfig make_config(const TrainOptions& t, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = t.epochs;
  cfg.sigma = make_sigma(t.sigma);
  cfg.zeta = t.zeta;
  cfg.learning_rate = t.learning_rate;
  cfg.batch_size = t.batch;
  cfg.seed = seed;
  cfg.scale = !t.no_scale;
  try {
    cfg.optimizer = parse_optimizer_kind(t.optimizer);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(kUsageError, "usage", e.what());
  }
  return cfg;
}

std::vector<fs::path> resolve_data_files(const DataOptions& d) {
  std::vector<fs::path> files(d.files.begin(), d.files.end());
  if (!files.empty()) return files;
  const char* dir = std::getenv("WSTL_DATA_DIR");
  if (dir == nullptr || *dir == '\0') {
    fail(kDataError, "data", "no --data files given and WSTL_DATA_DIR is not set");
  }
  for (const char* name : {"datatraining.txt", "datatest.txt", "datatest2.txt"}) {
    const fs::path p = fs::path(dir) / name;
    if (fs::exists(p)) files.push_back(p);
  }
  if (files.empty()) fail(kDataError, "data", std::string("no occupancy files found in WSTL_DATA_DIR=") + dir);
  return files;
}

std::vector<LabeledWindow> load_windows(const DataOptions& d) {
  if (d.ki == 0) fail(kUsageError, "usage", "--ki must be >= 1");
  if (d.synthetic > 0) {
    if (!d.files.empty()) fail(kUsageError, "usage", "--synthetic and --data are mutually exclusive");
    return synth_generate(d.synthetic, d.ki, d.seed);
  }
  const auto files = resolve_data_files(d);
  auto windows = window(load_occupancy_csvs(files), d.ki);
  if (windows.empty()) fail(kDataError, "data", "no window of " + std::to_string(d.ki) + " same-label rows");
  return windows;
}

DataSplit make_split(const DataOptions& d) {
  if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) fail(kUsageError, "usage", "--test-fraction must lie in (0, 1)");
  return split(load_windows(d), d.test_fraction, d.seed);
}

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kDataError, "io", std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Formula load_model(const fs::path& path) {
  const std::string text = read_text(path, "model");
  try {
    Formula phi = parse_file_text(text);
    if (const auto v = validate(phi, dimension(phi)); !v.empty()) {
      fail(kDataError, "model", path.string() + ": " + v.front().message + " at " + path_to_string(v.front().path));
    }
    return phi;
  } catch (const ParseError& e) {
    fail(kDataError, "model", path.string() + ": " + describe_parse_error(text, e));
  }
}

// A formula file path, or an inline formula where PRED stands for a fresh predicate.
Formula resolve_structure(const std::string& arg, std::size_t l) {
  const bool is_file = fs::is_regular_file(arg);
  const std::string text = is_file ? read_text(arg, "structure") : arg;
  ParseOptions opts;
  opts.template_mode = true;
  try {
    return parse(text, l, opts);
  } catch (const ParseError& e) {
    fail(kUsageError, "parse", (is_file ? arg + ": " : std::string()) + describe_parse_error(text, e));
  }
}

// Numeric CSV with one row per time step and one column per feature; a
// non-numeric first line is a header. Occupancy-format files are accepted too.
SignalMatrix load_signal_csv(const fs::path& path) {
  const std::string text = read_text(path, "signal");
  if (text.find("Occupancy") != std::string::npos || text.find("occupancy") != std::string::npos) {
    const auto series = parse_occupancy_csv(text, path.string());
    SignalMatrix s(series.feature_names.size(), series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
      for (std::size_t f = 0; f < s.features(); ++f) s(f, t) = series.rows[t][f];
    }
    return s;
  }
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      fail(kDataError, "data", path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(kDataError, "data", path.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(kDataError, "data", path.string() + ": empty signal");
  SignalMatrix s(rows.front().size(), rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t f = 0; f < s.features(); ++f) s(f, t) = rows[t][f];
  }
  return s;
}

void write_text(const fs::path& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) fail(kDataError, "io", std::string("cannot write ") + what + " " + path.string());
}

void print_history(std::ostream& out, const std::vector<EpochRecord>& history) {
  char buf[96];
  out << "epoch        loss  train_accuracy\n";
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%5zu %11.4f %15.4f\n", r.epoch, r.loss, r.train_accuracy);
    out << buf;
  }
}

void print_metrics(std::ostream& out, const Formula& phi, const std::vector<LabeledWindow>& windows, Sigma sigma,
                   bool json) {
  const auto counts = confusion(phi, windows, sigma);
  const auto m = measures(counts);
  out << (json ? format_json(counts, m) : format_table(counts, m));
}

// ---------------------------------------------------------------------------

int cmd_train(std::ostream& out, DataOptions& d, const TrainOptions& t, const std::string& structure_arg,
              const std::string& model_out, const std::string& history_out) {
  const TrainConfig cfg = make_config(t, d.seed);
  const DataSplit data = make_split(d);
  const std::size_t l = data.train.front().signal.features();
  const Formula structure = resolve_structure(structure_arg, l);

  out << "windows: " << data.train.size() + data.test.size() << " (train " << data.train.size() << ", test "
      << data.test.size() << ")\n";
  const TrainResult result = train(data, structure, cfg);
  print_history(out, result.history);
  char buf[64];
  std::snprintf(buf, sizeof buf, "training time: %.3f s\n", result.seconds);
  out << buf << "test metrics:\n";
  print_metrics(out, result.formula, data.test, cfg.sigma, false);
  out << "model: " << print(result.formula) << "\n";

  if (!model_out.empty()) write_text(model_out, to_file_text(result.formula), "model");
  if (!history_out.empty()) write_text(history_out, history_csv(result.history), "history");
  return kOk;
}

int cmd_evaluate(std::ostream& out, DataOptions& d, bool use_split, const std::string& model_path, double sigma,
                 bool json) {
  const Formula phi = load_model(model_path);
  const Sigma s = make_sigma(sigma);
  std::vector<LabeledWindow> windows = use_split ? make_split(d).test : load_windows(d);
  print_metrics(out, phi, windows, s, json);
  return kOk;
}

int cmd_robustness(std::ostream& out, const std::string& model_path, const std::string& signal_path, bool classical,
                   double sigma, std::size_t k) {
  const Formula phi = load_model(model_path);
  const SignalMatrix s = load_signal_csv(signal_path);
  const std::size_t l = dimension(phi);
  if (l != 0 && l != s.features()) {
    fail(kDataError, "data",
         "model uses " + std::to_string(l) + " features, signal has " + std::to_string(s.features()));
  }
  const double r = classical ? robustness_classical(s, phi, k) : robustness_weighted(s, phi, k, make_sigma(sigma));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g\n", r);
  out << buf;
  return kOk;
}

struct SparsifyArgs {
  std::string model;
  double tau = 0.0;
  std::size_t sbar = 0;
  bool gates = false;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::string out;
  std::string report;
};

int cmd_sparsify(std::ostream& out, const SparsifyArgs& a, bool tau_given, bool sbar_given, DataOptions& d,
                 const TrainOptions& t) {
  const int modes = (tau_given ? 1 : 0) + (sbar_given ? 1 : 0) + (a.gates ? 1 : 0);
  if (modes != 1) fail(kUsageError, "usage", "give exactly one of --tau, --top-sbar, --gates");
  const Formula phi = load_model(a.model);

  Pruned pruned;
  if (a.gates) {
    if (a.lambda1 < 0.0 || a.lambda2 < 0.0) fail(kUsageError, "usage", "--lambda1/--lambda2 must be >= 0");
    const TrainConfig cfg = make_config(t, d.seed);
    const DataSplit data = make_split(d);
    GatedOptions opts;
    opts.lambda1 = a.lambda1;
    opts.lambda2 = a.lambda2;
    GatedResult r = train_gated(data, phi, cfg, opts);
    print_history(out, r.history);
    pruned.formula = std::move(r.formula);
    pruned.report = std::move(r.report);
    out << "surviving weights: " << nonzero_weight_count(pruned.formula) << "\n";
    out << "test metrics:\n";
    print_metrics(out, pruned.formula, data.test, cfg.sigma, false);
  } else if (tau_given) {
    pruned = prune_tau(phi, a.tau);
  } else {
    pruned = prune_top_sbar(phi, a.sbar);
  }
  out << pruned.report.text();
  out << "model: " << print(pruned.formula) << "\n";
  write_text(a.out, to_file_text(pruned.formula), "model");
  if (!a.report.empty()) write_text(a.report, pruned.report.csv(), "report");
  return kOk;
}

int cmd_check(std::ostream& out, bool grad, bool properties, std::size_t trials, double tol, std::size_t instances,
              std::uint64_t seed) {
  if (!grad && !properties) fail(kUsageError, "usage", "check needs --grad and/or --properties");
  bool ok = true;
  if (grad) {
    const auto report = grad_check_random(trials, tol, seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s gradient check: formulas=%zu comparisons=%zu worst=%.3g tol=%.3g\n",
                  report.passed() ? "PASS" : "FAIL", report.trials, report.checked, report.worst_relative_error, tol);
    out << buf;
    if (!report.worst_location.empty()) out << "     worst at " << report.worst_location << "\n";
    for (std::size_t i = 0; i < report.failures.size() && i < 10; ++i) out << "     " << report.failures[i] << "\n";
    ok = ok && report.passed();
  }
  if (properties) {
    for (const auto& r : run_property_suite(instances, seed)) {
      out << format_property_result(r) << "\n";
      ok = ok && r.passed();
    }
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_parse(std::ostream& out, const std::string& path, std::size_t l) {
  const std::string text = read_text(path, "formula");
  Formula phi;
  try {
    phi = parse_file_text(text, l);
  } catch (const ParseError& e) {
    fail(kUsageError, "parse", path + ": " + describe_parse_error(text, e));
  }
  const std::size_t dim = l != 0 ? l : dimension(phi);
  if (const auto v = validate(phi, dim); !v.empty()) {
    std::string msg = path + ":";
    for (const auto& x : v) msg += " " + x.message + " at " + path_to_string(x.path) + ";";
    fail(kUsageError, "parse", msg);
  }
  out << print(phi) << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn weighted signal temporal logic classifiers from labeled time series."};
  app.name("wstl");
  app.require_subcommand(1);

  DataOptions data;
  TrainOptions train_opts;
  bool use_split = false;

  auto* train_cmd = app.add_subcommand("train", "Train a formula on windowed data");
  std::string structure, model_out, history_out;
  add_data_options(train_cmd, data);
  add_train_options(train_cmd, train_opts);
  train_cmd->add_option("--structure", structure, "Formula file or inline template, e.g. \"G[0,15](PRED)\"")
      ->required();
  train_cmd->add_option("--test-fraction", data.test_fraction, "Held-out fraction")->capture_default_str();
  train_cmd->add_option("--out", model_out, "Write the trained model here");
  train_cmd->add_option("--history", history_out, "Write per-epoch history CSV here");

  auto* eval_cmd = app.add_subcommand("evaluate", "Print classification metrics of a model");
  std::string model_path;
  double sigma = 1.0;
  bool json = false;
  add_data_options(eval_cmd, data);
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--sigma", sigma, "Softmin temperature")->capture_default_str();
  auto* tf_opt = eval_cmd->add_option("--test-fraction", data.test_fraction,
                                      "Evaluate only the test part of the split train would make");
  eval_cmd->add_flag("--json", json, "Machine-readable output");

  auto* rob_cmd = app.add_subcommand("robustness", "Robustness of a model on one signal");
  std::string signal_path;
  bool classical = false;
  std::size_t k = 0;
  rob_cmd->add_option("--model", model_path, "Model file")->required();
  rob_cmd->add_option("--signal", signal_path, "CSV, one row per time step")->required();
  rob_cmd->add_flag("--classical", classical, "Min/max semantics instead of the weighted one");
  rob_cmd->add_option("--sigma", sigma, "Softmin temperature")->capture_default_str();
  rob_cmd->add_option("--time", k, "Evaluation time index")->capture_default_str();

  auto* sp_cmd = app.add_subcommand("sparsify", "Prune operator weights");
  SparsifyArgs sp;
  sp_cmd->add_option("--model", sp.model, "Model file")->required();
  auto* tau_opt = sp_cmd->add_option("--tau", sp.tau, "Zero normalized weights <= tau");
  auto* sbar_opt = sp_cmd->add_option("--top-sbar", sp.sbar, "Keep the sbar largest weights per operator");
  sp_cmd->add_flag("--gates", sp.gates, "Retrain the model's structure with gate variables");
  sp_cmd->add_option("--lambda1", sp.lambda1, "Bi-modal regularizer weight")->capture_default_str();
  sp_cmd->add_option("--lambda2", sp.lambda2, "L1 regularizer weight")->capture_default_str();
  sp_cmd->add_option("--out", sp.out, "Write the pruned model here")->required();
  sp_cmd->add_option("--report", sp.report, "Write the prune report CSV here");
  sp_cmd->add_option("--test-fraction", data.test_fraction, "Held-out fraction (--gates)")->capture_default_str();
  add_data_options(sp_cmd, data);
  add_train_options(sp_cmd, train_opts);

  auto* check_cmd = app.add_subcommand("check", "Run verification suites");
  bool grad = false, properties = false;
  std::size_t trials = 100, instances = 1000;
  double tol = 1e-4;
  std::uint64_t check_seed = 0;
  check_cmd->add_flag("--grad", grad, "Gradient vs finite differences on random formulas");
  check_cmd->add_flag("--properties", properties, "Semantic property suite");
  check_cmd->add_option("--trials", trials, "Random formulas for --grad")->capture_default_str();
  check_cmd->add_option("--tol", tol, "Relative error tolerance for --grad")->capture_default_str();
  check_cmd->add_option("--instances", instances, "Instances per property")->capture_default_str();
  check_cmd->add_option("--seed", check_seed, "Random seed")->capture_default_str();

  auto* parse_cmd = app.add_subcommand("parse", "Validate a formula file and print its canonical form");
  std::string formula_path;
  std::size_t parse_dim = 0;
  parse_cmd->add_option("--formula", formula_path, "Formula file")->required();
  parse_cmd->add_option("--dimension", parse_dim, "Signal dimension (default: inferred)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR:usage: " << e.what() << "\n";
    return kUsageError;
  }
  use_split = tf_opt->count() > 0;

  try {
    if (*train_cmd) return cmd_train(out, data, train_opts, structure, model_out, history_out);
    if (*eval_cmd) return cmd_evaluate(out, data, use_split, model_path, sigma, json);
    if (*rob_cmd) return cmd_robustness(out, model_path, signal_path, classical, sigma, k);
    if (*sp_cmd) return cmd_sparsify(out, sp, tau_opt->count() > 0, sbar_opt->count() > 0, data, train_opts);
    if (*check_cmd) return cmd_check(out, grad, properties, trials, tol, instances, check_seed);
    if (*parse_cmd) return cmd_parse(out, formula_path, parse_dim);
  } catch (const Failure& f) {
    err << "ERROR:" << f.category << ": " << f.message << "\n";
    return f.code;
  } catch (const ParseError& e) {
    err << "ERROR:parse: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "ERROR:data: " << e.what() << "\n";
    return kDataError;
  } catch (const TrainingError& e) {
    err << "ERROR:train: " << e.what() << "\n";
    return kDataError;
  } catch (const PruneError& e) {
    err << "ERROR:model: " << e.what() << "\n";
    return kDataError;
  } catch (const EvaluationError& e) {
    err << "ERROR:data: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "ERROR:usage: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "ERROR:internal: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace wstl::cli
