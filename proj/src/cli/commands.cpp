#include "rfpls/cli.hpp"

#include "rfpls/error.hpp"
#include "rfpls/eval.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace rfpls::cli {

namespace {

constexpr int kReportGridPoints = 101;

[[noreturn]] void rethrow_as(const Error& e, const std::string& message) {
  switch (e.kind()) {
    case ErrorKind::Input: throw InputError(message);
    case ErrorKind::Numerical: throw NumericalError(message);
    case ErrorKind::Config: throw ConfigError(message);
  }
  throw InputError(message);
}

// Prefixes library errors with the name of the step that raised them.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_as(e, std::string(name) + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string number_or_na(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

// Commas and line breaks would break the tidy CSV.
std::string csv_safe(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

struct Predictors {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> grids;
  std::vector<Eigen::MatrixXd> curves;
};

Predictors load_predictors(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InputError("at least one curve file is required");
  Predictors p;
  for (const auto& path : paths) {
    CurveTable table = read_curve_csv(path);
    if (p.ids.empty()) {
      p.ids = table.ids;
    } else if (table.ids != p.ids) {
      throw InputError("sample ids in '" + path + "' do not match those in '" + paths.front() + "'");
    }
    p.grids.push_back(std::move(table.grid));
    p.curves.push_back(std::move(table.values));
  }
  return p;
}

Eigen::VectorXd load_response(const std::string& path, const std::vector<std::string>& ids) {
  ResponseTable table = read_response_csv(path);
  if (table.ids.size() != ids.size()) {
    throw InputError("response file has " + std::to_string(table.ids.size()) + " rows but curve files have " +
                     std::to_string(ids.size()));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (table.ids[i] != ids[i]) {
      throw InputError("response row " + std::to_string(i + 1) + " has id '" + table.ids[i] + "', expected '" +
                       ids[i] + "'");
    }
  }
  return table.y;
}

std::vector<BasisSystem> systems_for(const Predictors& p, int num_basis) {
  std::vector<BasisSystem> systems;
  for (const auto& grid : p.grids) {
    if (grid.size() < 2) throw InputError("every curve file needs at least two grid points");
    systems.push_back(BasisSystem::bspline({grid.front(), grid.back()}, num_basis));
  }
  return systems;
}

struct DataOptions {
  std::string curves;
  std::string response;
  int num_basis = 20;
};

void add_data_options(CLI::App* cmd, DataOptions& opts) {
  cmd->add_option("--curves", opts.curves, "Comma-separated curve CSV files, one per predictor")->required();
  cmd->add_option("--response", opts.response, "Response CSV with header id,y")->required();
  cmd->add_option("--num-basis", opts.num_basis, "Cubic B-spline basis size per predictor")
      ->capture_default_str();
}

// ---- fit

struct FitOptions {
  std::string method;
  DataOptions data;
  std::optional<int> components;
  int cv_folds = 5;
  int max_components = 8;
  double trim_alpha = 0.1;
  std::uint64_t seed = 1;
  std::string out;
  std::string report;
};

void write_fit_report(std::ostream& out, const FitOptions& opts, const Predictors& p, const Eigen::VectorXd& y,
                      const FittedSofr& fit, const std::optional<CVReport>& cv) {
  out << "method: " << method_name(fit.method) << "\n";
  out << "observations: " << y.size() << "\n";
  out << "predictors: " << fit.systems.size() << "\n";
  out << "num_basis: " << opts.data.num_basis << "\n";
  out << "components: " << fit.components;
  if (cv) {
    out << " (cross-validated, " << cv->folds << " folds, trim_alpha " << format_double(cv->alpha) << ", seed "
        << opts.seed << ")\n";
  } else {
    out << " (fixed)\n";
  }
  out << "intercept: " << format_double(fit.intercept) << "\n";
  if (fit.robust) {
    const RobustReport& r = *fit.robust;
    Eigen::Index low = 0;
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) low += r.weights(i) < 0.5 ? 1 : 0;
    out << "tuning_constant: " << format_double(r.tuning) << "\n";
    out << "irpls_iterations: " << r.irpls_iterations << (r.irpls_converged ? " (converged)" : " (not converged)")
        << "\n";
    out << "m_estimate_iterations: " << r.m_iterations << (r.m_converged ? " (converged)" : " (not converged)")
        << "\n";
    out << "downweighted_rows: " << low << " of " << r.weights.size() << " with weight < 0.5\n";
  }

  if (cv) {
    out << "\n# cross_validation\nh,trimmed_mspe,skipped_folds\n";
    for (std::size_t i = 0; i < cv->grid.size(); ++i) {
      out << cv->grid[i] << "," << number_or_na(cv->scores[i]) << "," << cv->skipped[i] << "\n";
    }
  }

  out << "\n# fitted\nid,observed,fitted,residual" << (fit.robust ? ",weight" : "") << "\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out << p.ids[idx] << "," << format_double(y(i)) << "," << format_double(fit.fitted(i)) << ","
        << format_double(y(i) - fit.fitted(i));
    if (fit.robust) out << "," << format_double(fit.robust->weights(i));
    out << "\n";
  }

  std::vector<std::vector<double>> grids;
  for (const auto& s : fit.systems) {
    std::vector<double> g(kReportGridPoints);
    for (int k = 0; k < kReportGridPoints; ++k) {
      g[static_cast<std::size_t>(k)] =
          s.domain().lo + s.domain().length() * static_cast<double>(k) / (kReportGridPoints - 1);
    }
    grids.push_back(std::move(g));
  }
  const auto betas = coefficient_functions(fit, grids);
  out << "\n# coefficient_functions\npredictor,t,beta\n";
  for (std::size_t m = 0; m < betas.size(); ++m) {
    for (std::size_t k = 0; k < grids[m].size(); ++k) {
      out << m + 1 << "," << format_double(grids[m][k]) << "," << format_double(betas[m](static_cast<Eigen::Index>(k)))
          << "\n";
    }
  }
}

int cmd_fit(const FitOptions& opts, std::ostream& out) {
  const Method method = parse_method(opts.method);
  const Predictors p = stage("reading curves", [&] { return load_predictors(split_list(opts.data.curves)); });
  const Eigen::VectorXd y = stage("reading response", [&] { return load_response(opts.data.response, p.ids); });
  const auto systems = stage("basis setup", [&] { return systems_for(p, opts.data.num_basis); });
  const MultiFunctionalDesign design = stage("smoothing", [&] { return build_design(p.curves, p.grids, systems); });

  std::optional<CVReport> cv;
  int h = 0;
  if (opts.components) {
    h = *opts.components;
  } else {
    cv = stage("cross-validation", [&] {
      return select_num_components(design, y, opts.max_components, opts.cv_folds, opts.trim_alpha, method,
                                   opts.seed);
    });
    h = cv->chosen_h;
  }
  const FittedSofr fit = stage("fit", [&] { return fit_method(method, design, y, h); });

  stage("writing model", [&] { write_model(opts.out, fit); });
  std::string report_path = opts.report;
  if (report_path.empty()) report_path = std::filesystem::path(opts.out).replace_extension(".report.txt").string();
  stage("writing report", [&] {
    auto report = open_output(report_path);
    write_fit_report(report, opts, p, y, fit, cv);
  });

  out << "method " << method_name(method) << ", " << fit.components << " components\n";
  out << "model written to " << opts.out << "\n";
  out << "report written to " << report_path << "\n";
  return kSuccess;
}

// ---- predict

struct PredictOptions {
  std::string model;
  std::string curves;
  std::string out;
};

int cmd_predict(const PredictOptions& opts, std::ostream& out) {
  const FittedSofr fit = stage("reading model", [&] { return read_model(opts.model); });
  const auto paths = split_list(opts.curves);
  if (paths.size() != fit.systems.size()) {
    throw InputError("model expects " + std::to_string(fit.systems.size()) + " curve files, got " +
                     std::to_string(paths.size()));
  }
  const Predictors p = stage("reading curves", [&] { return load_predictors(paths); });
  const Eigen::VectorXd pred = stage("prediction", [&] { return predict(fit, p.curves, p.grids); });

  auto write = [&](std::ostream& os) {
    os << "sample_id,prediction\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      os << p.ids[static_cast<std::size_t>(i)] << "," << format_double(pred(i)) << "\n";
    }
  };
  if (opts.out.empty()) {
    write(out);
  } else {
    auto file = open_output(opts.out);
    write(file);
  }
  return kSuccess;
}

// ---- cv

struct CvOptions {
  std::string method;
  DataOptions data;
  int max_components = 8;
  int folds = 5;
  double trim_alpha = 0.1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_cv(const CvOptions& opts, std::ostream& out) {
  const Method method = parse_method(opts.method);
  const Predictors p = stage("reading curves", [&] { return load_predictors(split_list(opts.data.curves)); });
  const Eigen::VectorXd y = stage("reading response", [&] { return load_response(opts.data.response, p.ids); });
  const auto systems = stage("basis setup", [&] { return systems_for(p, opts.data.num_basis); });
  const MultiFunctionalDesign design = stage("smoothing", [&] { return build_design(p.curves, p.grids, systems); });
  const CVReport cv = stage("cross-validation", [&] {
    return select_num_components(design, y, opts.max_components, opts.folds, opts.trim_alpha, method, opts.seed);
  });

  auto write = [&](std::ostream& os) {
    os << "h,trimmed_mspe\n";
    for (std::size_t i = 0; i < cv.grid.size(); ++i) os << cv.grid[i] << "," << number_or_na(cv.scores[i]) << "\n";
  };
  if (opts.out.empty()) {
    write(out);
  } else {
    auto file = open_output(opts.out);
    write(file);
  }
  out << "chosen_h=" << cv.chosen_h << "\n";
  return kSuccess;
}

// ---- simulate

struct SimulateOptions {
  std::string config;
  std::string out;
  std::string summary;
  std::optional<int> workers;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
  ExperimentConfig config = read_experiment_config(opts.config);
  if (opts.workers) {
    config.workers = *opts.workers;
    config.validate();
  }
  if (!opts.out.empty()) config.output_path = opts.out;
  if (config.output_path.empty()) throw ConfigError("output_path: set it in the config or pass --out");

  const ExperimentResult result = stage("simulation", [&] { return run_experiment(config); });

  {
    auto file = open_output(config.output_path);
    write_results_csv(file, result);
  }
  std::string summary_path = opts.summary;
  if (summary_path.empty()) {
    summary_path = std::filesystem::path(config.output_path).replace_extension(".summary.csv").string();
  }
  {
    auto file = open_output(summary_path);
    write_summary_csv(file, result, config);
  }
  std::size_t failures = 0;
  for (const auto& row : result.rows) failures += row.metric == "error" ? 1 : 0;
  write_summary_csv(out, result, config);
  out << "results written to " << config.output_path << " (" << result.rows.size() << " rows, " << failures
      << " failed fits)\n";
  out << "summary written to " << summary_path << "\n";
  return kSuccess;
}

// ---- generate

struct GenerateOptions {
  int n = 200;
  double level = 0.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void write_curves(const std::filesystem::path& path, const std::vector<double>& grid, const Eigen::MatrixXd& values) {
  auto out = open_output(path.string());
  out << "id";
  for (double t : grid) out << "," << format_double(t);
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << "s" << i + 1;
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << "," << format_double(values(i, j));
    out << "\n";
  }
}

int cmd_generate(const GenerateOptions& opts, std::ostream& out) {
  const SimDataset clean = generate_clean(opts.n, derive_seed(opts.seed, 0));
  const SimDataset data = opts.level > 0.0 ? contaminate(clean, opts.level, derive_seed(opts.seed, 1)) : clean;

  const std::filesystem::path dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  for (std::size_t m = 0; m < data.curves.size(); ++m) {
    write_curves(dir / ("x" + std::to_string(m + 1) + ".csv"), data.grids[m], data.curves[m]);
  }
  {
    auto y = open_output((dir / "y.csv").string());
    y << "id,y\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) y << "s" << i + 1 << "," << format_double(data.y(i)) << "\n";
  }
  {
    auto mask = open_output((dir / "contaminated.csv").string());
    mask << "id,contaminated\n";
    for (std::size_t i = 0; i < data.contaminated.size(); ++i) {
      mask << "s" << i + 1 << "," << (data.contaminated[i] ? 1 : 0) << "\n";
    }
  }
  out << "wrote " << data.size() << " samples with " << data.curves.size() << " predictors to " << dir.string()
      << "\n";
  return kSuccess;
}

const char* kind_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
  }
  return "input";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return kInputError;
    case ErrorKind::Numerical: return kNumericalError;
    case ErrorKind::Config: return kConfigError;
  }
  return kInputError;
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "replication,method,level,metric,target,value\n";
  for (const auto& row : result.rows) {
    out << row.replication << "," << method_name(row.method) << "," << format_double(row.level) << "," << row.metric
        << "," << csv_safe(row.target) << "," << number_or_na(row.value) << "\n";
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result, const ExperimentConfig& config) {
  out << "level,coefficient";
  for (Method m : config.methods) out << "," << method_name(m);
  out << "\n";
  for (double level : config.contamination_levels) {
    for (int b = 1; b <= kSimPredictors; ++b) {
      const std::string target = "beta" + std::to_string(b);
      out << format_double(level) << "," << target;
      for (Method m : config.methods) out << "," << number_or_na(median_metric(result, m, level, "risee", target));
      out << "\n";
    }
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust functional partial least squares for scalar-on-function regression", "rfpls"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it with a report");
  fit_cmd->add_option("--method", fit.method, "fpls, rfpls or fpc")->required();
  add_data_options(fit_cmd, fit.data);
  auto* comp = fit_cmd->add_option("--components", fit.components, "Fixed number of components");
  auto* folds = fit_cmd->add_option("--cv-folds", fit.cv_folds, "Folds for selecting the component count")
                    ->capture_default_str();
  comp->excludes(folds);
  fit_cmd->add_option("--max-components", fit.max_components, "Largest component count tried by CV")
      ->capture_default_str();
  fit_cmd->add_option("--trim-alpha", fit.trim_alpha, "Trimming fraction of the CV criterion")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed of the fold assignment")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Model file")->required();
  fit_cmd->add_option("--report", fit.report, "Report file (default: <out>.report.txt)");

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict responses from a saved model");
  pred_cmd->add_option("--model", pred.model, "Model file")->required();
  pred_cmd->add_option("--curves", pred.curves, "Comma-separated curve CSV files")->required();
  pred_cmd->add_option("--out", pred.out, "Predictions CSV (default: stdout)");

  CvOptions cv;
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validated trimmed MSPE over component counts");
  cv_cmd->add_option("--method", cv.method, "fpls, rfpls or fpc")->required();
  add_data_options(cv_cmd, cv.data);
  cv_cmd->add_option("--max-components", cv.max_components, "Largest component count")->capture_default_str();
  cv_cmd->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
  cv_cmd->add_option("--trim-alpha", cv.trim_alpha, "Trimming fraction")->capture_default_str();
  cv_cmd->add_option("--seed", cv.seed, "Seed of the fold assignment")->capture_default_str();
  cv_cmd->add_option("--out", cv.out, "CV table CSV (default: stdout)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
  sim_cmd->add_option("--config", sim.config, "JSON experiment configuration")->required();
  sim_cmd->add_option("--out", sim.out, "Results CSV (overrides output_path)");
  sim_cmd->add_option("--summary", sim.summary, "Median RISEE table (default: <out>.summary.csv)");
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (overrides workers)");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a simulated data set as CSV files");
  gen_cmd->add_option("--n", gen.n, "Number of samples")->capture_default_str();
  gen_cmd->add_option("--level", gen.level, "Contamination level in [0, 0.5)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "error[input]: " << one_line(e.what()) << "\n";
    return kInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*cv_cmd) return cmd_cv(cv, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*gen_cmd) return cmd_generate(gen, out);
  } catch (const Error& e) {
    err << "error[" << kind_code(e.kind()) << "]: " << one_line(e.what()) << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error[input]: " << one_line(e.what()) << "\n";
    return kInputError;
  }
  return kSuccess;
}

}  // namespace rfpls::cli
