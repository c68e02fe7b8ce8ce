#pragma once

#include "rfpls/simgen.hpp"
#include "rfpls/sofr.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rfpls::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNumericalError = 3,
  kConfigError = 4,
};

/// Curves observed on a common grid: header `id,t1,...,tJ`, one row per sample.
struct CurveTable {
  std::vector<std::string> ids;
  std::vector<double> grid;
  Eigen::MatrixXd values;
};

/// Scalar responses: header `id,y`.
struct ResponseTable {
  std::vector<std::string> ids;
  Eigen::VectorXd y;
};

/// Parse failures throw InputError naming source, line and column.
CurveTable parse_curve_csv(std::istream& in, const std::string& source);
CurveTable read_curve_csv(const std::filesystem::path& path);
ResponseTable parse_response_csv(std::istream& in, const std::string& source);
ResponseTable read_response_csv(const std::filesystem::path& path);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

inline constexpr int kModelVersion = 1;

/// Versioned JSON text holding basis specs, coefficients, intercept and
/// method metadata. Self-contained: prediction needs nothing else.
std::string serialize_model(const FittedSofr& fit);
/// Throws InputError on malformed text or an unsupported version.
FittedSofr deserialize_model(std::string_view text);
void write_model(const std::filesystem::path& path, const FittedSofr& fit);
FittedSofr read_model(const std::filesystem::path& path);

/// JSON experiment configuration; unknown keys and bad values throw
/// ConfigError naming the key.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

/// Tidy table `replication,method,level,metric,target,value`.
void write_results_csv(std::ostream& out, const ExperimentResult& result);
/// Median RISEE per contamination level and coefficient function, one
/// column per method.
void write_summary_csv(std::ostream& out, const ExperimentResult& result,
                       const ExperimentConfig& config);

/// Entry point shared by the `rfpls` binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rfpls::cli
