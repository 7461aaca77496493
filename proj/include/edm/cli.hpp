#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "edm/baselines.hpp"
#include "edm/errors.hpp"
#include "edm/fit.hpp"
#include "edm/gof.hpp"
#include "edm/model.hpp"

namespace edm::cli {

enum class Command { Stats, Fit, Compare, Pmf, Measure, Validate };
enum class OutputFormat { Table, Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Exit status for a library error.
int exit_code_for(ErrorCode code);

struct RunConfig {
  Command command = Command::Stats;
  std::filesystem::path data_path;
  /// Unset means both families where a command allows it.
  std::optional<Family> family;
  bool include_edm = true;
  std::optional<int> r;
  std::optional<double> p;
  std::optional<double> m;
  int r_min = 1;
  int r_max = 10;
  std::vector<BaselineModel> models;
  std::vector<double> params;  // baseline parameters for `pmf`
  double pool_threshold = 1.0;
  std::optional<std::size_t> n_max;
  OutputFormat format = OutputFormat::Table;
  FitMethod method = FitMethod::MLE;
  MeasureAlgorithm algorithm = MeasureAlgorithm::Recurrence;
  PmfOptions pmf_options;
  /// Test hook for `validate`: module whose checks get a deviation added.
  std::string perturb;
};

/// Default baselines of `compare`.
std::vector<BaselineModel> default_compare_models();

/// One fitted model with its goodness of fit.
struct ModelRow {
  std::string label;
  std::string family;  // "abm", "lm" or a baseline token
  std::optional<int> r;
  FitMethod method = FitMethod::MLE;
  std::vector<std::pair<std::string, double>> params;
  double m_hat = 0.0;
  double log_likelihood = 0.0;
  std::size_t n_params = 0;
  std::optional<GofReport> gof;
  std::string error;  // empty when the row succeeded
};

/// Fits and scores one row; errors propagate.
ModelRow fit_edm_row(Family family, int r, FitMethod method, const FrequencyTable& data,
                     double pool_threshold);
ModelRow fit_baseline_row(BaselineModel model, const FrequencyTable& data,
                          double pool_threshold);

/// ABM/LM rows over the r range, then baselines. Rows are computed in
/// parallel and returned in this fixed order; a failed row carries its
/// error message instead of results.
std::vector<ModelRow> compare_rows(const RunConfig& config, const FrequencyTable& data);

struct ValidationCheck {
  std::string module;
  std::string name;
  double max_deviation;
  double tolerance;
  bool passed;
};

/// Cross-module oracle suite. `perturb` names a module whose deviations
/// are inflated by 1e-2, so its checks fail.
std::vector<ValidationCheck> validation_suite(const std::string& perturb = {});

/// Parses arguments (program name excluded) and runs the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edm::cli
