#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bhep/bootstrap.hpp"

namespace bhep {

struct NormalModel {
  GaussianParams params;
  std::string cov_label;  // "identity", "sigma1", "sigma2", or "custom"
};

struct StudentTModel {
  int dof;
  Matrix scale;
  std::string scale_label;
};

using Distribution = std::variant<NormalModel, StudentTModel>;

std::string distribution_label(const Distribution& dist);
int distribution_dim(const Distribution& dist);

/// How a replicate turns an incomplete sample into a decision.
struct Approach {
  enum class Kind { CompleteCase, Imputed, NaiveImputed };

  Kind kind = Kind::CompleteCase;
  std::optional<ImputationMethod> method;  // Imputed / NaiveImputed

  static Approach complete_case() { return {Kind::CompleteCase, std::nullopt}; }
  static Approach imputed(ImputationMethod m) { return {Kind::Imputed, m}; }
  /// Impute, then test as if the data had been complete (fixed null
  /// quantile, no bootstrap). Deliberately reproduces a misuse.
  static Approach naive(ImputationMethod m) { return {Kind::NaiveImputed, m}; }

  /// Parses "complete-case", an imputation method name, or "naive-<method>".
  static std::optional<Approach> parse(const std::string& name);
  std::string label() const;
};

/// One cell of the simulation grid.
struct ExperimentConfig {
  Distribution distribution = NormalModel{
      GaussianParams(Vector::Zero(1), Matrix::Identity(1, 1)), "identity"};
  int n = 0;
  int d = 0;
  MissingnessSpec missingness;
  Approach approach;
  int N = 500;   // Monte Carlo replicates
  int B = 200;   // bootstrap cycles per replicate
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  SigmaCenter sigma_center = SigmaCenter::CompleteCase;
  int naive_table_draws = 10000;  // null-table size for the naive approach

  void validate() const;
  /// Identifies the data-generating axes only (no approach), so that
  /// approaches compared on the same grid see identical samples, masks and
  /// bootstrap streams replicate by replicate.
  std::string data_key() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  double rejection_rate = 0.0;
  double standard_error = 0.0;  // sqrt(r(1-r)/successful)
  int replicates_failed = 0;
  double wall_seconds = 0.0;    // summed replicate compute time
  std::vector<std::int8_t> decisions;  // per replicate: 1 reject, 0 accept, -1 failed
};

ExperimentResult run_cell(const ExperimentConfig& cfg, int parallelism = 1);

/// Runs every cell; per-cell failures are recorded, the grid continues.
/// Output is independent of `parallelism`.
std::vector<ExperimentResult> run_grid(const std::vector<ExperimentConfig>& configs,
                                       int parallelism);

std::string results_csv_header();
void write_results_csv(const std::vector<ExperimentResult>& results, std::ostream& out);

/// Parses a grid description (JSON text) into the cross product of its
/// axes. Throws InvalidConfig naming the offending field.
std::vector<ExperimentConfig> parse_grid_config(const std::string& json_text);

// Figure emission -----------------------------------------------------------

/// One plotted line: rejection rate against sample size.
struct FigureSeries {
  std::string label;
  std::vector<int> ns;
  std::vector<double> rates;
  std::vector<double> ses;
};

struct FigureData {
  std::string id;
  std::vector<FigureSeries> series;
};

/// Row-level view of a result, also reconstructible from a results CSV.
struct ResultRow {
  std::string distribution;
  std::string missingness;
  std::string approach;
  int n = 0;
  double rate = 0.0;
  double se = 0.0;
};

std::vector<ResultRow> to_result_rows(const std::vector<ExperimentResult>& results);
std::vector<ResultRow> parse_results_csv(std::istream& in);

/// Groups rows into one figure per distribution, one series per
/// (approach, missingness). Every series must cover the full set of sample
/// sizes; otherwise IncompleteGrid lists the missing cells. Empty input is
/// an IncompleteGrid as well.
std::vector<FigureData> emit_figure_data(const std::vector<ResultRow>& rows);
FigureData emit_figure_data(const std::vector<ResultRow>& rows,
                            const std::string& figure_id);

void write_figure_csv(const FigureData& figure, std::ostream& out);
void write_figure_svg(const FigureData& figure, std::ostream& out);

// Named covariance matrices used across the experiment grids.
Matrix covariance_by_label(const std::string& label, int d);

/// FNV-1a hash of a canonical key; stable across platforms and runs.
std::uint64_t stable_hash(const std::string& key);

}  // namespace bhep
