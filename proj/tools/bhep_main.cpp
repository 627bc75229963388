// Command-line front end: single-dataset tests, MCAR amputation, null
// quantile tables, and Monte Carlo power studies. JSON results go to
// stdout, diagnostics to stderr. Exit codes: 0 success, 1 internal error,
// 2 user/input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bhep/bootstrap.hpp"
#include "bhep/harness.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20240501;
constexpr const char* kVersion = "bhep 1.0.0";

std::uint64_t effective_seed(const std::optional<std::uint64_t>& flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("BHEP_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return kDefaultSeed;
}

bhep::MissingnessSpec spec_from_probs(const std::string& mechanism,
                                      const std::vector<double>& probs,
                                      Eigen::Index d) {
  if (mechanism == "per-column") {
    bhep::Vector q(d);
    if (probs.size() == 1) {
      q.setConstant(probs[0]);
    } else if (static_cast<Eigen::Index>(probs.size()) == d) {
      for (Eigen::Index k = 0; k < d; ++k) q[k] = probs[k];
    } else {
      throw bhep::InvalidConfig("--probs must give 1 value or one per column");
    }
    return bhep::MissingnessSpec{bhep::PerColumn{std::move(q)}};
  }
  if (mechanism == "row-value") {
    if (probs.size() != 2) {
      throw bhep::InvalidConfig("--probs must give p_row,p_value for row-value");
    }
    return bhep::MissingnessSpec{bhep::RowThenValue{probs[0], probs[1]}};
  }
  throw bhep::InvalidConfig("--mechanism must be 'per-column' or 'row-value'");
}

bhep::SigmaCenter parse_center(const std::string& name) {
  if (name == "complete-case") return bhep::SigmaCenter::CompleteCase;
  if (name == "available-case") return bhep::SigmaCenter::AvailableCase;
  throw bhep::InvalidConfig("--sigma-center must be 'complete-case' or 'available-case'");
}

int cmd_test(const std::string& input, bool header, const std::string& method_name,
             double alpha, int B, const std::optional<std::uint64_t>& seed_flag,
             bool naive, const std::string& mechanism, const std::string& center_name,
             int table_draws, const std::string& knn_aggregate) {
  const std::uint64_t seed = effective_seed(seed_flag);
  const bhep::IncompleteMatrix data = bhep::read_csv(input, header);
  const bhep::SigmaCenter center = parse_center(center_name);

  std::optional<bhep::ImputationMethod> method;
  if (method_name != "complete-case") {
    method = bhep::ImputationMethod::parse(method_name);
    if (!method) {
      throw bhep::InvalidConfig("unknown method '" + method_name + "'");
    }
    if (method->kind == bhep::ImputationMethod::Kind::Knn &&
        knn_aggregate == "median") {
      method->aggregate = bhep::KnnAggregate::Median;
    }
  }

  nlohmann::json out;
  out["input"] = input;
  out["header"] = header;
  out["method"] = method_name;
  out["alpha"] = alpha;
  out["seed"] = seed;
  out["naive"] = naive;
  out["sigma_center"] = center_name;
  out["n"] = data.rows();
  out["n_hat"] = bhep::complete_cases(data).n_hat;

  if (naive) {
    // Fixed null-quantile route, as if the (imputed or reduced) data were a
    // complete sample.
    double statistic = 0.0;
    Eigen::Index effective_n = 0;
    if (method) {
      statistic = bhep::bhep_statistic(bhep::impute(data, *method)).statistic;
      effective_n = data.rows();
    } else {
      const bhep::BhepValue value = bhep::bhep_complete_case(data);
      statistic = value.statistic;
      effective_n = value.n_used;
    }
    const bhep::RngStream table_rng(seed, bhep::stable_hash("cli-null-table"));
    const std::vector<double> draws = bhep::null_statistic_draws(
        effective_n, static_cast<int>(data.cols()), table_draws, table_rng);
    std::size_t at_least = 0;
    for (double v : draws) {
      if (v >= statistic) ++at_least;
    }
    out["statistic"] = statistic;
    out["p_value"] = static_cast<double>(1 + at_least) / (draws.size() + 1);
    out["reject"] = statistic > bhep::empirical_quantile(draws, 1.0 - alpha);
    out["table_draws"] = table_draws;
    out["table_n"] = effective_n;
  } else {
    bhep::BootstrapConfig cfg;
    cfg.B = B;
    cfg.alpha = alpha;
    cfg.master_seed = seed;
    cfg.family = mechanism == "row-value" ? bhep::MissingnessFamily::RowThenValue
                                          : bhep::MissingnessFamily::PerColumn;
    cfg.sigma_center = center;
    const bhep::RngStream rng(seed, 0);
    const bhep::TestOutcome outcome =
        method ? bhep::bootstrap_test(data, *method, cfg, rng)
               : bhep::bootstrap_test_complete_case(data, cfg, rng);
    out["statistic"] = outcome.statistic;
    out["p_value"] = outcome.p_value;
    out["reject"] = outcome.reject;
    out["B"] = B;
    out["cycles_used"] = outcome.cycles_used;
    out["cycles_failed"] = outcome.cycles_failed;
    out["mechanism"] = outcome.mechanism;
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_ampute(const std::string& input, bool header, const std::string& mechanism,
               const std::vector<double>& probs,
               const std::optional<std::uint64_t>& seed_flag, const std::string& output) {
  const std::uint64_t seed = effective_seed(seed_flag);
  const bhep::IncompleteMatrix data = bhep::read_csv(input, header);
  if (!data.is_fully_observed()) {
    throw bhep::InvalidConfig("ampute expects a fully observed input CSV");
  }
  const bhep::MissingnessSpec spec = spec_from_probs(mechanism, probs, data.cols());
  bhep::RngStream rng(seed, 0);
  const bhep::IncompleteMatrix amputed = bhep::ampute_mcar(data.values, spec, rng);
  bhep::write_csv(amputed, output);

  nlohmann::json out;
  out["input"] = input;
  out["output"] = output;
  out["mechanism"] = spec.label();
  out["seed"] = seed;
  out["n"] = amputed.rows();
  out["d"] = amputed.cols();
  out["missing"] = amputed.missing_count();
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_null_table(int n, int d, int draws, const std::vector<double>& levels,
                   const std::optional<std::uint64_t>& seed_flag,
                   const std::string& output) {
  const std::uint64_t seed = effective_seed(seed_flag);
  const bhep::RngStream rng(seed, 0);
  const bhep::NullQuantileTable table = bhep::null_quantile_table(n, d, levels, draws, rng);
  if (output.empty()) {
    std::cout << table.to_json() << '\n';
  } else {
    std::ofstream file(output);
    if (!file) throw std::runtime_error("cannot open '" + output + "' for writing");
    file << table.to_json() << '\n';
    nlohmann::json echo;
    echo["output"] = output;
    echo["n"] = n;
    echo["d"] = d;
    echo["M"] = draws;
    echo["seed"] = seed;
    std::cout << echo.dump() << '\n';
  }
  return 0;
}

void write_figures(const std::vector<bhep::ResultRow>& rows,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& figure : bhep::emit_figure_data(rows)) {
    std::ofstream csv(dir / (figure.id + ".csv"));
    bhep::write_figure_csv(figure, csv);
    std::ofstream svg(dir / (figure.id + ".svg"));
    bhep::write_figure_svg(figure, svg);
  }
}

int cmd_power_study(const std::string& config_path, const std::string& out_dir,
                    int parallel, bool full_scale) {
  std::ifstream config_file(config_path);
  if (!config_file) {
    throw bhep::InvalidConfig("cannot open config '" + config_path + "'");
  }
  std::stringstream buffer;
  buffer << config_file.rdbuf();
  std::vector<bhep::ExperimentConfig> grid = bhep::parse_grid_config(buffer.str());
  if (full_scale) {
    for (auto& cell : grid) {
      cell.N = 2000;
      cell.B = 1000;
    }
  }

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const auto results = bhep::run_grid(grid, parallel);
  {
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw std::runtime_error("cannot write results.csv");
    bhep::write_results_csv(results, csv);
  }
  write_figures(bhep::to_result_rows(results), dir / "figures");

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = nlohmann::json::parse(buffer.str());
  manifest["full_scale"] = full_scale;
  manifest["seed"] = grid.empty() ? 0 : grid.front().master_seed;
  manifest["cells"] = results.size();
  int failed_cells = 0;
  for (const auto& r : results) {
    if (std::isnan(r.rejection_rate)) ++failed_cells;
  }
  manifest["failed_cells"] = failed_cells;
  {
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
  }
  std::cout << nlohmann::json{{"out", out_dir}, {"cells", results.size()}}.dump() << '\n';
  return 0;
}

int cmd_figure_data(const std::string& results_path, const std::string& out_dir) {
  std::ifstream in(results_path);
  if (!in) throw bhep::InvalidConfig("cannot open results '" + results_path + "'");
  const auto rows = bhep::parse_results_csv(in);
  write_figures(rows, out_dir);
  std::cout << nlohmann::json{{"out", out_dir}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BHEP multivariate normality testing with missing data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // test ---------------------------------------------------------------
  auto* test = app.add_subcommand("test", "Run the test on one CSV dataset");
  std::string test_input;
  bool test_header = false;
  std::string test_method = "mean";
  double test_alpha = 0.05;
  int test_B = 1000;
  std::optional<std::uint64_t> test_seed;
  bool test_naive = false;
  std::string test_mechanism = "per-column";
  std::string test_center = "complete-case";
  int test_table_draws = 10000;
  std::string test_knn_aggregate = "mean";
  test->add_option("--input", test_input, "Input CSV")->required();
  test->add_flag("--header", test_header, "Skip one header line");
  test->add_option("--method", test_method,
                   "complete-case | mean | median | knn<k>");
  test->add_option("--alpha", test_alpha, "Significance level");
  test->add_option("--B", test_B, "Bootstrap cycles");
  test->add_option("--seed", test_seed, "Master seed (else BHEP_SEED, else default)");
  test->add_flag("--naive", test_naive,
                 "Skip the bootstrap and compare against complete-data null quantiles");
  test->add_option("--mechanism", test_mechanism,
                   "Missingness family for the bootstrap: per-column | row-value");
  test->add_option("--sigma-center", test_center, "complete-case | available-case");
  test->add_option("--table-draws", test_table_draws, "Null-table size for --naive");
  test->add_option("--knn-aggregate", test_knn_aggregate,
                   "Donor aggregation for knn: mean | median");

  // ampute -------------------------------------------------------------
  auto* ampute = app.add_subcommand("ampute", "Apply an MCAR mechanism to a CSV");
  std::string ampute_input;
  bool ampute_header = false;
  std::string ampute_mechanism = "per-column";
  std::vector<double> ampute_probs;
  std::optional<std::uint64_t> ampute_seed;
  std::string ampute_out;
  ampute->add_option("--input", ampute_input, "Input CSV")->required();
  ampute->add_flag("--header", ampute_header, "Skip one header line");
  ampute->add_option("--mechanism", ampute_mechanism, "per-column | row-value");
  ampute->add_option("--probs", ampute_probs,
                     "per-column: q (1 value or per column); row-value: p_row,p_value")
      ->required()
      ->delimiter(',');
  ampute->add_option("--seed", ampute_seed, "Master seed");
  ampute->add_option("--out", ampute_out, "Output CSV")->required();

  // null-table ----------------------------------------------------------
  auto* table = app.add_subcommand("null-table", "Simulate null quantiles of the statistic");
  int table_n = 0;
  int table_d = 0;
  int table_M = 10000;
  std::vector<double> table_levels{0.5, 0.9, 0.95, 0.99};
  std::optional<std::uint64_t> table_seed;
  std::string table_out;
  table->add_option("--n", table_n, "Sample size")->required();
  table->add_option("--d", table_d, "Dimension")->required();
  table->add_option("--M", table_M, "Monte Carlo draws (>= 1000)");
  table->add_option("--levels", table_levels, "Quantile levels")->delimiter(',');
  table->add_option("--seed", table_seed, "Master seed");
  table->add_option("--out", table_out, "Write JSON here instead of stdout");

  // power-study -----------------------------------------------------------
  auto* study = app.add_subcommand("power-study", "Run a Monte Carlo experiment grid");
  std::string study_config;
  std::string study_out;
  int study_parallel = 1;
  bool study_full = false;
  study->add_option("--config", study_config, "Grid JSON")->required();
  study->add_option("--out", study_out, "Output directory")->required();
  study->add_option("--parallel", study_parallel, "Worker threads");
  study->add_flag("--full-scale", study_full, "Override to N=2000, B=1000");

  // figure-data ------------------------------------------------------------
  auto* figures = app.add_subcommand("figure-data", "Rebuild figures from a results CSV");
  std::string figures_results;
  std::string figures_out;
  figures->add_option("--results", figures_results, "results.csv from power-study")
      ->required();
  figures->add_option("--out", figures_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) {
      return cmd_test(test_input, test_header, test_method, test_alpha, test_B,
                      test_seed, test_naive, test_mechanism, test_center,
                      test_table_draws, test_knn_aggregate);
    }
    if (*ampute) {
      return cmd_ampute(ampute_input, ampute_header, ampute_mechanism, ampute_probs,
                        ampute_seed, ampute_out);
    }
    if (*table) {
      return cmd_null_table(table_n, table_d, table_M, table_levels, table_seed,
                            table_out);
    }
    if (*study) {
      return cmd_power_study(study_config, study_out, study_parallel, study_full);
    }
    if (*figures) {
      return cmd_figure_data(figures_results, figures_out);
    }
  } catch (const bhep::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::RaggedRows& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::EmptyColumn& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::NoDonor& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::TooFewRows& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::TooFewCompleteCases& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::SingularCovariance& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bhep::DegenerateBootstrap& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
