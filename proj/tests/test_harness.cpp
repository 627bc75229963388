#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "bhep/harness.hpp"

using namespace bhep;

namespace {

ExperimentConfig base_cell() {
  ExperimentConfig cfg;
  cfg.distribution =
      NormalModel{GaussianParams(Vector::Zero(2), Matrix::Identity(2, 2)), "identity"};
  cfg.n = 30;
  cfg.d = 2;
  cfg.missingness = MissingnessSpec{PerColumn{Vector::Constant(2, 0.9)}};
  cfg.approach = Approach::imputed(ImputationMethod::mean());
  cfg.N = 40;
  cfg.B = 40;
  cfg.alpha = 0.05;
  cfg.master_seed = 61;
  return cfg;
}

}  // namespace

TEST_CASE("approach parsing covers every route") {
  CHECK(Approach::parse("complete-case")->kind == Approach::Kind::CompleteCase);
  CHECK(Approach::parse("mean")->kind == Approach::Kind::Imputed);
  CHECK(Approach::parse("median")->method->kind == ImputationMethod::Kind::Median);
  CHECK(Approach::parse("knn3")->method->k == 3);
  const auto naive = Approach::parse("naive-mean");
  REQUIRE(naive.has_value());
  CHECK(naive->kind == Approach::Kind::NaiveImputed);
  CHECK(naive->label() == "naive-mean");
  CHECK_FALSE(Approach::parse("naive-").has_value());
  CHECK_FALSE(Approach::parse("bogus").has_value());
}

TEST_CASE("grid of one equals run_cell") {
  const ExperimentConfig cfg = base_cell();
  const ExperimentResult single = run_cell(cfg, 2);
  const auto grid = run_grid({cfg}, 2);
  REQUIRE(grid.size() == 1);
  CHECK(grid[0].rejection_rate == single.rejection_rate);
  CHECK(grid[0].replicates_failed == single.replicates_failed);
  CHECK(grid[0].decisions == single.decisions);
}

TEST_CASE("results are independent of parallelism and rerun") {
  ExperimentConfig cfg = base_cell();
  cfg.N = 24;
  std::vector<ExperimentConfig> grid{cfg};
  ExperimentConfig cc = cfg;
  cc.approach = Approach::complete_case();
  grid.push_back(cc);
  ExperimentConfig naive = cfg;
  naive.approach = Approach::naive(ImputationMethod::mean());
  naive.naive_table_draws = 1000;
  grid.push_back(naive);

  std::ostringstream serial;
  write_results_csv(run_grid(grid, 1), serial);
  std::ostringstream parallel;
  write_results_csv(run_grid(grid, 8), parallel);
  std::ostringstream again;
  write_results_csv(run_grid(grid, 8), again);
  CHECK(serial.str() == parallel.str());
  CHECK(parallel.str() == again.str());
}

TEST_CASE("zero missingness aligns decisions across bootstrap approaches") {
  ExperimentConfig cfg = base_cell();
  cfg.missingness = MissingnessSpec{PerColumn{Vector::Constant(2, 1.0)}};
  cfg.N = 25;
  std::vector<ExperimentConfig> grid;
  for (const char* name : {"complete-case", "mean", "median", "knn3", "knn6"}) {
    ExperimentConfig cell = cfg;
    cell.approach = *Approach::parse(name);
    grid.push_back(cell);
  }
  const auto results = run_grid(grid, 2);
  for (std::size_t i = 1; i < results.size(); ++i) {
    CHECK(results[i].decisions == results[0].decisions);
  }
}

TEST_CASE("nominal size at a desk-scale null cell") {
  ExperimentConfig cfg = base_cell();
  cfg.n = 60;
  cfg.missingness = MissingnessSpec{PerColumn{Vector::Constant(2, 1.0)}};
  cfg.approach = Approach::complete_case();
  cfg.N = 200;
  cfg.B = 100;
  const ExperimentResult result = run_cell(cfg, 2);
  CHECK(result.replicates_failed == 0);
  CHECK(result.rejection_rate > 0.01);
  CHECK(result.rejection_rate < 0.10);
  CHECK(result.standard_error ==
        doctest::Approx(std::sqrt(result.rejection_rate *
                                  (1.0 - result.rejection_rate) / cfg.N)));
}

TEST_CASE("csv round-trips through the row parser") {
  ExperimentConfig cfg = base_cell();
  cfg.N = 10;
  ExperimentConfig t_cell = cfg;
  t_cell.distribution = StudentTModel{5, Matrix::Identity(2, 2), "identity"};
  const auto results = run_grid({cfg, t_cell}, 2);
  std::ostringstream csv;
  write_results_csv(results, csv);
  std::istringstream in(csv.str());
  const auto rows = parse_results_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].distribution == "normal-identity-d2");
  CHECK(rows[1].distribution == "t5-identity-d2");
  CHECK(rows[0].n == 30);
  CHECK(rows[0].approach == "mean");
  CHECK(rows[0].rate == results[0].rejection_rate);
}

TEST_CASE("figure emission groups series and checks completeness") {
  std::vector<ResultRow> rows;
  for (const char* approach : {"complete-case", "mean", "median", "knn3", "knn6"}) {
    for (int n : {30, 60, 90, 120}) {
      rows.push_back({"normal-identity-d2", "per-column(0.9;0.9)", approach, n,
                      0.05, 0.01});
    }
  }
  const auto figures = emit_figure_data(rows);
  REQUIRE(figures.size() == 1);
  CHECK(figures[0].id == "normal-identity-d2");
  CHECK(figures[0].series.size() == 5);
  for (const auto& series : figures[0].series) {
    CHECK(series.ns == std::vector<int>{30, 60, 90, 120});
  }
  std::ostringstream csv;
  write_figure_csv(figures[0], csv);
  int lines = 0;
  std::string line;
  std::istringstream read(csv.str());
  while (std::getline(read, line)) ++lines;
  CHECK(lines == 1 + 5 * 4);  // header + methods x sample sizes

  CHECK_THROWS_AS(emit_figure_data(std::vector<ResultRow>{}), IncompleteGrid);
  rows.pop_back();
  CHECK_THROWS_AS(emit_figure_data(rows), IncompleteGrid);
}

TEST_CASE("figure series are qualified when several mechanisms share a figure") {
  std::vector<ResultRow> rows;
  for (const char* miss : {"row-value(0.1;0.1)", "row-value(0.3;0.3)"}) {
    for (int n : {30, 60}) {
      rows.push_back({"normal-identity-d2", miss, "naive-mean", n, 0.2, 0.01});
    }
  }
  const auto figures = emit_figure_data(rows);
  REQUIRE(figures.size() == 1);
  REQUIRE(figures[0].series.size() == 2);
  CHECK(figures[0].series[0].label == "naive-mean row-value(0.1;0.1)");
  CHECK(figures[0].series[1].label == "naive-mean row-value(0.3;0.3)");
}

TEST_CASE("svg output is a plausible chart") {
  std::vector<ResultRow> rows;
  for (int n : {30, 60, 90}) {
    rows.push_back({"normal-identity-d2", "per-column(0.9;0.9)", "mean", n, 0.04 + n * 1e-4,
                    0.01});
  }
  const auto figure = emit_figure_data(rows, "normal-identity-d2");
  std::ostringstream svg;
  write_figure_svg(figure, svg);
  const std::string text = svg.str();
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("<polyline") != std::string::npos);
  CHECK(text.find("mean") != std::string::npos);
  CHECK(text.find("rejection rate") != std::string::npos);
}

TEST_CASE("grid config parsing expands the cross product") {
  const std::string config = R"({
    "seed": 77,
    "N": 10,
    "B": 20,
    "alpha": 0.05,
    "distributions": [
      {"type": "normal", "d": 2},
      {"type": "t", "dof": 5, "d": 2, "scale": "sigma1"}
    ],
    "ns": [30, 60],
    "missingness": [
      {"mechanism": "per-column", "q": 0.9},
      {"mechanism": "row-value", "p_row": 0.3, "p_value": 0.3}
    ],
    "approaches": ["complete-case", "mean", "naive-mean"]
  })";
  const auto grid = parse_grid_config(config);
  CHECK(grid.size() == 2 * 2 * 2 * 3);
  CHECK(grid[0].master_seed == 77);
  CHECK(grid[0].N == 10);
  CHECK(std::get<NormalModel>(grid[0].distribution).cov_label == "identity");
  const auto& t_cell = grid[grid.size() - 1];
  CHECK(std::get<StudentTModel>(t_cell.distribution).dof == 5);
  CHECK(std::get<StudentTModel>(t_cell.distribution).scale_label == "sigma1");
}

TEST_CASE("grid config errors name the offending field") {
  CHECK_THROWS_AS(parse_grid_config("not json"), InvalidConfig);
  CHECK_THROWS_AS(parse_grid_config(R"({"seed": 1})"), InvalidConfig);
  const std::string bad_approach = R"({
    "seed": 1, "N": 5, "B": 5,
    "distributions": [{"type": "normal", "d": 2}],
    "ns": [30],
    "missingness": [{"mechanism": "per-column", "q": 0.9}],
    "approaches": ["banana"]
  })";
  CHECK_THROWS_AS(parse_grid_config(bad_approach), InvalidConfig);
  const std::string bad_sigma = R"({
    "seed": 1, "N": 5, "B": 5,
    "distributions": [{"type": "normal", "d": 2, "cov": "sigma2"}],
    "ns": [30],
    "missingness": [{"mechanism": "per-column", "q": 0.9}],
    "approaches": ["mean"]
  })";
  CHECK_THROWS_AS(parse_grid_config(bad_sigma), InvalidConfig);
}

TEST_CASE("invalid cells are reported but the grid continues") {
  ExperimentConfig good = base_cell();
  good.N = 6;
  ExperimentConfig bad = good;
  bad.missingness = MissingnessSpec{PerColumn{Vector::Constant(3, 0.9)}};  // wrong d
  const auto results = run_grid({bad, good}, 2);
  REQUIRE(results.size() == 2);
  CHECK(std::isnan(results[0].rejection_rate));
  CHECK(results[0].replicates_failed == bad.N);
  CHECK_FALSE(std::isnan(results[1].rejection_rate));
}

TEST_CASE("run_cell propagates config validation") {
  ExperimentConfig cfg = base_cell();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(run_cell(cfg, 1), InvalidConfig);
  cfg = base_cell();
  cfg.approach = Approach{Approach::Kind::Imputed, std::nullopt};
  CHECK_THROWS_AS(run_cell(cfg, 1), InvalidConfig);
}

TEST_CASE("covariance labels build the expected matrices") {
  const Matrix s1 = covariance_by_label("sigma1", 2);
  CHECK(s1(0, 1) == 0.5);
  const Matrix s2 = covariance_by_label("sigma2", 3);
  CHECK(s2(2, 0) == 0.5);
  CHECK(s2(1, 1) == 1.0);
  CHECK_THROWS_AS(covariance_by_label("sigma1", 3), InvalidConfig);
  CHECK_THROWS_AS(covariance_by_label("wat", 2), InvalidConfig);
}
