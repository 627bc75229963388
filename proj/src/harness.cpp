#include "bhep/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace bhep {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  (void)ec;
  return std::string(buffer, ptr);
}

// Bounded worker pool over a pre-indexed work list. Results must be written
// to index-addressed slots so the schedule cannot affect output.
void parallel_for(std::size_t count, int parallelism,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const int workers = std::clamp<int>(parallelism, 1,
                                      static_cast<int>(std::min<std::size_t>(count, 256)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::uint64_t stable_hash(const std::string& key) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Matrix covariance_by_label(const std::string& label, int d) {
  if (label == "identity") return Matrix::Identity(d, d);
  if (label == "sigma1") {
    if (d != 2) throw InvalidConfig("covariance 'sigma1' is 2x2 but d=" + std::to_string(d));
    Matrix s(2, 2);
    s << 1.0, 0.5, 0.5, 1.0;
    return s;
  }
  if (label == "sigma2") {
    if (d != 3) throw InvalidConfig("covariance 'sigma2' is 3x3 but d=" + std::to_string(d));
    Matrix s = Matrix::Constant(3, 3, 0.5);
    s.diagonal().setOnes();
    return s;
  }
  throw InvalidConfig("unknown covariance label '" + label + "'");
}

std::string distribution_label(const Distribution& dist) {
  if (const auto* normal = std::get_if<NormalModel>(&dist)) {
    return "normal-" + normal->cov_label + "-d" + std::to_string(normal->params.dim());
  }
  const auto& t = std::get<StudentTModel>(dist);
  return "t" + std::to_string(t.dof) + "-" + t.scale_label + "-d" +
         std::to_string(t.scale.rows());
}

int distribution_dim(const Distribution& dist) {
  if (const auto* normal = std::get_if<NormalModel>(&dist)) {
    return static_cast<int>(normal->params.dim());
  }
  return static_cast<int>(std::get<StudentTModel>(dist).scale.rows());
}

std::optional<Approach> Approach::parse(const std::string& name) {
  if (name == "complete-case") return complete_case();
  if (name.rfind("naive-", 0) == 0) {
    const auto method = ImputationMethod::parse(name.substr(6));
    if (!method) return std::nullopt;
    return naive(*method);
  }
  const auto method = ImputationMethod::parse(name);
  if (!method) return std::nullopt;
  return imputed(*method);
}

std::string Approach::label() const {
  switch (kind) {
    case Kind::CompleteCase:
      return "complete-case";
    case Kind::Imputed:
      return method->label();
    case Kind::NaiveImputed:
      return "naive-" + method->label();
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (n < 1) throw InvalidConfig("cell: n must be >= 1");
  if (d < 1) throw InvalidConfig("cell: d must be >= 1");
  if (N < 1) throw InvalidConfig("cell: N must be >= 1");
  if (B < 1) throw InvalidConfig("cell: B must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidConfig("cell: alpha must lie in (0, 1]");
  if (distribution_dim(distribution) != d) {
    throw InvalidConfig("cell: distribution dimension does not match d");
  }
  missingness.validate(d);
  if (approach.kind != Approach::Kind::CompleteCase && !approach.method) {
    throw InvalidConfig("cell: imputation approach needs a method");
  }
  if (approach.kind == Approach::Kind::NaiveImputed && naive_table_draws < 1000) {
    throw InvalidConfig("cell: naive_table_draws must be >= 1000");
  }
}

std::string ExperimentConfig::data_key() const {
  // Data-generating axes only. Cells that differ only in approach, alpha or
  // sigma_center replay the same samples and bootstrap streams.
  return "dist=" + distribution_label(distribution) + "|n=" + std::to_string(n) +
         "|d=" + std::to_string(d) + "|miss=" + missingness.label() +
         "|B=" + std::to_string(B);
}

namespace {

MissingnessFamily family_of(const MissingnessSpec& spec) {
  return std::holds_alternative<PerColumn>(spec.mechanism)
             ? MissingnessFamily::PerColumn
             : MissingnessFamily::RowThenValue;
}

Matrix draw_sample(const Distribution& dist, int n, RngStream& rng) {
  if (const auto* normal = std::get_if<NormalModel>(&dist)) {
    return sample_mvn(normal->params, n, rng);
  }
  const auto& t = std::get<StudentTModel>(dist);
  return sample_mvt(t.dof, t.scale, n, rng);
}

std::uint64_t naive_table_stream(int n, int d, int draws) {
  return stable_hash("null-table|n=" + std::to_string(n) + "|d=" + std::to_string(d) +
                     "|M=" + std::to_string(draws));
}

// Decision for replicate i of one cell; throws on statistic preconditions.
bool run_replicate(const ExperimentConfig& cfg, std::uint64_t data_hash, int i,
                   double naive_threshold) {
  const std::uint64_t base =
      data_hash + static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cfg.B + 1);
  RngStream data_rng(cfg.master_seed, base);
  const Matrix sample = draw_sample(cfg.distribution, cfg.n, data_rng);
  const IncompleteMatrix incomplete = ampute_mcar(sample, cfg.missingness, data_rng);

  if (cfg.approach.kind == Approach::Kind::NaiveImputed) {
    const Matrix imputed = impute(incomplete, *cfg.approach.method);
    return bhep_statistic(imputed).statistic > naive_threshold;
  }

  BootstrapConfig bcfg;
  bcfg.B = cfg.B;
  bcfg.alpha = cfg.alpha;
  bcfg.master_seed = cfg.master_seed;
  bcfg.family = family_of(cfg.missingness);
  bcfg.sigma_center = cfg.sigma_center;
  const RngStream block(cfg.master_seed, base);
  if (cfg.approach.kind == Approach::Kind::CompleteCase) {
    return bootstrap_test_complete_case(incomplete, bcfg, block).reject;
  }
  return bootstrap_test(incomplete, *cfg.approach.method, bcfg, block).reject;
}

struct CellState {
  ExperimentConfig config;
  double naive_threshold = 0.0;
  std::vector<std::int8_t> decisions;
  std::vector<double> seconds;
  std::string error;  // nonempty if the whole cell is unusable
};

void run_one(CellState& cell, int i) {
  const std::uint64_t data_hash = stable_hash(cell.config.data_key());
  const auto start = std::chrono::steady_clock::now();
  try {
    cell.decisions[i] =
        run_replicate(cell.config, data_hash, i, cell.naive_threshold) ? 1 : 0;
  } catch (const TooFewRows&) {
    cell.decisions[i] = -1;
  } catch (const TooFewCompleteCases&) {
    cell.decisions[i] = -1;
  } catch (const SingularCovariance&) {
    cell.decisions[i] = -1;
  } catch (const EmptyColumn&) {
    cell.decisions[i] = -1;
  } catch (const NoDonor&) {
    cell.decisions[i] = -1;
  } catch (const DegenerateBootstrap&) {
    cell.decisions[i] = -1;
  }
  cell.seconds[i] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ExperimentResult assemble(CellState&& cell) {
  ExperimentResult result;
  result.config = std::move(cell.config);
  result.decisions = std::move(cell.decisions);
  int rejected = 0;
  int failed = 0;
  for (std::int8_t decision : result.decisions) {
    if (decision < 0) {
      ++failed;
    } else if (decision > 0) {
      ++rejected;
    }
  }
  const int successful = static_cast<int>(result.decisions.size()) - failed;
  result.replicates_failed = failed;
  for (double s : cell.seconds) result.wall_seconds += s;
  if (!cell.error.empty() || successful == 0) {
    result.rejection_rate = std::numeric_limits<double>::quiet_NaN();
    result.standard_error = std::numeric_limits<double>::quiet_NaN();
    result.replicates_failed = static_cast<int>(result.decisions.size());
    return result;
  }
  result.rejection_rate = static_cast<double>(rejected) / successful;
  result.standard_error =
      std::sqrt(result.rejection_rate * (1.0 - result.rejection_rate) / successful);
  return result;
}

// Sorted null draws shared by naive cells with the same (n, d, M); keyed
// off the master seed so distinct seeds do not mix.
using TableKey = std::tuple<int, int, int, std::uint64_t>;

std::vector<double> compute_null_draws(const ExperimentConfig& cfg) {
  const RngStream base(cfg.master_seed,
                       naive_table_stream(cfg.n, cfg.d, cfg.naive_table_draws));
  return null_statistic_draws(cfg.n, cfg.d, cfg.naive_table_draws, base);
}

}  // namespace

ExperimentResult run_cell(const ExperimentConfig& cfg, int parallelism) {
  cfg.validate();
  CellState cell;
  cell.config = cfg;
  cell.decisions.assign(cfg.N, -1);
  cell.seconds.assign(cfg.N, 0.0);
  if (cfg.approach.kind == Approach::Kind::NaiveImputed) {
    cell.naive_threshold = empirical_quantile(compute_null_draws(cfg), 1.0 - cfg.alpha);
  }
  parallel_for(static_cast<std::size_t>(cfg.N), parallelism,
               [&](std::size_t i) { run_one(cell, static_cast<int>(i)); });
  ExperimentResult result = assemble(std::move(cell));
  if (std::isnan(result.rejection_rate)) {
    throw AllReplicatesFailed("every replicate failed its preconditions");
  }
  return result;
}

std::vector<ExperimentResult> run_grid(const std::vector<ExperimentConfig>& configs,
                                       int parallelism) {
  if (configs.empty()) throw InvalidConfig("run_grid: empty grid");

  std::vector<CellState> cells(configs.size());
  std::map<TableKey, double> naive_thresholds;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    cells[c].config = configs[c];
    try {
      configs[c].validate();
      if (configs[c].approach.kind == Approach::Kind::NaiveImputed) {
        const TableKey key{configs[c].n, configs[c].d, configs[c].naive_table_draws,
                           configs[c].master_seed};
        auto found = naive_thresholds.find(key);
        if (found == naive_thresholds.end()) {
          const auto draws = compute_null_draws(configs[c]);
          found = naive_thresholds
                      .emplace(key, empirical_quantile(draws, 1.0 - configs[c].alpha))
                      .first;
        }
        cells[c].naive_threshold = found->second;
      }
    } catch (const InvalidConfig& e) {
      cells[c].error = e.what();
    }
    const int n_reps = std::max(configs[c].N, 0);
    cells[c].decisions.assign(n_reps, -1);
    cells[c].seconds.assign(n_reps, 0.0);
  }

  // Flatten (cell, replicate) pairs into one schedule-independent work list;
  // cells that failed validation keep their all-failed decision vectors.
  std::vector<std::pair<std::size_t, int>> items;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].error.empty()) continue;
    for (int i = 0; i < static_cast<int>(cells[c].decisions.size()); ++i) {
      items.emplace_back(c, i);
    }
  }
  parallel_for(items.size(), parallelism, [&](std::size_t t) {
    run_one(cells[items[t].first], items[t].second);
  });

  std::vector<ExperimentResult> results;
  results.reserve(cells.size());
  for (auto& cell : cells) results.push_back(assemble(std::move(cell)));
  return results;
}

std::string results_csv_header() {
  return "distribution,dof,cov,d,n,missingness,approach,N,B,alpha,seed,sigma_center,"
         "rejection_rate,std_error,failed";
}

void write_results_csv(const std::vector<ExperimentResult>& results, std::ostream& out) {
  out << results_csv_header() << '\n';
  for (const auto& r : results) {
    const auto& cfg = r.config;
    if (const auto* normal = std::get_if<NormalModel>(&cfg.distribution)) {
      out << "normal,0," << normal->cov_label;
    } else {
      const auto& t = std::get<StudentTModel>(cfg.distribution);
      out << "t," << t.dof << ',' << t.scale_label;
    }
    out << ',' << cfg.d << ',' << cfg.n << ',' << cfg.missingness.label() << ','
        << cfg.approach.label() << ',' << cfg.N << ',' << cfg.B << ','
        << format_double(cfg.alpha) << ',' << cfg.master_seed << ','
        << sigma_center_label(cfg.sigma_center) << ',' << format_double(r.rejection_rate)
        << ',' << format_double(r.standard_error) << ',' << r.replicates_failed << '\n';
  }
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const std::string& name) {
  if (!j.contains(name)) throw InvalidConfig("config: missing field '" + name + "'");
  return j.at(name);
}

Matrix parse_covariance(const nlohmann::json& j, int d, std::string& label_out) {
  if (j.is_string()) {
    label_out = j.get<std::string>();
    return covariance_by_label(label_out, d);
  }
  if (j.is_array()) {
    label_out = "custom";
    Matrix cov(d, d);
    if (static_cast<int>(j.size()) != d) {
      throw InvalidConfig("config: covariance matrix must be d x d");
    }
    for (int r = 0; r < d; ++r) {
      if (static_cast<int>(j.at(r).size()) != d) {
        throw InvalidConfig("config: covariance matrix must be d x d");
      }
      for (int c = 0; c < d; ++c) cov(r, c) = j.at(r).at(c).get<double>();
    }
    return cov;
  }
  throw InvalidConfig("config: covariance must be a label or a matrix");
}

Distribution parse_distribution(const nlohmann::json& j) {
  const std::string type = require_field(j, "type").get<std::string>();
  const int d = require_field(j, "d").get<int>();
  if (d < 1) throw InvalidConfig("config: distributions[].d must be >= 1");
  if (type == "normal") {
    std::string label = "identity";
    Matrix cov = Matrix::Identity(d, d);
    if (j.contains("cov")) cov = parse_covariance(j.at("cov"), d, label);
    Vector mu = Vector::Zero(d);
    if (j.contains("mean")) {
      const auto& m = j.at("mean");
      if (static_cast<int>(m.size()) != d) {
        throw InvalidConfig("config: distributions[].mean must have length d");
      }
      for (int k = 0; k < d; ++k) mu[k] = m.at(k).get<double>();
    }
    return NormalModel{GaussianParams(std::move(mu), std::move(cov)), label};
  }
  if (type == "t") {
    const int dof = require_field(j, "dof").get<int>();
    if (dof < 1) throw InvalidConfig("config: distributions[].dof must be >= 1");
    std::string label = "identity";
    Matrix scale = Matrix::Identity(d, d);
    if (j.contains("scale")) scale = parse_covariance(j.at("scale"), d, label);
    return StudentTModel{dof, std::move(scale), label};
  }
  throw InvalidConfig("config: distributions[].type must be 'normal' or 't'");
}

MissingnessSpec parse_missingness(const nlohmann::json& j, int d) {
  const std::string mechanism = require_field(j, "mechanism").get<std::string>();
  if (mechanism == "per-column") {
    const auto& q = require_field(j, "q");
    Vector probs(d);
    if (q.is_number()) {
      probs.setConstant(q.get<double>());
    } else if (q.is_array()) {
      if (static_cast<int>(q.size()) != d) {
        throw InvalidConfig("config: missingness[].q must have length d");
      }
      for (int k = 0; k < d; ++k) probs[k] = q.at(k).get<double>();
    } else {
      throw InvalidConfig("config: missingness[].q must be a number or an array");
    }
    return MissingnessSpec{PerColumn{std::move(probs)}};
  }
  if (mechanism == "row-value") {
    return MissingnessSpec{RowThenValue{require_field(j, "p_row").get<double>(),
                                        require_field(j, "p_value").get<double>()}};
  }
  throw InvalidConfig("config: missingness[].mechanism must be 'per-column' or 'row-value'");
}

}  // namespace

std::vector<ExperimentConfig> parse_grid_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig base;
  base.master_seed = require_field(j, "seed").get<std::uint64_t>();
  base.N = require_field(j, "N").get<int>();
  base.B = require_field(j, "B").get<int>();
  base.alpha = j.value("alpha", 0.05);
  if (j.contains("sigma_center")) {
    const std::string center = j.at("sigma_center").get<std::string>();
    if (center == "complete-case") {
      base.sigma_center = SigmaCenter::CompleteCase;
    } else if (center == "available-case") {
      base.sigma_center = SigmaCenter::AvailableCase;
    } else {
      throw InvalidConfig("config: sigma_center must be 'complete-case' or 'available-case'");
    }
  }
  base.naive_table_draws = j.value("naive_table_draws", 10000);

  const auto& distributions = require_field(j, "distributions");
  const auto& ns = require_field(j, "ns");
  const auto& missingness = require_field(j, "missingness");
  const auto& approaches = require_field(j, "approaches");
  if (!distributions.is_array() || distributions.empty()) {
    throw InvalidConfig("config: distributions must be a nonempty array");
  }
  if (!ns.is_array() || ns.empty()) throw InvalidConfig("config: ns must be a nonempty array");
  if (!missingness.is_array() || missingness.empty()) {
    throw InvalidConfig("config: missingness must be a nonempty array");
  }
  if (!approaches.is_array() || approaches.empty()) {
    throw InvalidConfig("config: approaches must be a nonempty array");
  }

  std::vector<ExperimentConfig> grid;
  for (const auto& dist_json : distributions) {
    Distribution dist = parse_distribution(dist_json);
    const int d = distribution_dim(dist);
    for (const auto& n_json : ns) {
      const int n = n_json.get<int>();
      for (const auto& miss_json : missingness) {
        const MissingnessSpec spec = parse_missingness(miss_json, d);
        for (const auto& approach_json : approaches) {
          const std::string name = approach_json.get<std::string>();
          const auto approach = Approach::parse(name);
          if (!approach) {
            throw InvalidConfig("config: unknown approach '" + name + "'");
          }
          ExperimentConfig cfg = base;
          cfg.distribution = dist;
          cfg.n = n;
          cfg.d = d;
          cfg.missingness = spec;
          cfg.approach = *approach;
          cfg.validate();
          grid.push_back(std::move(cfg));
        }
      }
    }
  }
  return grid;
}

std::vector<ResultRow> to_result_rows(const std::vector<ExperimentResult>& results) {
  std::vector<ResultRow> rows;
  rows.reserve(results.size());
  for (const auto& r : results) {
    if (std::isnan(r.rejection_rate)) continue;
    rows.push_back({distribution_label(r.config.distribution), r.config.missingness.label(),
                    r.config.approach.label(), r.config.n, r.rejection_rate,
                    r.standard_error});
  }
  return rows;
}

std::vector<ResultRow> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidConfig("results csv: empty file");
  if (line.back() == '\r') line.pop_back();
  if (line != results_csv_header()) {
    throw InvalidConfig("results csv: unexpected header '" + line + "'");
  }
  std::vector<ResultRow> rows;
  long line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 15) {
      throw InvalidConfig("results csv: line " + std::to_string(line_number) +
                          " has " + std::to_string(fields.size()) + " fields");
    }
    ResultRow row;
    const std::string& family = fields[0];
    row.distribution = (family == "t" ? "t" + fields[1] : family) + "-" + fields[2] +
                       "-d" + fields[3];
    row.n = std::stoi(fields[4]);
    row.missingness = fields[5];
    row.approach = fields[6];
    if (fields[12] == "nan") continue;
    row.rate = std::stod(fields[12]);
    row.se = std::stod(fields[13]);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct SeriesKey {
  std::string approach;
  std::string missingness;
};

}  // namespace

std::vector<FigureData> emit_figure_data(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw IncompleteGrid("no results to plot");

  // Figure per distribution, in first-appearance order.
  std::vector<std::string> figure_order;
  for (const auto& row : rows) {
    if (std::find(figure_order.begin(), figure_order.end(), row.distribution) ==
        figure_order.end()) {
      figure_order.push_back(row.distribution);
    }
  }

  std::vector<FigureData> figures;
  for (const auto& figure_id : figure_order) {
    std::vector<const ResultRow*> members;
    std::set<std::string> distinct_missingness;
    std::set<int> ns_universe;
    for (const auto& row : rows) {
      if (row.distribution != figure_id) continue;
      members.push_back(&row);
      distinct_missingness.insert(row.missingness);
      ns_universe.insert(row.n);
    }
    const bool qualify = distinct_missingness.size() > 1;

    FigureData figure;
    figure.id = figure_id;
    std::vector<std::string> series_order;
    std::map<std::string, std::map<int, std::pair<double, double>>> cells;
    for (const ResultRow* row : members) {
      const std::string label =
          qualify ? row->approach + " " + row->missingness : row->approach;
      if (cells.find(label) == cells.end()) series_order.push_back(label);
      auto& column = cells[label];
      if (!column.emplace(row->n, std::make_pair(row->rate, row->se)).second) {
        throw IncompleteGrid("duplicate cell for series '" + label + "', n=" +
                             std::to_string(row->n));
      }
    }

    std::string missing_report;
    for (const auto& label : series_order) {
      for (int n : ns_universe) {
        if (cells[label].find(n) == cells[label].end()) {
          missing_report += " (" + figure_id + ", " + label + ", n=" +
                            std::to_string(n) + ")";
        }
      }
    }
    if (!missing_report.empty()) {
      throw IncompleteGrid("missing cells:" + missing_report);
    }

    for (const auto& label : series_order) {
      FigureSeries series;
      series.label = label;
      for (const auto& [n, cell] : cells[label]) {
        series.ns.push_back(n);
        series.rates.push_back(cell.first);
        series.ses.push_back(cell.second);
      }
      figure.series.push_back(std::move(series));
    }
    figures.push_back(std::move(figure));
  }
  return figures;
}

FigureData emit_figure_data(const std::vector<ResultRow>& rows,
                            const std::string& figure_id) {
  std::vector<ResultRow> filtered;
  for (const auto& row : rows) {
    if (row.distribution == figure_id) filtered.push_back(row);
  }
  if (filtered.empty()) {
    throw IncompleteGrid("no results for figure '" + figure_id + "'");
  }
  return emit_figure_data(filtered).front();
}

void write_figure_csv(const FigureData& figure, std::ostream& out) {
  out << "figure,series,n,rejection_rate,std_error\n";
  for (const auto& series : figure.series) {
    for (std::size_t i = 0; i < series.ns.size(); ++i) {
      out << figure.id << ',' << series.label << ',' << series.ns[i] << ','
          << format_double(series.rates[i]) << ',' << format_double(series.ses[i])
          << '\n';
    }
  }
}

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

}  // namespace

void write_figure_svg(const FigureData& figure, std::ostream& out) {
  const double width = 760;
  const double height = 480;
  const double left = 70;
  const double right = width - 200;
  const double top = 40;
  const double bottom = height - 60;

  std::set<int> ns;
  double y_max = 0.0;
  for (const auto& series : figure.series) {
    for (std::size_t i = 0; i < series.ns.size(); ++i) {
      ns.insert(series.ns[i]);
      y_max = std::max(y_max, series.rates[i] + series.ses[i]);
    }
  }
  y_max = std::max(0.1, y_max * 1.15);
  const double x_min = static_cast<double>(*ns.begin());
  const double x_max = static_cast<double>(*ns.rbegin());
  const double x_span = std::max(1.0, x_max - x_min);
  const auto x_of = [&](double n) {
    return left + (n - x_min) / x_span * (right - left);
  };
  const auto y_of = [&](double rate) { return bottom - rate / y_max * (bottom - top); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << svg_num((left + right) / 2) << "\" y=\"20\" font-size=\"14\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\">"
      << figure.id << "</text>\n";

  // axes
  out << "<line x1=\"" << svg_num(left) << "\" y1=\"" << svg_num(bottom) << "\" x2=\""
      << svg_num(right) << "\" y2=\"" << svg_num(bottom)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << svg_num(left) << "\" y1=\"" << svg_num(bottom) << "\" x2=\""
      << svg_num(left) << "\" y2=\"" << svg_num(top)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int n : ns) {
    const double x = x_of(n);
    out << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(bottom) << "\" x2=\""
        << svg_num(x) << "\" y2=\"" << svg_num(bottom + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(bottom + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" << n
        << "</text>\n";
  }
  for (int tick = 0; tick <= 4; ++tick) {
    const double value = y_max * tick / 4.0;
    const double y = y_of(value);
    out << "<line x1=\"" << svg_num(left - 5) << "\" y1=\"" << svg_num(y) << "\" x2=\""
        << svg_num(left) << "\" y2=\"" << svg_num(y) << "\" stroke=\"black\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%.3f", value);
    out << "<text x=\"" << svg_num(left - 8) << "\" y=\"" << svg_num(y + 4)
        << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">" << label
        << "</text>\n";
  }
  out << "<text x=\"" << svg_num((left + right) / 2) << "\" y=\""
      << svg_num(height - 15)
      << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">sample "
         "size</text>\n";
  out << "<text x=\"18\" y=\"" << svg_num((top + bottom) / 2)
      << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 "
      << svg_num((top + bottom) / 2) << ")\">rejection rate</text>\n";

  // series
  for (std::size_t s = 0; s < figure.series.size(); ++s) {
    const auto& series = figure.series[s];
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series.ns.size(); ++i) {
      if (i > 0) out << ' ';
      out << svg_num(x_of(series.ns[i])) << ',' << svg_num(y_of(series.rates[i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < series.ns.size(); ++i) {
      out << "<circle cx=\"" << svg_num(x_of(series.ns[i])) << "\" cy=\""
          << svg_num(y_of(series.rates[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 18 * static_cast<double>(s);
    out << "<rect x=\"" << svg_num(right + 12) << "\" y=\"" << svg_num(ly - 9)
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << svg_num(right + 30) << "\" y=\"" << svg_num(ly + 2)
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << series.label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace bhep
