#include "bhep/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace bhep {

std::string sigma_center_label(SigmaCenter center) {
  return center == SigmaCenter::CompleteCase ? "complete-case" : "available-case";
}

double bhep_kernel(const Vector& x1, const Vector& x2, const GaussianParams& params) {
  const double d = static_cast<double>(params.dim());
  const Eigen::LLT<Matrix> llt(params.sigma);
  const auto mahalanobis_sq = [&](const Vector& v) {
    return v.dot(llt.solve(v));
  };
  const double q12 = mahalanobis_sq(x1 - x2);
  const double q1 = mahalanobis_sq(x1 - params.mu);
  const double q2 = mahalanobis_sq(x2 - params.mu);
  return std::exp(-0.5 * q12) -
         std::pow(2.0, -0.5 * d) * (std::exp(-0.25 * q1) + std::exp(-0.25 * q2)) +
         std::pow(3.0, -0.5 * d);
}

double bhep_g(const Vector& x, const Vector& t, const GaussianParams& params) {
  const Matrix root = inv_sqrt_sym(params.sigma);
  const double a = t.dot(root * (x - params.mu));
  return std::cos(a) + std::sin(a) - std::exp(-0.5 * t.squaredNorm());
}

namespace {

// Statistic from already standardized rows. Pair terms accumulate in
// extended precision with a fixed order so results do not depend on the
// execution schedule.
double bhep_from_standardized(const Matrix& y) {
  const Index n = y.rows();
  const double d = static_cast<double>(y.cols());
  const Matrix yt = y.transpose();  // d x n, columns contiguous

  long double pair_sum = static_cast<long double>(n);  // diagonal terms
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      const double dist_sq = (yt.col(j) - yt.col(k)).squaredNorm();
      pair_sum += 2.0L * std::exp(-0.5 * dist_sq);
    }
  }
  long double radial_sum = 0.0L;
  for (Index j = 0; j < n; ++j) {
    radial_sum += std::exp(-0.25 * yt.col(j).squaredNorm());
  }
  const long double t = pair_sum / n -
                        std::pow(2.0L, 1.0L - 0.5L * d) * radial_sum +
                        n * std::pow(3.0L, -0.5L * d);
  return static_cast<double>(t);
}

struct Standardized {
  Matrix y;
  Vector mean;
  Matrix cov;
};

// Sample mean and 1/n covariance, then Y_j = S^{-1/2} (X_j - mean).
Standardized standardize(const Matrix& data) {
  const Index n = data.rows();
  Standardized s;
  s.mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(n);
  Matrix root;
  try {
    root = inv_sqrt_sym(s.cov);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("sample covariance is singular");
  }
  s.y = centered * root;  // root is symmetric
  return s;
}

}  // namespace

BhepValue bhep_statistic(const Matrix& data) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (n < d + 2) {
    throw TooFewRows("need at least d+2 rows, got " + std::to_string(n));
  }
  Standardized s = standardize(data);
  const double t = bhep_from_standardized(s.y);
  return {t, n, GaussianParams(std::move(s.mean), std::move(s.cov))};
}

double bhep_oracle(const Matrix& data, int quad_order) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (d > 3) {
    throw UnsupportedDimension("bhep_oracle: d must be at most 3");
  }
  if (n > 50) {
    throw std::invalid_argument("bhep_oracle: n must be at most 50");
  }
  if (quad_order < 30 || quad_order > 64) {
    throw std::invalid_argument("bhep_oracle: quad_order must be in [30, 64]");
  }
  if (n < d + 2) {
    throw TooFewRows("need at least d+2 rows, got " + std::to_string(n));
  }

  const Standardized s = standardize(data);
  const auto nodes = gauss_hermite_nodes(quad_order, static_cast<int>(d));

  long double acc = 0.0L;
  for (const auto& node : nodes) {
    double re = 0.0;
    double im = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double a = node.point.dot(s.y.row(j));
      re += std::cos(a);
      im += std::sin(a);
    }
    re /= static_cast<double>(n);
    im /= static_cast<double>(n);
    const double target = std::exp(-0.5 * node.point.squaredNorm());
    const double dre = re - target;
    acc += node.weight * (dre * dre + im * im);
  }
  return static_cast<double>(n * acc);
}

BhepValue bhep_complete_case(const IncompleteMatrix& data) {
  const CompleteCaseView view = complete_cases(data);
  const Index d = data.cols();
  if (view.n_hat < d + 2) {
    throw TooFewCompleteCases("need at least d+2 complete cases, got " +
                              std::to_string(view.n_hat));
  }
  return bhep_statistic(view.rows);
}

BhepValue bhep_on_imputed(const IncompleteMatrix& data, const ImputationMethod& method,
                          SigmaCenter center) {
  const Index n = data.rows();
  const Index d = data.cols();
  const Matrix imputed = impute(data, method);
  const Vector mu = imputed.colwise().mean();

  const CompleteCaseView view = complete_cases(data);
  if (view.n_hat < d + 2) {
    throw TooFewCompleteCases("need at least d+2 complete cases, got " +
                              std::to_string(view.n_hat));
  }
  const Vector centering = center == SigmaCenter::CompleteCase
                               ? Vector(view.rows.colwise().mean())
                               : available_case_mean(data);
  const Matrix centered_cc = view.rows.rowwise() - centering.transpose();
  const Matrix cov = (centered_cc.transpose() * centered_cc) /
                     static_cast<double>(view.n_hat);
  Matrix root;
  try {
    root = inv_sqrt_sym(cov);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("complete-case covariance is singular");
  }
  const Matrix y = (imputed.rowwise() - mu.transpose()) * root;
  const double t = bhep_from_standardized(y);
  return {t, n, GaussianParams(mu, cov)};
}

std::vector<double> null_statistic_draws(Index n, int d, int draws,
                                         const RngStream& rng) {
  if (draws < 1) throw std::invalid_argument("null_statistic_draws: draws must be >= 1");
  const GaussianParams standard(Vector::Zero(d), Matrix::Identity(d, d));
  std::vector<double> values;
  values.reserve(draws);
  for (int m = 0; m < draws; ++m) {
    RngStream stream(rng.master_seed(), rng.stream_index() + static_cast<std::uint64_t>(m));
    values.push_back(bhep_statistic(sample_mvn(standard, n, stream)).statistic);
  }
  std::sort(values.begin(), values.end());
  return values;
}

double empirical_quantile(const std::vector<double>& sorted_values, double level) {
  if (sorted_values.empty()) {
    throw std::invalid_argument("empirical_quantile: empty sample");
  }
  const auto m = static_cast<double>(sorted_values.size());
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(level * m));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, sorted_values.size());
  return sorted_values[rank - 1];
}

double NullQuantileTable::quantile_at(double level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return quantiles[i];
  }
  throw std::invalid_argument("quantile_at: level not in table");
}

std::string NullQuantileTable::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["d"] = d;
  j["M"] = draws;
  j["seed"] = seed;
  j["levels"] = levels;
  j["quantiles"] = quantiles;
  return j.dump();
}

NullQuantileTable null_quantile_table(Index n, int d, std::vector<double> levels,
                                      int draws, const RngStream& rng) {
  if (draws < 1000) {
    throw std::invalid_argument("null_quantile_table: need at least 1000 draws");
  }
  for (double level : levels) {
    if (!(level > 0.0 && level <= 1.0)) {
      throw std::invalid_argument("null_quantile_table: levels must lie in (0, 1]");
    }
  }
  const std::vector<double> sorted = null_statistic_draws(n, d, draws, rng);
  NullQuantileTable table;
  table.n = n;
  table.d = d;
  table.draws = draws;
  table.seed = rng.master_seed();
  table.levels = std::move(levels);
  table.quantiles.reserve(table.levels.size());
  for (double level : table.levels) {
    table.quantiles.push_back(empirical_quantile(sorted, level));
  }
  return table;
}

}  // namespace bhep
