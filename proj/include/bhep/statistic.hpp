#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bhep/dataset.hpp"
#include "bhep/imputation.hpp"

namespace bhep {

/// Which mean centers the complete-case covariance used by the
/// imputed-data statistic.
enum class SigmaCenter { CompleteCase, AvailableCase };

std::string sigma_center_label(SigmaCenter center);

struct BhepValue {
  double statistic;            // nonnegative
  Index n_used;                // rows entering the statistic
  GaussianParams standardization;  // mean / covariance actually used
};

/// Kernel of the BHEP V-statistic representation:
///   h(x1,x2) = exp(-q12/2) - 2^{-d/2} (exp(-q1/4) + exp(-q2/4)) + 3^{-d/2}
/// with q the squared Mahalanobis forms under params. Symmetric in (x1,x2).
double bhep_kernel(const Vector& x1, const Vector& x2, const GaussianParams& params);

/// Integrand factor with h(x1,x2) = integral of g(x1,t) g(x2,t) phi(t) dt:
///   g(x,t) = cos(t'y) + sin(t'y) - exp(-|t|^2/2), y = sigma^{-1/2}(x - mu).
double bhep_g(const Vector& x, const Vector& t, const GaussianParams& params);

/// BHEP statistic on fully observed data: standardize with the sample mean
/// and the 1/n-denominator sample covariance, then
///   T = (1/n) sum_{j,k} exp(-|Yj-Yk|^2/2)
///       - 2^{1-d/2} sum_j exp(-|Yj|^2/4) + n 3^{-d/2}.
/// Throws TooFewRows (n < d+2) or SingularCovariance.
BhepValue bhep_statistic(const Matrix& data);

/// Independent quadrature route: evaluates
///   n * integral of |psi_n(t) - exp(-|t|^2/2)|^2 phi(t) dt
/// by tensor Gauss-Hermite over the standardized sample, bypassing the
/// kernel algebra. Verification-scale only: d <= 3, n <= 50, order in [30, 64].
double bhep_oracle(const Matrix& data, int quad_order);

/// BHEP statistic of the fully observed rows only; n_used is the
/// complete-case count. Throws TooFewCompleteCases or SingularCovariance.
BhepValue bhep_complete_case(const IncompleteMatrix& data);

/// BHEP statistic on the imputed dataset, standardized by the imputed-data
/// column means and the complete-case covariance (centered per `center`).
/// Translation invariant but not scale invariant.
BhepValue bhep_on_imputed(const IncompleteMatrix& data, const ImputationMethod& method,
                          SigmaCenter center = SigmaCenter::CompleteCase);

struct NullQuantileTable {
  Index n = 0;
  int d = 0;
  int draws = 0;  // Monte Carlo sample count behind the quantiles
  std::uint64_t seed = 0;
  std::vector<double> levels;
  std::vector<double> quantiles;

  /// Quantile for a level contained in `levels` (exact match).
  double quantile_at(double level) const;
  std::string to_json() const;
};

/// Sorted draws of the statistic on N_d(0, I) samples of size n. Draw m
/// uses the stream (rng.master_seed, rng.stream_index + m).
std::vector<double> null_statistic_draws(Index n, int d, int draws, const RngStream& rng);

/// Empirical null quantiles from `draws` Monte Carlo replications
/// (draws >= 1000); the table is reproducible from (n, d, draws, seed).
NullQuantileTable null_quantile_table(Index n, int d, std::vector<double> levels,
                                      int draws, const RngStream& rng);

/// Order-statistic quantile: element ceil(level * m) (1-based, clamped) of
/// an ascending-sorted sample.
double empirical_quantile(const std::vector<double>& sorted_values, double level);

}  // namespace bhep
