#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bhep/statistic.hpp"

namespace bhep {

/// Parameterization family used to estimate missingness probabilities from
/// the observed mask and to regenerate missingness in bootstrap samples.
enum class MissingnessFamily { PerColumn, RowThenValue };

std::string missingness_family_label(MissingnessFamily family);

struct BootstrapConfig {
  int B = 1000;          // bootstrap cycles
  double alpha = 0.05;   // significance level, in (0, 1]
  std::uint64_t master_seed = 0;
  MissingnessFamily family = MissingnessFamily::PerColumn;
  SigmaCenter sigma_center = SigmaCenter::CompleteCase;
  // Cycles whose resample violates a statistic precondition are redrawn up
  // to max_attempts times, then recorded as failures; the test aborts with
  // DegenerateBootstrap once failures exceed max_failure_fraction * B.
  int max_attempts = 3;
  double max_failure_fraction = 0.10;

  void validate() const;
};

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 0.0;  // (1 + #{T*_b >= T}) / (successful cycles + 1)
  bool reject = false;   // strict comparison against the (1-alpha) bootstrap quantile
  Index n = 0;
  Index n_hat = 0;       // complete cases in the input
  std::string method;
  int cycles_used = 0;   // successful bootstrap cycles
  int cycles_failed = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string mechanism;     // missingness family label
  std::string sigma_center;  // covariance centering label

  std::string to_json() const;
};

/// Missingness probabilities estimated from the response indicators, in the
/// requested family (observation rates per column, or row/value rates).
MissingnessSpec estimate_missingness(const IncompleteMatrix& data,
                                     MissingnessFamily family);

/// Parametric bootstrap p-value for the imputed-data BHEP statistic under
/// MCAR: fit (mu, sigma, missingness) to the sample, then repeatedly draw a
/// normal sample of the same size, ampute it, impute it, and recompute the
/// statistic. Cycle b draws from stream (seed, rng.stream_index + 1 + b),
/// so the cycles can run in any order.
TestOutcome bootstrap_test(const IncompleteMatrix& data, const ImputationMethod& method,
                           const BootstrapConfig& cfg, const RngStream& rng);

/// Same pipeline with the complete-case statistic: bootstrap samples are
/// amputed and then reduced to their complete cases.
TestOutcome bootstrap_test_complete_case(const IncompleteMatrix& data,
                                         const BootstrapConfig& cfg,
                                         const RngStream& rng);

// Decision pieces, exposed for property tests.

/// True iff t_obs exceeds the order-statistic ceil((1-alpha)*m) of the
/// sorted bootstrap values.
bool bootstrap_reject(double t_obs, const std::vector<double>& sorted_boot,
                      double alpha);
double bootstrap_p_value(double t_obs, const std::vector<double>& boot);

}  // namespace bhep
