#include "bhep/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace bhep {

std::string missingness_family_label(MissingnessFamily family) {
  return family == MissingnessFamily::PerColumn ? "per-column" : "row-value";
}

void BootstrapConfig::validate() const {
  if (B < 1) throw InvalidConfig("bootstrap: B must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidConfig("bootstrap: alpha must lie in (0, 1]");
  }
  if (max_attempts < 1) throw InvalidConfig("bootstrap: max_attempts must be >= 1");
}

std::string TestOutcome::to_json() const {
  nlohmann::json j;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["reject"] = reject;
  j["n"] = n;
  j["n_hat"] = n_hat;
  j["method"] = method;
  j["cycles_used"] = cycles_used;
  j["cycles_failed"] = cycles_failed;
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["mechanism"] = mechanism;
  j["sigma_center"] = sigma_center;
  return j.dump();
}

MissingnessSpec estimate_missingness(const IncompleteMatrix& data,
                                     MissingnessFamily family) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (family == MissingnessFamily::PerColumn) {
    Vector q(d);
    for (Index k = 0; k < d; ++k) {
      Index observed = 0;
      for (Index j = 0; j < n; ++j) {
        if (data.observed(j, k)) ++observed;
      }
      q[k] = static_cast<double>(observed) / static_cast<double>(n);
    }
    return MissingnessSpec{PerColumn{std::move(q)}};
  }
  Index incomplete_rows = 0;
  Index missing_in_incomplete = 0;
  for (Index j = 0; j < n; ++j) {
    Index missing = 0;
    for (Index k = 0; k < d; ++k) {
      if (!data.observed(j, k)) ++missing;
    }
    if (missing > 0) {
      ++incomplete_rows;
      missing_in_incomplete += missing;
    }
  }
  const double p_row = static_cast<double>(incomplete_rows) / static_cast<double>(n);
  const double p_value =
      incomplete_rows == 0
          ? 0.0
          : static_cast<double>(missing_in_incomplete) /
                static_cast<double>(incomplete_rows * d);
  return MissingnessSpec{RowThenValue{p_row, p_value}};
}

bool bootstrap_reject(double t_obs, const std::vector<double>& sorted_boot,
                      double alpha) {
  return t_obs > empirical_quantile(sorted_boot, 1.0 - alpha);
}

double bootstrap_p_value(double t_obs, const std::vector<double>& boot) {
  std::size_t at_least = 0;
  for (double v : boot) {
    if (v >= t_obs) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(boot.size() + 1);
}

namespace {

// Shared driver: `statistic` evaluates the configured route on an
// incomplete sample and throws on precondition violations.
template <typename StatisticFn>
TestOutcome run_bootstrap(const IncompleteMatrix& data, const BootstrapConfig& cfg,
                          const RngStream& rng, const std::string& method_label,
                          double t_obs, const GaussianParams& fitted,
                          StatisticFn&& statistic) {
  cfg.validate();
  const Index n = data.rows();
  const MissingnessSpec estimated = estimate_missingness(data, cfg.family);

  std::vector<double> boot;
  boot.reserve(cfg.B);
  int failed = 0;
  for (int b = 0; b < cfg.B; ++b) {
    RngStream cycle(rng.master_seed(),
                    rng.stream_index() + 1 + static_cast<std::uint64_t>(b));
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
      try {
        const Matrix resample = sample_mvn(fitted, n, cycle);
        const IncompleteMatrix amputed = ampute_mcar(resample, estimated, cycle);
        boot.push_back(statistic(amputed));
        ok = true;
      } catch (const TooFewCompleteCases&) {
      } catch (const SingularCovariance&) {
      } catch (const EmptyColumn&) {
      } catch (const NoDonor&) {
      }
    }
    if (!ok) ++failed;
  }
  if (failed > cfg.max_failure_fraction * cfg.B || boot.empty()) {
    throw DegenerateBootstrap(std::to_string(failed) + " of " + std::to_string(cfg.B) +
                              " bootstrap cycles failed their preconditions");
  }
  std::sort(boot.begin(), boot.end());

  TestOutcome out;
  out.statistic = t_obs;
  out.p_value = bootstrap_p_value(t_obs, boot);
  out.reject = bootstrap_reject(t_obs, boot, cfg.alpha);
  out.n = n;
  out.n_hat = complete_cases(data).n_hat;
  out.method = method_label;
  out.cycles_used = static_cast<int>(boot.size());
  out.cycles_failed = failed;
  out.alpha = cfg.alpha;
  out.seed = cfg.master_seed;
  out.mechanism = missingness_family_label(cfg.family);
  out.sigma_center = sigma_center_label(cfg.sigma_center);
  return out;
}

}  // namespace

TestOutcome bootstrap_test(const IncompleteMatrix& data, const ImputationMethod& method,
                           const BootstrapConfig& cfg, const RngStream& rng) {
  const BhepValue observed = bhep_on_imputed(data, method, cfg.sigma_center);
  return run_bootstrap(data, cfg, rng, method.label(), observed.statistic,
                       observed.standardization,
                       [&](const IncompleteMatrix& sample) {
                         return bhep_on_imputed(sample, method, cfg.sigma_center).statistic;
                       });
}

TestOutcome bootstrap_test_complete_case(const IncompleteMatrix& data,
                                         const BootstrapConfig& cfg,
                                         const RngStream& rng) {
  // Both moments come from the complete cases here; there is no imputed
  // dataset to average.
  const BhepValue observed = bhep_complete_case(data);
  return run_bootstrap(data, cfg, rng, "complete-case", observed.statistic,
                       observed.standardization,
                       [](const IncompleteMatrix& sample) {
                         return bhep_complete_case(sample).statistic;
                       });
}

}  // namespace bhep
