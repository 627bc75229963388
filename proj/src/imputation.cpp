#include "bhep/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bhep {

ImputationMethod ImputationMethod::knn(int k, KnnAggregate aggregate) {
  if (k < 1) throw std::invalid_argument("knn imputation requires k >= 1");
  return {Kind::Knn, k, aggregate};
}

std::optional<ImputationMethod> ImputationMethod::parse(const std::string& name) {
  if (name == "mean") return mean();
  if (name == "median") return median();
  if (name.rfind("knn", 0) == 0 && name.size() > 3) {
    int k = 0;
    for (std::size_t i = 3; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') return std::nullopt;
      k = k * 10 + (name[i] - '0');
    }
    if (k < 1) return std::nullopt;
    return knn(k);
  }
  return std::nullopt;
}

std::string ImputationMethod::label() const {
  switch (kind) {
    case Kind::Mean:
      return "mean";
    case Kind::Median:
      return "median";
    case Kind::Knn:
      return "knn" + std::to_string(k);
  }
  return "unknown";
}

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Per-column available-case statistic (mean or median).
Vector column_fills(const IncompleteMatrix& data, bool use_median) {
  const Index d = data.cols();
  Vector fills(d);
  for (Index k = 0; k < d; ++k) {
    std::vector<double> observed;
    observed.reserve(data.rows());
    for (Index j = 0; j < data.rows(); ++j) {
      if (data.observed(j, k)) observed.push_back(data.values(j, k));
    }
    if (observed.empty()) {
      throw EmptyColumn("column " + std::to_string(k) + " has no observed values");
    }
    if (use_median) {
      fills[k] = median_of(std::move(observed));
    } else {
      double sum = 0.0;
      for (double v : observed) sum += v;
      fills[k] = sum / static_cast<double>(observed.size());
    }
  }
  return fills;
}

Matrix impute_column_statistic(const IncompleteMatrix& data, bool use_median) {
  const Vector fills = column_fills(data, use_median);
  Matrix out = data.values;
  for (Index j = 0; j < data.rows(); ++j) {
    for (Index k = 0; k < data.cols(); ++k) {
      if (!data.observed(j, k)) out(j, k) = fills[k];
    }
  }
  return out;
}

Matrix impute_knn(const IncompleteMatrix& data, int k_neighbors,
                  KnnAggregate aggregate) {
  const Index n = data.rows();
  const Index d = data.cols();
  // Guard against fully unobserved columns up front so the error does not
  // depend on row order.
  (void)column_fills(data, false);

  Matrix out = data.values;
  struct Donor {
    double distance;
    Index index;
  };
  std::vector<Donor> donors;
  donors.reserve(n);

  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < d; ++k) {
      if (data.observed(j, k)) continue;
      donors.clear();
      for (Index i = 0; i < n; ++i) {
        if (i == j || !data.observed(i, k)) continue;
        double sq = 0.0;
        Index shared = 0;
        for (Index c = 0; c < d; ++c) {
          if (data.observed(j, c) && data.observed(i, c)) {
            const double diff = data.values(j, c) - data.values(i, c);
            sq += diff * diff;
            ++shared;
          }
        }
        if (shared == 0) continue;
        donors.push_back({std::sqrt(sq) / static_cast<double>(shared), i});
      }
      if (donors.empty()) {
        throw NoDonor("row " + std::to_string(j) + ", column " + std::to_string(k) +
                      " shares no observed coordinate with any donor");
      }
      const std::size_t take =
          std::min<std::size_t>(donors.size(), static_cast<std::size_t>(k_neighbors));
      std::partial_sort(donors.begin(), donors.begin() + take, donors.end(),
                        [](const Donor& a, const Donor& b) {
                          if (a.distance != b.distance) return a.distance < b.distance;
                          return a.index < b.index;
                        });
      std::vector<double> neighbor_values;
      neighbor_values.reserve(take);
      for (std::size_t t = 0; t < take; ++t) {
        neighbor_values.push_back(data.values(donors[t].index, k));
      }
      if (aggregate == KnnAggregate::Median) {
        out(j, k) = median_of(std::move(neighbor_values));
      } else {
        double sum = 0.0;
        for (double v : neighbor_values) sum += v;
        out(j, k) = sum / static_cast<double>(neighbor_values.size());
      }
    }
  }
  return out;
}

}  // namespace

Matrix impute(const IncompleteMatrix& data, const ImputationMethod& method) {
  switch (method.kind) {
    case ImputationMethod::Kind::Mean:
      return impute_column_statistic(data, /*use_median=*/false);
    case ImputationMethod::Kind::Median:
      return impute_column_statistic(data, /*use_median=*/true);
    case ImputationMethod::Kind::Knn:
      return impute_knn(data, method.k, method.aggregate);
  }
  throw std::logic_error("impute: unknown method");
}

Vector fitted_mean(const IncompleteMatrix& data, const ImputationMethod& method) {
  return impute(data, method).colwise().mean();
}

}  // namespace bhep
