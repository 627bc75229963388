#pragma once

#include <optional>
#include <string>

#include "bhep/dataset.hpp"

namespace bhep {

/// How a k-nearest-neighbor fill combines the donor values.
enum class KnnAggregate { Mean, Median };

struct ImputationMethod {
  enum class Kind { Mean, Median, Knn };

  Kind kind = Kind::Mean;
  int k = 0;  // neighbor count, Knn only (k >= 1)
  KnnAggregate aggregate = KnnAggregate::Mean;

  static ImputationMethod mean() { return {Kind::Mean, 0, KnnAggregate::Mean}; }
  static ImputationMethod median() { return {Kind::Median, 0, KnnAggregate::Mean}; }
  static ImputationMethod knn(int k, KnnAggregate aggregate = KnnAggregate::Mean);

  /// Parses "mean", "median", or "knn<k>" (e.g. "knn3", "knn6").
  static std::optional<ImputationMethod> parse(const std::string& name);
  std::string label() const;
};

/// Fill every missing entry and return the completed matrix. Observed
/// entries pass through unchanged.
///
/// Mean/Median fill a missing (j,k) with the available-case mean/median of
/// column k. Knn fills it with the aggregate of column-k values over the k
/// nearest donor rows, where donors are rows with column k observed, the
/// distance is the Euclidean norm over coordinates observed in both rows
/// divided by the shared-coordinate count, and ties go to the lower row
/// index. Throws EmptyColumn or NoDonor.
Matrix impute(const IncompleteMatrix& data, const ImputationMethod& method);

/// Column means of impute(data, method).
Vector fitted_mean(const IncompleteMatrix& data, const ImputationMethod& method);

}  // namespace bhep
