#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "bhep/numerics.hpp"

namespace bhep {

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// n x d sample paired with a response-indicator mask: mask(j,k) = 1 means
/// entry (j,k) was observed. Entries with mask 0 are poisoned with quiet
/// NaN at construction and must never feed a statistic; tests overwrite
/// them with garbage to verify that contract.
struct IncompleteMatrix {
  Matrix values;
  Mask mask;

  IncompleteMatrix(Matrix values_in, Mask mask_in);
  static IncompleteMatrix fully_observed(Matrix values_in);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool observed(Index j, Index k) const { return mask(j, k) != 0; }
  bool is_fully_observed() const;
  Index missing_count() const;
};

/// Entry (j,k) is observed independently with probability q[k].
struct PerColumn {
  Vector q;
};

/// A row is marked incomplete with probability p_row; within a marked row
/// each entry goes missing independently with probability p_value.
struct RowThenValue {
  double p_row;
  double p_value;
};

struct MissingnessSpec {
  std::variant<PerColumn, RowThenValue> mechanism;

  void validate(Index d) const;  // probabilities in [0,1], q length == d
  std::string label() const;     // e.g. "per-column(0.9;0.9)" / "row-value(0.3;0.3)"
};

/// Apply the MCAR mechanism to complete data. The mask depends only on the
/// RNG, never on the data values.
IncompleteMatrix ampute_mcar(const Matrix& data, const MissingnessSpec& spec,
                             RngStream& rng);

struct CompleteCaseView {
  Matrix rows;  // n_hat x d fully observed rows, original order preserved
  Index n_hat;
  std::vector<Index> original_indices;
};

/// Keep exactly the rows whose mask is all ones. n_hat may be zero.
CompleteCaseView complete_cases(const IncompleteMatrix& data);

/// Per-column mean over the observed entries. Throws EmptyColumn if a
/// column has no observed value.
Vector available_case_mean(const IncompleteMatrix& data);

// CSV: comma separated, '.' decimal, UTF-8, LF or CRLF. Missing cells are
// written as empty fields; empty fields and the literal NA parse as missing.
IncompleteMatrix read_csv(const std::string& path, bool skip_header = false);
IncompleteMatrix read_csv_stream(std::istream& in, bool skip_header = false);
void write_csv(const IncompleteMatrix& data, const std::string& path);
void write_csv_stream(const IncompleteMatrix& data, std::ostream& out);

}  // namespace bhep
