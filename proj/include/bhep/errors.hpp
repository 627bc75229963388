#pragma once

#include <stdexcept>
#include <string>

namespace bhep {

// Numerical failures ------------------------------------------------------

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedDimension : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statistic preconditions --------------------------------------------------

struct SingularCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewRows : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewCompleteCases : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Imputation ---------------------------------------------------------------

struct EmptyColumn : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoDonor : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bootstrap / experiments ----------------------------------------------------

struct DegenerateBootstrap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AllReplicatesFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompleteGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV ingestion --------------------------------------------------------------

struct ParseError : std::runtime_error {
  ParseError(std::string message, long row, long column)
      : std::runtime_error(message + " (row " + std::to_string(row) +
                           ", column " + std::to_string(column) + ")"),
        row(row),
        column(column) {}
  long row;     // 1-based line number in the file
  long column;  // 1-based field number in the line
};

struct RaggedRows : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bhep
