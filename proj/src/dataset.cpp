#include "bhep/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace bhep {

namespace {

constexpr double kMissingSentinel = std::numeric_limits<double>::quiet_NaN();

std::string format_probability(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace

IncompleteMatrix::IncompleteMatrix(Matrix values_in, Mask mask_in)
    : values(std::move(values_in)), mask(std::move(mask_in)) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw std::invalid_argument("IncompleteMatrix: values/mask shape mismatch");
  }
  for (Index j = 0; j < values.rows(); ++j) {
    for (Index k = 0; k < values.cols(); ++k) {
      if (mask(j, k) == 0) values(j, k) = kMissingSentinel;
    }
  }
}

IncompleteMatrix IncompleteMatrix::fully_observed(Matrix values_in) {
  Mask ones = Mask::Constant(values_in.rows(), values_in.cols(), 1);
  return IncompleteMatrix(std::move(values_in), std::move(ones));
}

bool IncompleteMatrix::is_fully_observed() const {
  return missing_count() == 0;
}

Index IncompleteMatrix::missing_count() const {
  Index count = 0;
  for (Index j = 0; j < mask.rows(); ++j) {
    for (Index k = 0; k < mask.cols(); ++k) {
      if (mask(j, k) == 0) ++count;
    }
  }
  return count;
}

void MissingnessSpec::validate(Index d) const {
  if (const auto* pc = std::get_if<PerColumn>(&mechanism)) {
    if (pc->q.size() != d) {
      throw InvalidConfig("missingness: q must have one probability per column");
    }
    for (Index k = 0; k < pc->q.size(); ++k) {
      if (!(pc->q[k] >= 0.0 && pc->q[k] <= 1.0)) {
        throw InvalidConfig("missingness: observation probabilities must lie in [0,1]");
      }
    }
  } else {
    const auto& rv = std::get<RowThenValue>(mechanism);
    if (!(rv.p_row >= 0.0 && rv.p_row <= 1.0) ||
        !(rv.p_value >= 0.0 && rv.p_value <= 1.0)) {
      throw InvalidConfig("missingness: probabilities must lie in [0,1]");
    }
  }
}

std::string MissingnessSpec::label() const {
  std::string out;
  if (const auto* pc = std::get_if<PerColumn>(&mechanism)) {
    out = "per-column(";
    for (Index k = 0; k < pc->q.size(); ++k) {
      if (k > 0) out += ';';
      out += format_probability(pc->q[k]);
    }
    out += ')';
  } else {
    const auto& rv = std::get<RowThenValue>(mechanism);
    out = "row-value(" + format_probability(rv.p_row) + ';' +
          format_probability(rv.p_value) + ')';
  }
  return out;
}

IncompleteMatrix ampute_mcar(const Matrix& data, const MissingnessSpec& spec,
                             RngStream& rng) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (n < 1) throw std::invalid_argument("ampute_mcar: n must be >= 1");
  spec.validate(d);

  Mask mask = Mask::Constant(n, d, 1);
  if (const auto* pc = std::get_if<PerColumn>(&spec.mechanism)) {
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < d; ++k) {
        mask(j, k) = rng.uniform() < pc->q[k] ? 1 : 0;
      }
    }
  } else {
    const auto& rv = std::get<RowThenValue>(spec.mechanism);
    for (Index j = 0; j < n; ++j) {
      if (rng.uniform() < rv.p_row) {
        for (Index k = 0; k < d; ++k) {
          if (rng.uniform() < rv.p_value) mask(j, k) = 0;
        }
      }
    }
  }
  return IncompleteMatrix(data, std::move(mask));
}

CompleteCaseView complete_cases(const IncompleteMatrix& data) {
  CompleteCaseView view;
  view.original_indices.reserve(data.rows());
  for (Index j = 0; j < data.rows(); ++j) {
    bool complete = true;
    for (Index k = 0; k < data.cols(); ++k) {
      if (!data.observed(j, k)) {
        complete = false;
        break;
      }
    }
    if (complete) view.original_indices.push_back(j);
  }
  view.n_hat = static_cast<Index>(view.original_indices.size());
  view.rows.resize(view.n_hat, data.cols());
  for (Index i = 0; i < view.n_hat; ++i) {
    view.rows.row(i) = data.values.row(view.original_indices[i]);
  }
  return view;
}

Vector available_case_mean(const IncompleteMatrix& data) {
  const Index d = data.cols();
  Vector mean = Vector::Zero(d);
  for (Index k = 0; k < d; ++k) {
    double sum = 0.0;
    Index count = 0;
    for (Index j = 0; j < data.rows(); ++j) {
      if (data.observed(j, k)) {
        sum += data.values(j, k);
        ++count;
      }
    }
    if (count == 0) {
      throw EmptyColumn("column " + std::to_string(k) + " has no observed values");
    }
    mean[k] = sum / static_cast<double>(count);
  }
  return mean;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

IncompleteMatrix read_csv_stream(std::istream& in, bool skip_header) {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint8_t>> masks;
  std::string line;
  long line_number = 0;
  std::size_t width = 0;
  bool first_data_row = true;

  if (skip_header) {
    std::getline(in, line);
    ++line_number;
  }

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::vector<std::uint8_t> row_mask;
    std::size_t start = 0;
    long field_number = 0;
    for (;;) {
      ++field_number;
      const std::size_t comma = line.find(',', start);
      const std::string_view raw(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
      const std::string_view field = trim(raw);
      if (field.empty() || field == "NA") {
        row.push_back(kMissingSentinel);
        row_mask.push_back(0);
      } else {
        double parsed = 0.0;
        const auto [ptr, ec] =
            std::from_chars(field.data(), field.data() + field.size(), parsed);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
          throw ParseError("cannot parse numeric field '" + std::string(field) + "'",
                           line_number, field_number);
        }
        row.push_back(parsed);
        row_mask.push_back(1);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first_data_row) {
      width = row.size();
      first_data_row = false;
    } else if (row.size() != width) {
      throw RaggedRows("row " + std::to_string(line_number) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(width));
    }
    values.push_back(std::move(row));
    masks.push_back(std::move(row_mask));
  }

  if (values.empty()) {
    throw ParseError("input contains no data rows", line_number, 1);
  }

  const Index n = static_cast<Index>(values.size());
  const Index d = static_cast<Index>(width);
  Matrix m(n, d);
  Mask mask(n, d);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < d; ++k) {
      m(j, k) = values[j][k];
      mask(j, k) = masks[j][k];
    }
  }
  return IncompleteMatrix(std::move(m), std::move(mask));
}

IncompleteMatrix read_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  return read_csv_stream(in, skip_header);
}

void write_csv_stream(const IncompleteMatrix& data, std::ostream& out) {
  char buffer[64];
  for (Index j = 0; j < data.rows(); ++j) {
    for (Index k = 0; k < data.cols(); ++k) {
      if (k > 0) out << ',';
      if (data.observed(j, k)) {
        // Shortest representation that round-trips exactly.
        const auto [ptr, ec] =
            std::to_chars(buffer, buffer + sizeof(buffer), data.values(j, k));
        out.write(buffer, ptr - buffer);
        (void)ec;
      }
    }
    out << '\n';
  }
}

void write_csv(const IncompleteMatrix& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_csv_stream(data, out);
}

}  // namespace bhep
