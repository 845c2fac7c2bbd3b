#pragma once

// Matrix Market coordinate files: real, integer, and pattern fields with
// general or symmetric storage. Indices in the file are 1-based.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiedler/sparse_core.hpp"

namespace fiedler {

class InputError : public std::runtime_error {
public:
  InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  // Same error with a prefix (typically the file path) on the message.
  InputError(const std::string& prefix, const InputError& inner)
      : std::runtime_error(prefix + inner.what()), line_(inner.line_) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InputError("empty Matrix Market stream", 1);
  ++lineno;

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw InputError("missing %%MatrixMarket banner", lineno);
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix") throw InputError("unsupported object '" + object + "'", lineno);
  if (format != "coordinate") throw InputError("only coordinate format is supported, got '" + format + "'", lineno);
  if (field == "complex") throw InputError("complex matrices are not supported", lineno);
  if (field != "real" && field != "integer" && field != "pattern" && field != "double")
    throw InputError("unsupported field '" + field + "'", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw InputError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool pattern = field == "pattern";
  const bool mirrored = symmetry == "symmetric";

  // size line
  long long rows = -1, cols = -1, entries = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> entries)) throw InputError("malformed size line", lineno);
    break;
  }
  if (rows < 0) throw InputError("missing size line", lineno);
  if (rows != cols)
    throw InputError("matrix is not square (" + std::to_string(rows) + " x " + std::to_string(cols) + ")", lineno);
  if (entries < 0) throw InputError("negative entry count", lineno);

  const auto n = static_cast<std::size_t>(rows);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(entries) * (mirrored ? 2 : 1));
  long long seen = 0;
  while (seen < entries && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(ss >> i >> j)) throw InputError("malformed entry", lineno);
    if (!pattern && !(ss >> v)) throw InputError("missing value", lineno);
    if (i < 1 || j < 1 || i > rows || j > cols) throw InputError("entry index out of range", lineno);
    trip.push_back({index_t(i - 1), index_t(j - 1), v});
    if (mirrored && i != j) trip.push_back({index_t(j - 1), index_t(i - 1), v});
    ++seen;
  }
  if (seen < entries)
    throw InputError("expected " + std::to_string(entries) + " entries, found " + std::to_string(seen), lineno);
  return SparseMatrix::from_triplets(n, std::move(trip));
}

inline SparseMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  try {
    return read_matrix_market(in);
  } catch (const InputError& e) {
    throw InputError(path + ": ", e);
  }
}

// Writes general coordinate format with 17 significant digits.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& A, const std::string& comment = {}) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << A.rows() << " " << A.rows() << " " << A.nnz() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
      out << (i + 1) << " " << (cols[k] + 1) << " " << buf << "\n";
    }
  }
}

}  // namespace fiedler
