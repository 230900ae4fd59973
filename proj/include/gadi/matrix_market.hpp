#pragma once

// Matrix Market coordinate files and the problem sidecar (label, params,
// right-hand side, exact solution) stored next to them as JSON.

#include <iosfwd>
#include <string>

#include "gadi/problems.hpp"
#include "gadi/sparse_matrix.hpp"

namespace gadi {

// Supports coordinate real | integer | pattern with general, symmetric or
// skew-symmetric storage. Throws ParseError with the offending line number.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::string& path);

// Writes "coordinate real general" with 17 significant digits, so a
// write/read round trip is exact.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
void write_matrix_market(const std::string& path, const CsrMatrix& a);

// foo.mtx -> foo.json; any other name gets ".json" appended.
std::string sidecar_path(const std::string& matrix_path);

void save_problem(const std::string& matrix_path, const Problem& p);

// Without a sidecar, b = A * 1 is manufactured.
Problem load_problem(const std::string& matrix_path);

} // namespace gadi
