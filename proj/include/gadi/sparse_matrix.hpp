#pragma once

// Compressed sparse row storage and the structural kernels the solver is built on.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gadi/precision.hpp"

namespace gadi {

using Index = std::int64_t;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Immutable CSR matrix over binary64 values.
///
/// Invariants: row_offsets[0] == 0, row_offsets[rows] == nnz, column indices are
/// strictly increasing within a row and in [0, cols), and no stored value is
/// exactly 0.0. Lower-precision variants are ordinary CsrMatrix objects whose
/// values happen to be representable in the lower format.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(Index rows, Index cols);

    // Duplicates are summed; entries that sum to exactly zero are dropped.
    static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
    // Validates the CSR invariants and prunes explicit zeros.
    static CsrMatrix from_csr(Index rows, Index cols, std::vector<Index> row_offsets,
                              std::vector<Index> col_indices, std::vector<double> values);
    static CsrMatrix identity(Index n);
    static CsrMatrix diagonal(std::span<const double> d);
    // Row-major dense input, convenient for tests and tiny examples.
    static CsrMatrix from_dense(Index rows, Index cols, std::span<const double> row_major);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }
    bool is_square() const { return rows_ == cols_; }

    std::span<const Index> row_offsets() const { return row_offsets_; }
    std::span<const Index> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    // A(i, j), zero when not stored. O(log nnz_row).
    double at(Index i, Index j) const;
    std::vector<double> diagonal_values() const;
    std::vector<double> to_dense() const; // row-major
    std::vector<Triplet> to_triplets() const;
    double max_abs() const;
    double frobenius_norm() const;

    // Same pattern, values rounded to fmt (entries that underflow to zero are dropped).
    CsrMatrix quantized(const PrecisionFormat& fmt) const;
    CsrMatrix scaled(double factor) const;

    friend bool operator==(const CsrMatrix& a, const CsrMatrix& b) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

// y = A x with every multiply and add rounded to fmt, left to right in column
// order. fp64 is plain SpMV; the compensated pseudo-format uses Dot2 per row.
std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x,
                         const PrecisionFormat& fmt = formats::fp64());
void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
               const PrecisionFormat& fmt = formats::fp64());

// r = b - A x evaluated in fmt. For the compensated format b_i enters the
// compensated row sum, so the only rounding is the final one to binary64.
std::vector<double> residual(const CsrMatrix& a, std::span<const double> x,
                             std::span<const double> b, const PrecisionFormat& fmt);

CsrMatrix transpose(const CsrMatrix& a);

// alpha * A + beta * B, computed entrywise in binary64.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);

// Standard Kronecker product; throws SizeOverflow when the result is too large.
CsrMatrix kron(const CsrMatrix& a, const CsrMatrix& b);

// (M, N) = ((A + A^T)/2, (A - A^T)/2). Throws NonSquare.
std::pair<CsrMatrix, CsrMatrix> symm_skew_split(const CsrMatrix& a);

// alpha I + A with every diagonal entry materialized. Throws NonSquare.
CsrMatrix shift_diagonal(const CsrMatrix& a, double alpha);

// n x n tridiagonal with constant sub-, main and super-diagonals.
CsrMatrix tridiag(Index n, double lower, double diag, double upper);

bool is_symmetric(const CsrMatrix& a);
bool is_skew_symmetric(const CsrMatrix& a);

} // namespace gadi
