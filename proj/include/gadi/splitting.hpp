#pragma once

#include "gadi/precision.hpp"
#include "gadi/sparse_matrix.hpp"

namespace gadi {

/// Operators of the splitting A = M + N shifted by alpha:
/// H = alpha I + M, S = alpha I + N, and alpha I - N (the transpose of S for
/// the skew-symmetric N built here). Low-precision copies are rounded to the
/// solver precision once at construction.
struct Splitting {
    double alpha = 0.0;
    CsrMatrix m;
    CsrMatrix n;
    CsrMatrix h;
    CsrMatrix s;
    CsrMatrix alpha_minus_n;

    PrecisionFormat solver_format;
    CsrMatrix h_low;
    CsrMatrix s_low;
    CsrMatrix alpha_minus_n_low;

    Index size() const { return m.rows(); }
};

// Symmetric / skew-symmetric split of A. Throws NonSquare or NonPositiveAlpha.
Splitting make_hss_splitting(const CsrMatrix& a, double alpha, const PrecisionFormat& solver_format);

// Rebuild the shifted operators for a new alpha, reusing M and N.
Splitting with_alpha(const Splitting& base, double alpha);

} // namespace gadi
