#pragma once

// Inner solvers for the two shifted subsystems, run entirely in one precision.

#include <span>
#include <vector>

#include "gadi/arith.hpp"
#include "gadi/sparse_matrix.hpp"

namespace gadi {

struct InnerSolveStats {
    int iterations = 0;
    double final_relative_residual = 0.0; // recurrence residual, used for stopping
    double true_relative_residual = 0.0;  // ||rhs - K x|| / ||rhs|| in fp64 at exit
    bool converged = false;
    bool breakdown = false; // nonpositive curvature met at working precision
};

struct InnerResult {
    std::vector<double> x;
    InnerSolveStats stats;
};

// 5 sqrt(n), at least 1 and at most 10000.
int default_inner_maxit(Index n);

// Conjugate gradients from a zero initial guess on an SPD matrix. Stops when
// the recurrence residual satisfies ||r|| / ||rhs|| <= tol or after maxit steps.
InnerResult cg_spd(const CsrMatrix& h, std::span<const double> rhs, double tol, int maxit,
                   const Arith& arith);

// CG on the normal equations S^T S y = S^T rhs without forming S^T S: one
// product with S and one with S^T per iteration. The residual rhs - S y is
// updated by recurrence and tested against tol.
InnerResult cg_normal_skew(const CsrMatrix& s, const CsrMatrix& s_transpose,
                           std::span<const double> rhs, double tol, int maxit, const Arith& arith);
InnerResult cg_normal_skew(const CsrMatrix& s, std::span<const double> rhs, double tol, int maxit,
                           const Arith& arith);

} // namespace gadi
