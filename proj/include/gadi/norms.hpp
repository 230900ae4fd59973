#pragma once

#include <cstdint>
#include <span>

#include "gadi/sparse_matrix.hpp"

namespace gadi {

double norm2(std::span<const double> v);

struct PowerIterationOptions {
    double rel_tol = 1e-6;
    int maxit = 1000;
    std::uint64_t seed = 0x5eed;
};

// ||A||_2 by power iteration on A^T A from a fixed pseudo-random start vector.
// Stops when successive estimates agree to rel_tol. The estimate is a lower bound.
double spectral_norm_estimate(const CsrMatrix& a, PowerIterationOptions opts = {});

} // namespace gadi
