#pragma once

// Vector kernels executed "in precision f": every scalar operation is rounded.

#include <span>
#include <vector>

#include "gadi/precision.hpp"
#include "gadi/sparse_matrix.hpp"

namespace gadi {

/// Arithmetic context for one precision.
///
/// In the strict model every operation (including dot-product accumulation)
/// is rounded to the storage format. In the relaxed model formats narrower
/// than fp32 keep their storage rounding but compute in fp32, mirroring
/// hardware that stores bfloat16 and accumulates in single precision.
class Arith {
public:
    explicit Arith(const PrecisionFormat& storage, bool strict_model = true);

    const PrecisionFormat& storage() const { return storage_; }
    const PrecisionFormat& compute() const { return compute_; }

    double round(double x) const { return quantize(x, compute_); }
    double store(double x) const { return quantize(x, storage_); }
    void store(std::span<double> v) const { quantize_inplace(v, storage_); }

    double add(double a, double b) const { return round(a + b); }
    double sub(double a, double b) const { return round(a - b); }
    double mul(double a, double b) const { return round(a * b); }
    double div(double a, double b) const { return round(a / b); }

    double dot(std::span<const double> x, std::span<const double> y) const;
    double norm2(std::span<const double> x) const;
    // y <- y + a x, stored.
    void axpy(double a, std::span<const double> x, std::span<double> y) const;
    // y <- x + a y, stored.
    void xpay(std::span<const double> x, double a, std::span<double> y) const;
    // x <- a x, stored.
    void scal(double a, std::span<double> x) const;
    // y <- A x, accumulated in compute precision, stored.
    void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) const;

private:
    PrecisionFormat storage_;
    PrecisionFormat compute_;
};

} // namespace gadi
