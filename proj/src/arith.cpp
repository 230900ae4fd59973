#include "gadi/arith.hpp"

#include <cmath>

#include "gadi/compensated.hpp"

namespace gadi {

Arith::Arith(const PrecisionFormat& storage, bool strict_model)
    : storage_(storage), compute_(storage)
{
    if (!strict_model && storage.kind == FormatKind::Ieee &&
        unit_roundoff(storage) > unit_roundoff(formats::fp32()))
        compute_ = formats::fp32();
}

double Arith::dot(std::span<const double> x, std::span<const double> y) const
{
    if (x.size() != y.size())
        throw DimensionMismatch("dot: length mismatch");
    if (compute_.kind == FormatKind::Compensated)
        return compensated::dot(x, y);
    if (compute_.is_native_fp64()) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += x[i] * y[i];
        return s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s = round(s + round(x[i] * y[i]));
    return s;
}

double Arith::norm2(std::span<const double> x) const
{
    return round(std::sqrt(dot(x, x)));
}

void Arith::axpy(double a, std::span<const double> x, std::span<double> y) const
{
    if (x.size() != y.size())
        throw DimensionMismatch("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = store(round(y[i] + round(a * x[i])));
}

void Arith::xpay(std::span<const double> x, double a, std::span<double> y) const
{
    if (x.size() != y.size())
        throw DimensionMismatch("xpay: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = store(round(x[i] + round(a * y[i])));
}

void Arith::scal(double a, std::span<double> x) const
{
    for (double& v : x)
        v = store(round(a * v));
}

void Arith::spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) const
{
    spmv_into(a, x, y, compute_);
    store(y);
}

} // namespace gadi
