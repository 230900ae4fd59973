#include "gadi/precision.hpp"

#include <algorithm>
#include <array>

namespace gadi {

double PrecisionFormat::max_finite() const
{
    if (kind == FormatKind::Compensated || is_native_fp64())
        return std::numeric_limits<double>::max();
    return std::ldexp(2.0 - std::ldexp(1.0, 1 - significand_bits), emax());
}

PrecisionFormat make_format(std::string name, int significand_bits, int exponent_bits)
{
    if (significand_bits < 2 || exponent_bits < 2)
        throw InvalidConfig("format " + name + ": significand and exponent need at least 2 bits");
    if (significand_bits > 53 || exponent_bits > 11)
        throw InvalidConfig("format " + name + ": wider than binary64 cannot be emulated");
    return PrecisionFormat{std::move(name), significand_bits, exponent_bits, FormatKind::Ieee};
}

namespace formats {
const PrecisionFormat& bf16()
{
    static const PrecisionFormat f{"bf16", 8, 8, FormatKind::Ieee};
    return f;
}
const PrecisionFormat& fp16()
{
    static const PrecisionFormat f{"fp16", 11, 5, FormatKind::Ieee};
    return f;
}
const PrecisionFormat& fp32()
{
    static const PrecisionFormat f{"fp32", 24, 8, FormatKind::Ieee};
    return f;
}
const PrecisionFormat& fp64()
{
    static const PrecisionFormat f{"fp64", 53, 11, FormatKind::Ieee};
    return f;
}
const PrecisionFormat& fp64x2()
{
    static const PrecisionFormat f{"fp64x2", 106, 11, FormatKind::Compensated};
    return f;
}
} // namespace formats

const PrecisionFormat& format_by_name(std::string_view name)
{
    for (const PrecisionFormat* f : {&formats::bf16(), &formats::fp16(), &formats::fp32(),
                                     &formats::fp64(), &formats::fp64x2()}) {
        if (f->name == name)
            return *f;
    }
    throw InvalidConfig("unknown precision '" + std::string(name) +
                        "' (expected bf16|fp16|fp32|fp64|fp64x2)");
}

std::vector<std::string> format_names()
{
    return {"bf16", "fp16", "fp32", "fp64", "fp64x2"};
}

namespace detail {

double quantize_subnormal(double x, const PrecisionFormat& fmt, bool flush)
{
    // Below the normal range of fmt the spacing is fixed at 2^(emin - p + 1).
    if (flush && std::fabs(x) < fmt.min_normal())
        return std::copysign(0.0, x);
    const int quantum_exp = fmt.emin() - fmt.significand_bits + 1;
    const double scaled = std::ldexp(x, -quantum_exp);
    const double r = std::ldexp(std::nearbyint(scaled), quantum_exp);
    if (flush && r != 0.0 && std::fabs(r) < fmt.min_normal())
        return std::copysign(0.0, x);
    return r == 0.0 ? std::copysign(0.0, x) : r;
}

} // namespace detail

void quantize_inplace(std::span<double> values, const PrecisionFormat& fmt, QuantizeOptions opts)
{
    if (fmt.kind == FormatKind::Compensated || fmt.is_native_fp64())
        return;
    for (double& v : values)
        v = quantize(v, fmt, opts);
}

std::vector<double> quantize(std::span<const double> values, const PrecisionFormat& fmt,
                             QuantizeOptions opts)
{
    std::vector<double> out(values.begin(), values.end());
    quantize_inplace(out, fmt, opts);
    return out;
}

} // namespace gadi
