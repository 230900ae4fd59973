#pragma once

// Software emulation of reduced-precision binary floating-point formats.
//
// Values are always held in IEEE binary64; a value "in format f" is a double
// that is exactly representable in f. Lower-precision arithmetic is realized
// by computing the binary64 result and rounding it to f (round-after-op).

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gadi/error.hpp"

namespace gadi {

enum class FormatKind {
    Ieee,        // binary format with significand/exponent widths
    Compensated, // fp64 storage with error-free-transformation accumulation
};

struct PrecisionFormat {
    std::string name;
    int significand_bits = 53; // including the implicit leading bit
    int exponent_bits = 11;
    FormatKind kind = FormatKind::Ieee;

    int emax() const { return (1 << (exponent_bits - 1)) - 1; }
    int emin() const { return 1 - emax(); }
    bool is_native_fp64() const
    {
        return kind == FormatKind::Ieee && significand_bits >= 53 && exponent_bits >= 11;
    }
    // Largest finite value.
    double max_finite() const;
    // Smallest positive normal value.
    double min_normal() const { return std::ldexp(1.0, emin()); }

    friend bool operator==(const PrecisionFormat& a, const PrecisionFormat& b)
    {
        return a.significand_bits == b.significand_bits && a.exponent_bits == b.exponent_bits &&
               a.kind == b.kind;
    }
};

// Throws InvalidConfig when significand_bits < 2 or exponent_bits < 2, or
// when the format is wider than binary64 (except the compensated pseudo-format).
PrecisionFormat make_format(std::string name, int significand_bits, int exponent_bits);

namespace formats {
const PrecisionFormat& bf16();
const PrecisionFormat& fp16();
const PrecisionFormat& fp32();
const PrecisionFormat& fp64();
// Pseudo-format for "extra precision": fp64 storage, compensated dot products
// and sums whose effective roundoff behaves like u_fp64^2.
const PrecisionFormat& fp64x2();
} // namespace formats

// Resolves bf16|fp16|fp32|fp64|fp64x2. Throws InvalidConfig for unknown names.
const PrecisionFormat& format_by_name(std::string_view name);
std::vector<std::string> format_names();

// 2^-significand_bits (round-to-nearest).
inline double unit_roundoff(const PrecisionFormat& fmt)
{
    return std::ldexp(1.0, -fmt.significand_bits);
}

struct QuantizeOptions {
    bool strict = false;           // throw RangeOverflow instead of returning inf
    bool flush_subnormals = false; // results below min_normal become signed zero
};

namespace detail {

double quantize_subnormal(double x, const PrecisionFormat& fmt, bool flush);

// Round-to-nearest, ties-to-even onto fmt, operating on the binary64 bits.
inline double quantize_bits(double x, const PrecisionFormat& fmt, bool flush)
{
    if (fmt.kind == FormatKind::Compensated || fmt.is_native_fp64())
        return x;
    if (x == 0.0 || !std::isfinite(x))
        return x;

    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    const std::uint64_t sign = bits & 0x8000000000000000ull;
    std::uint64_t mag = bits & 0x7fffffffffffffffull;
    const int biased = static_cast<int>(mag >> 52);
    const int e = biased - 1023;

    if (biased == 0 || e < fmt.emin())
        return detail::quantize_subnormal(x, fmt, flush);

    const int shift = 53 - fmt.significand_bits;
    if (shift > 0) {
        const std::uint64_t lsb = (mag >> shift) & 1u;
        mag += (std::uint64_t{1} << (shift - 1)) - 1u + lsb;
        mag &= ~((std::uint64_t{1} << shift) - 1u);
    }
    const int e_rounded = static_cast<int>(mag >> 52) - 1023;
    if (e_rounded > fmt.emax())
        return sign ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
    return std::bit_cast<double>(sign | mag);
}

} // namespace detail

inline double quantize(double x, const PrecisionFormat& fmt, QuantizeOptions opts = {})
{
    const double q = detail::quantize_bits(x, fmt, opts.flush_subnormals);
    if (opts.strict && std::isinf(q) && std::isfinite(x))
        throw RangeOverflow("value " + std::to_string(x) + " overflows format " + fmt.name);
    return q;
}

// Elementwise quantize; overflow check applies to every element in strict mode.
void quantize_inplace(std::span<double> values, const PrecisionFormat& fmt,
                      QuantizeOptions opts = {});
std::vector<double> quantize(std::span<const double> values, const PrecisionFormat& fmt,
                             QuantizeOptions opts = {});

enum class Op { Add, Sub, Mul, Div };

// fl(a op b): exact binary64 result rounded to fmt. Operands are expected to
// be representable in fmt already.
inline double fl_op(Op op, double a, double b, const PrecisionFormat& fmt,
                    QuantizeOptions opts = {})
{
    double r = 0.0;
    switch (op) {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div: r = a / b; break;
    }
    return quantize(r, fmt, opts);
}

} // namespace gadi
