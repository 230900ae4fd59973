#include "gadi/splitting.hpp"

#include <cmath>
#include <string>

namespace gadi {

namespace {

Splitting assemble(CsrMatrix m, CsrMatrix n, double alpha, const PrecisionFormat& fmt)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw NonPositiveAlpha("alpha must be positive and finite, got " + std::to_string(alpha));
    Splitting sp;
    sp.alpha = alpha;
    sp.h = shift_diagonal(m, alpha);
    sp.s = shift_diagonal(n, alpha);
    sp.alpha_minus_n = shift_diagonal(n.scaled(-1.0), alpha);
    sp.m = std::move(m);
    sp.n = std::move(n);
    sp.solver_format = fmt;
    sp.h_low = sp.h.quantized(fmt);
    sp.s_low = sp.s.quantized(fmt);
    sp.alpha_minus_n_low = sp.alpha_minus_n.quantized(fmt);
    return sp;
}

} // namespace

Splitting make_hss_splitting(const CsrMatrix& a, double alpha, const PrecisionFormat& solver_format)
{
    if (!a.is_square())
        throw NonSquare("splitting needs a square matrix");
    auto [m, n] = symm_skew_split(a);
    return assemble(std::move(m), std::move(n), alpha, solver_format);
}

Splitting with_alpha(const Splitting& base, double alpha)
{
    return assemble(base.m, base.n, alpha, base.solver_format);
}

} // namespace gadi
