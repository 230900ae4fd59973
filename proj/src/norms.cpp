#include "gadi/norms.hpp"

#include <cmath>

#include "gadi/problems.hpp"

namespace gadi {

double norm2(std::span<const double> v)
{
    // Scaled accumulation avoids overflow for large entries.
    double scale = 0.0, ssq = 1.0;
    for (double x : v) {
        if (x == 0.0)
            continue;
        const double ax = std::fabs(x);
        if (scale < ax) {
            ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
            scale = ax;
        } else {
            ssq += (ax / scale) * (ax / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double spectral_norm_estimate(const CsrMatrix& a, PowerIterationOptions opts)
{
    if (a.nnz() == 0)
        return 0.0;
    const CsrMatrix at = transpose(a);
    std::vector<double> v(static_cast<std::size_t>(a.cols()));
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = counter_uniform(opts.seed, i) - 0.5;
    double nv = norm2(v);
    for (double& x : v)
        x /= nv;

    double sigma = 0.0;
    for (int it = 0; it < opts.maxit; ++it) {
        const std::vector<double> w = spmv(a, v);
        const double s_new = norm2(w);
        std::vector<double> z = spmv(at, w);
        const double nz = norm2(z);
        if (nz == 0.0)
            return s_new;
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = z[i] / nz;
        if (it > 0 && std::fabs(s_new - sigma) <= opts.rel_tol * s_new) {
            sigma = s_new;
            break;
        }
        sigma = s_new;
    }
    return norm2(spmv(a, v));
}

} // namespace gadi
