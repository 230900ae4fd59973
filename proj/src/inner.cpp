#include "gadi/inner.hpp"

#include <algorithm>
#include <cmath>

namespace gadi {

namespace {

double true_relative_residual(const CsrMatrix& k, std::span<const double> x,
                              std::span<const double> rhs, double rhs_norm)
{
    const std::vector<double> r = residual(k, x, rhs, formats::fp64());
    double s = 0.0;
    for (double v : r)
        s += v * v;
    return std::sqrt(s) / rhs_norm;
}

double fp64_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

void check_square_rhs(const CsrMatrix& k, std::span<const double> rhs, const char* who)
{
    if (!k.is_square())
        throw NonSquare(std::string(who) + ": matrix must be square");
    if (static_cast<Index>(rhs.size()) != k.rows())
        throw DimensionMismatch(std::string(who) + ": rhs length mismatch");
}

} // namespace

int default_inner_maxit(Index n)
{
    const double m = 5.0 * std::sqrt(static_cast<double>(n));
    return static_cast<int>(std::clamp(std::ceil(m), 1.0, 10000.0));
}

InnerResult cg_spd(const CsrMatrix& h, std::span<const double> rhs, double tol, int maxit,
                   const Arith& arith)
{
    check_square_rhs(h, rhs, "cg_spd");
    const std::size_t n = rhs.size();
    InnerResult out{std::vector<double>(n, 0.0), {}};
    const double rhs_norm = fp64_norm(rhs);
    if (rhs_norm == 0.0) {
        out.stats.converged = true;
        return out;
    }

    std::vector<double> r(rhs.begin(), rhs.end());
    arith.store(r);
    std::vector<double> p = r;
    std::vector<double> q(n);
    double rr = arith.dot(r, r);
    const double bnorm = arith.round(std::sqrt(rr));
    auto& st = out.stats;
    st.final_relative_residual = 1.0;

    for (int it = 1; it <= maxit; ++it) {
        arith.spmv(h, p, q);
        const double pq = arith.dot(p, q);
        if (!(pq > 0.0) || !std::isfinite(pq)) {
            st.breakdown = true;
            break;
        }
        const double a = arith.div(rr, pq);
        arith.axpy(a, p, out.x);
        arith.axpy(-a, q, r);
        const double rr_new = arith.dot(r, r);
        st.iterations = it;
        st.final_relative_residual = std::sqrt(rr_new) / bnorm;
        if (st.final_relative_residual <= tol) {
            st.converged = true;
            break;
        }
        if (rr_new == 0.0)
            break;
        const double beta = arith.div(rr_new, rr);
        arith.xpay(r, beta, p);
        rr = rr_new;
    }
    st.true_relative_residual = true_relative_residual(h, out.x, rhs, rhs_norm);
    return out;
}

InnerResult cg_normal_skew(const CsrMatrix& s, const CsrMatrix& s_transpose,
                           std::span<const double> rhs, double tol, int maxit, const Arith& arith)
{
    check_square_rhs(s, rhs, "cg_normal_skew");
    if (s_transpose.rows() != s.cols() || s_transpose.cols() != s.rows())
        throw DimensionMismatch("cg_normal_skew: transpose has the wrong shape");
    const std::size_t n = rhs.size();
    InnerResult out{std::vector<double>(n, 0.0), {}};
    const double rhs_norm = fp64_norm(rhs);
    if (rhs_norm == 0.0) {
        out.stats.converged = true;
        return out;
    }

    std::vector<double> r(rhs.begin(), rhs.end());
    arith.store(r);
    std::vector<double> g(n), q(n);
    arith.spmv(s_transpose, r, g);
    std::vector<double> p = g;
    double gg = arith.dot(g, g);
    const double bnorm = arith.norm2(r);
    auto& st = out.stats;
    st.final_relative_residual = 1.0;

    for (int it = 1; it <= maxit; ++it) {
        arith.spmv(s, p, q);
        const double qq = arith.dot(q, q);
        if (!(qq > 0.0) || !std::isfinite(qq) || !(gg > 0.0)) {
            st.breakdown = true;
            break;
        }
        const double a = arith.div(gg, qq);
        arith.axpy(a, p, out.x);
        arith.axpy(-a, q, r);
        st.iterations = it;
        st.final_relative_residual = std::sqrt(arith.dot(r, r)) / bnorm;
        if (st.final_relative_residual <= tol) {
            st.converged = true;
            break;
        }
        arith.spmv(s_transpose, r, g);
        const double gg_new = arith.dot(g, g);
        if (gg_new == 0.0)
            break;
        const double beta = arith.div(gg_new, gg);
        arith.xpay(g, beta, p);
        gg = gg_new;
    }
    st.true_relative_residual = true_relative_residual(s, out.x, rhs, rhs_norm);
    return out;
}

InnerResult cg_normal_skew(const CsrMatrix& s, std::span<const double> rhs, double tol, int maxit,
                           const Arith& arith)
{
    return cg_normal_skew(s, transpose(s), rhs, tol, maxit, arith);
}

} // namespace gadi
