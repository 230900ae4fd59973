#include "gadi/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gadi/arith.hpp"
#include "gadi/inner.hpp"

namespace gadi {

namespace {

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v)
{
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double largest_singular_value(const Eigen::MatrixXd& m)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

double dense_condition(const Eigen::MatrixXd& m)
{
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) == 0.0)
        throw SingularMatrix("matrix is singular");
    return s(0) / s(s.size() - 1);
}

void check_dense_cap(Index n, Index cap)
{
    if (n > cap)
        throw DenseCapExceeded("dense analysis limited to n <= " + std::to_string(cap) +
                               ", got n = " + std::to_string(n));
}

} // namespace

Eigen::MatrixXd to_eigen(const CsrMatrix& a)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    const auto offs = a.row_offsets();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = offs[i]; k < offs[i + 1]; ++k)
            d(i, a.col_indices()[k]) = a.values()[k];
    return d;
}

double forward_error(std::span<const double> xhat, std::span<const double> x)
{
    if (xhat.size() != x.size())
        throw DimensionMismatch("forward_error: length mismatch");
    const double nx = norm2(x);
    if (nx == 0.0)
        throw ZeroReference("forward error needs a nonzero reference solution");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = xhat[i] - x[i];
    return norm2(d) / nx;
}

double backward_error(const CsrMatrix& a, std::span<const double> b, std::span<const double> xhat,
                      std::optional<double> a_norm)
{
    const double an = a_norm ? *a_norm : spectral_norm_estimate(a);
    const std::vector<double> r = residual(a, xhat, b, formats::fp64());
    const double denom = an * norm2(xhat) + norm2(b);
    if (denom == 0.0)
        return 0.0;
    return norm2(r) / denom;
}

double mu_k(const CsrMatrix& a, std::span<const double> xhat, std::span<const double> x,
            std::optional<double> a_norm)
{
    if (xhat.size() != x.size())
        throw DimensionMismatch("mu_k: length mismatch");
    std::vector<double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        e[i] = x[i] - xhat[i];
    const double en = norm2(e);
    if (en == 0.0)
        throw ZeroError("mu is undefined when xhat equals x");
    const double an = a_norm ? *a_norm : spectral_norm_estimate(a);
    return norm2(spmv(a, e)) / (an * en);
}

Eigen::VectorXd DenseIterationOperator::g(std::span<const double> b) const
{
    return g_map * as_eigen(b);
}

DenseIterationOperator dense_iteration_operator(const CsrMatrix& a, const CsrMatrix& m,
                                                const CsrMatrix& n, double alpha, double omega,
                                                Index dense_cap)
{
    if (!a.is_square())
        throw NonSquare("dense_iteration_operator needs a square matrix");
    check_dense_cap(a.rows(), dense_cap);
    const Eigen::Index dim = a.rows();
    const Eigen::MatrixXd ad = to_eigen(a), md = to_eigen(m), nd = to_eigen(n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd h = alpha * eye + md;
    const Eigen::MatrixXd s = alpha * eye + nd;
    const Eigen::MatrixXd rhs = alpha * alpha * eye + md * nd - (1.0 - omega) * alpha * ad;

    const Eigen::PartialPivLU<Eigen::MatrixXd> h_lu(h), s_lu(s), at_lu(ad.transpose());
    DenseIterationOperator op;
    op.t_f = s_lu.solve(h_lu.solve(rhs));
    op.g_map = (2.0 - omega) * alpha * s_lu.solve(h_lu.solve(eye));
    // T_B = A T_F A^{-1}  <=>  T_B^T = A^{-T} (A T_F)^T
    const Eigen::MatrixXd atf = ad * op.t_f;
    op.t_b = at_lu.solve(atf.transpose()).transpose();
    op.c_f = largest_singular_value(eye - op.t_f);
    op.c_b = largest_singular_value(eye - op.t_b);
    op.rho = spectral_radius(op.t_f);
    return op;
}

double spectral_radius(const Eigen::MatrixXd& t)
{
    if (t.rows() != t.cols())
        throw NonSquare("spectral_radius needs a square matrix");
    if (t.rows() == 0)
        return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(t, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SingularRange singular_range(const CsrMatrix& a, ConditionOptions opts)
{
    if (!a.is_square())
        throw NonSquare("condition estimate needs a square matrix");
    if (a.rows() <= opts.dense_cap) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(to_eigen(a));
        const auto& s = svd.singularValues();
        if (!(s(s.size() - 1) > 0.0))
            throw SingularMatrix("matrix is singular");
        return {s(0), s(s.size() - 1)};
    }

    SingularRange out;
    out.sigma_max = spectral_norm_estimate(a, {opts.rel_tol, opts.maxit * 4, 0x5eed});

    // Inverse iteration on A^T A: v <- A^{-1} A^{-T} v.
    const bool symmetric = is_symmetric(a);
    const CsrMatrix at = transpose(a);
    const Arith fp64(formats::fp64());
    const int solve_maxit = static_cast<int>(std::min<Index>(20 * a.rows(), 200000));
    const auto solve = [&](const CsrMatrix& k, const CsrMatrix& kt, std::span<const double> rhs) {
        InnerResult res = symmetric ? cg_spd(k, rhs, opts.solve_tol, solve_maxit, fp64)
                                    : cg_normal_skew(k, kt, rhs, opts.solve_tol, solve_maxit, fp64);
        if (res.stats.breakdown || !(res.stats.true_relative_residual < 1e-4))
            throw SingularMatrix("inverse iteration solve failed to converge");
        return std::move(res.x);
    };

    std::vector<double> v(static_cast<std::size_t>(a.rows()));
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = counter_uniform(0xc0de, i) - 0.5;
    double prev = 0.0;
    for (int it = 0; it < opts.maxit; ++it) {
        const double nv = norm2(v);
        for (double& x : v)
            x /= nv;
        std::vector<double> w = solve(at, a, v);
        v = solve(a, at, w);
        const double nvv = norm2(v);
        if (!std::isfinite(nvv) || nvv == 0.0)
            throw SingularMatrix("inverse iteration diverged");
        std::vector<double> unit(v);
        for (double& x : unit)
            x /= nvv;
        const double est = norm2(spmv(a, unit));
        if (!(est > 0.0))
            throw SingularMatrix("inverse iteration collapsed to zero");
        if (it > 0 && std::fabs(est - prev) <= opts.rel_tol * est) {
            prev = est;
            break;
        }
        prev = est;
    }
    out.sigma_min = prev;
    return out;
}

double condition_estimate(const CsrMatrix& a, ConditionOptions opts)
{
    return singular_range(a, opts).condition();
}

std::vector<double> lambda_sequence(const DenseIterationOperator& op,
                                    const std::vector<std::vector<double>>& vectors,
                                    ErrorKind which)
{
    const Eigen::MatrixXd& t = which == ErrorKind::Forward ? op.t_f : op.t_b;
    std::vector<double> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (static_cast<Eigen::Index>(v.size()) != t.cols())
            throw DimensionMismatch("lambda_sequence: vector length mismatch");
        const Eigen::Map<const Eigen::VectorXd> e(v.data(), t.cols());
        const double en = e.norm();
        if (en == 0.0)
            throw ZeroError("lambda is undefined for a zero error vector");
        out.push_back((t * e).norm() / en);
    }
    return out;
}

DimensionConstant sqrt_dimension_constant()
{
    return [](double n) { return std::sqrt(n); };
}

TheoryBounds theory_bounds(const TheoryInputs& in, const DimensionConstant& c_of_n)
{
    TheoryBounds tb;
    const double c = c_of_n(in.n);
    tb.c_n = c;
    const double khks = in.kappa_h * in.kappa_s;
    const double ka_sum = in.kappa_a * (in.kappa_h + in.kappa_s);
    tb.min_term_f = std::min({in.kappa_hs * in.kappa_h, ka_sum, khks});
    tb.min_term_b = std::min({in.kappa_hs * in.kappa_s, ka_sum, khks});

    tb.beta_f = in.lambda_f + c * in.c_f * tb.min_term_f * in.u_s +
                c * in.c_f * in.mu * in.kappa_a * in.u_s + c * in.c_f * in.kappa_a * in.u_r +
                c * in.c_f * in.u;
    tb.zeta_f = c * (in.u + in.c_f * in.kappa_a * in.u_r);
    tb.beta_b = in.lambda_b + c * in.c_b * tb.min_term_b * in.u_s + c * in.c_b * in.kappa_a * in.u;
    tb.zeta_b = c * (in.u + in.c_b * in.u_r);

    tb.beta_f_simplified = in.lambda_f + c * khks * in.u_s;
    tb.zeta_f_simplified = c * (in.u + in.kappa_a * in.u_r);
    tb.beta_b_simplified = in.lambda_b + c * khks * in.u_s;
    tb.zeta_b_simplified = c * in.u;
    return tb;
}

TheoryComparison compare_with_theory(const Problem& problem, const Splitting& sp,
                                     const GadiConfig& cfg, const SolveReport& report,
                                     const DimensionConstant& c_of_n, Index dense_cap)
{
    if (!problem.exact_solution)
        throw InvalidConfig("theory comparison needs a known exact solution");
    if (report.iterates.size() != report.history.size())
        throw InvalidConfig("theory comparison needs a report with recorded iterates");
    check_dense_cap(problem.size(), dense_cap);

    const auto& x = *problem.exact_solution;
    const std::size_t n = x.size();
    const DenseIterationOperator op =
        dense_iteration_operator(problem.a, sp.m, sp.n, sp.alpha, cfg.omega, dense_cap);

    TheoryComparison tc;
    const Eigen::MatrixXd hd = to_eigen(sp.h), sd = to_eigen(sp.s);
    tc.kappa_a = dense_condition(to_eigen(problem.a));
    tc.kappa_h = dense_condition(hd);
    tc.kappa_s = dense_condition(sd);
    tc.kappa_hs = dense_condition(hd * sd);
    tc.rho = op.rho;
    tc.c_f = op.c_f;
    tc.c_b = op.c_b;

    // iterate 0 is the zero vector
    std::vector<std::vector<double>> errors, residuals;
    std::vector<double> fe, be;
    const double a_norm = report.a_norm;
    const auto push_state = [&](std::span<const double> xk) {
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i)
            e[i] = x[i] - xk[i];
        errors.push_back(std::move(e));
        residuals.push_back(residual(problem.a, xk, problem.b, formats::fp64()));
        fe.push_back(forward_error(xk, x));
        be.push_back(backward_error(problem.a, problem.b, xk, a_norm));
    };
    push_state(std::vector<double>(n, 0.0));
    for (const auto& xk : report.iterates)
        push_state(xk);

    TheoryInputs in;
    in.n = static_cast<double>(n);
    in.kappa_a = tc.kappa_a;
    in.kappa_h = tc.kappa_h;
    in.kappa_s = tc.kappa_s;
    in.kappa_hs = tc.kappa_hs;
    in.u = unit_roundoff(cfg.working);
    in.u_r = unit_roundoff(cfg.residual);
    in.u_s = unit_roundoff(cfg.solver);
    in.c_f = op.c_f;
    in.c_b = op.c_b;

    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const double en = norm2(errors[k]);
        const double rn = norm2(residuals[k]);
        if (en == 0.0 || rn == 0.0)
            break;
        TheoryRow row;
        row.iteration = static_cast<int>(k);
        row.forward_error = fe[k];
        row.backward_error = be[k];
        row.forward_ratio = norm2(errors[k + 1]) / en;
        row.backward_ratio = norm2(residuals[k + 1]) / rn;
        row.mu = norm2(spmv(problem.a, errors[k])) / (a_norm * en);
        row.lambda_f = lambda_sequence(op, {errors[k]}, ErrorKind::Forward).front();
        row.lambda_b = lambda_sequence(op, {residuals[k]}, ErrorKind::Backward).front();
        in.mu = row.mu;
        in.lambda_f = row.lambda_f;
        in.lambda_b = row.lambda_b;
        row.bounds = theory_bounds(in, c_of_n);
        tc.rows.push_back(row);
    }
    return tc;
}

} // namespace gadi
