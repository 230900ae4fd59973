#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "gadi/analysis.hpp"
#include "gadi/problems.hpp"
#include "gadi/splitting.hpp"
#include "oracles.hpp"

using namespace gadi;

namespace {

Eigen::VectorXd as_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Random SPD M plus skew N of size n, stored sparse.
std::pair<CsrMatrix, CsrMatrix> random_hss_pair(std::mt19937_64& rng, Index n)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd b(n, n), c(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            b(i, j) = g(rng);
            c(i, j) = g(rng);
        }
    const Eigen::MatrixXd m = b * b.transpose() / static_cast<double>(n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd s = c - c.transpose();
    std::vector<double> mv(m.data(), m.data() + n * n), sv(n * n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            sv[i * n + j] = s(i, j);
    return {CsrMatrix::from_dense(n, n, mv), CsrMatrix::from_dense(n, n, sv)};
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("forward_error")
{
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(forward_error(x, x) == 0.0);
    CHECK(forward_error(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 0.0}) == 1.0);
    CHECK_THROWS_AS(forward_error(x, std::vector<double>{0.0, 0.0, 0.0}), ZeroReference);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> a(50), b(50), d(50);
        for (std::size_t i = 0; i < 50; ++i) {
            a[i] = u(rng);
            b[i] = a[i] + 1e-6 * u(rng);
            d[i] = b[i] - a[i];
        }
        CHECK(forward_error(b, a) == doctest::Approx(oracle::norm2(d) / oracle::norm2(a)).epsilon(1e-12));
    }
}

TEST_CASE("backward_error hand cases")
{
    const auto id = CsrMatrix::identity(2);
    const std::vector<double> b{1.0, 0.0};
    CHECK(backward_error(id, b, std::vector<double>{0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(backward_error(id, b, std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0 / (std::sqrt(2.0) + 1)).epsilon(1e-6));
    const auto p = build_cdr_2d(6);
    CHECK(backward_error(p.a, p.b, *p.exact_solution) <= p.size() * unit_roundoff(formats::fp64()));
}

TEST_CASE("mu_k extremes and range")
{
    const auto d = CsrMatrix::diagonal(std::vector<double>{1.0, 10.0});
    const std::vector<double> x{1.0, 1.0};
    CHECK(mu_k(d, std::vector<double>{1.0, 0.0}, x, 10.0) == doctest::Approx(1.0));
    CHECK(mu_k(d, std::vector<double>{0.0, 1.0}, x, 10.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(mu_k(d, x, x), ZeroError);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
        const auto a = shift_diagonal(oracle::random_sparse(rng, 10, 10, 0.5), 0.5);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
        const double smax = svd.singularValues()(0), smin = svd.singularValues()(9);
        std::vector<double> xt(10), xh(10);
        for (std::size_t i = 0; i < 10; ++i) {
            xt[i] = g(rng);
            xh[i] = g(rng);
        }
        const double mu = mu_k(a, xh, xt, smax);
        CHECK(mu <= 1.0 + 1e-12);
        CHECK(mu >= smin / smax - 1e-12);
    }
}

TEST_CASE("dense iteration operator closed form on the identity")
{
    const auto id = CsrMatrix::identity(4);
    const auto op = dense_iteration_operator(id, id, CsrMatrix(4, 4), 1.0, 1.0);
    CHECK((op.t_f - 0.5 * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-15);
    CHECK(op.rho == doctest::Approx(0.5));
    CHECK(op.c_f == doctest::Approx(0.5));
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    CHECK((op.g(b) - 0.5 * as_eigen(b)).norm() <= 1e-15);
    CHECK_THROWS_AS(dense_iteration_operator(id, id, CsrMatrix(4, 4), 1.0, 1.0, 3), DenseCapExceeded);
}

TEST_CASE("property: exact solution is a fixed point and T_B is similar to T_F")
{
    const auto p = build_cdr_2d(4);
    const auto sp = make_hss_splitting(p.a, 0.7, formats::fp64());
    for (double omega : {0.0, 0.5, 1.0, 1.5}) {
        const auto op = dense_iteration_operator(p.a, sp.m, sp.n, 0.7, omega);
        const Eigen::VectorXd x = as_eigen(*p.exact_solution);
        CHECK((op.t_f * x + op.g(p.b) - x).norm() <= 1e-12 * x.norm());
        const Eigen::MatrixXd a = to_eigen(p.a);
        CHECK((op.t_b * a - a * op.t_f).norm() <= 1e-10 * a.norm());
        CHECK(op.rho < 1.0);
        CHECK(std::fabs(spectral_radius(op.t_b) - op.rho) <= 1e-8);
    }
}

TEST_CASE("property: randomized splittings satisfy the convergence lemma")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> la(-2, 2);
    for (int t = 0; t < 10; ++t) {
        const auto [m, n] = random_hss_pair(rng, 20);
        const auto a = add(m, n);
        const double alpha = std::pow(10.0, la(rng));
        for (double omega : {0.0, 0.5, 1.0, 1.5}) {
            const auto op = dense_iteration_operator(a, m, n, alpha, omega);
            CHECK(op.rho < 1.0);
            CHECK(std::fabs(op.rho - spectral_radius(op.t_b)) <= 1e-6);
        }
    }
}

TEST_CASE("spectral_radius")
{
    CHECK(spectral_radius(Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(1.0));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = -0.25;
    CHECK(spectral_radius(d) == doctest::Approx(0.5));
    // Power-iteration cross-check on a matrix with a dominant real eigenvalue.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd t(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            t(i, j) = u(rng);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(12);
    double est = 0.0;
    for (int k = 0; k < 500; ++k) {
        const Eigen::VectorXd w = t * v;
        est = w.norm() / v.norm();
        v = w / w.norm();
    }
    CHECK(spectral_radius(t) == doctest::Approx(est).epsilon(1e-6));
}

TEST_CASE("condition estimates")
{
    CHECK(condition_estimate(CsrMatrix::identity(5)) == doctest::Approx(1.0));
    CHECK(condition_estimate(CsrMatrix::diagonal(std::vector<double>{1.0, 10.0})) == doctest::Approx(10.0));
    const auto p = build_cdr_2d(8);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(p.a));
    const double dense = svd.singularValues()(0) / svd.singularValues()(p.size() - 1);
    CHECK(condition_estimate(p.a) == doctest::Approx(dense).epsilon(1e-8));
    ConditionOptions iterative;
    iterative.dense_cap = 10;
    CHECK(condition_estimate(p.a, iterative) == doctest::Approx(dense).epsilon(0.05));
    const auto r = singular_range(p.a, iterative);
    CHECK(r.sigma_max == doctest::Approx(svd.singularValues()(0)).epsilon(1e-3));
    CHECK(r.sigma_min == doctest::Approx(svd.singularValues()(p.size() - 1)).epsilon(0.05));
    CHECK(spectral_norm_estimate(p.a) == doctest::Approx(svd.singularValues()(0)).epsilon(1e-5));
}

TEST_CASE("lambda_sequence")
{
    const auto d = CsrMatrix::diagonal(std::vector<double>{1.0, 2.0, 4.0});
    const auto [m, n] = symm_skew_split(d);
    const auto op = dense_iteration_operator(d, m, n, 1.0, 1.0);
    // Eigenvalues of T_F are 1 / (1 + lambda).
    const auto lam = lambda_sequence(op, {{0.0, 0.0, 3.0}, {0.0, -1.0, 0.0}}, ErrorKind::Forward);
    CHECK(lam[0] == doctest::Approx(0.2));
    CHECK(lam[1] == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(lambda_sequence(op, {{0.0, 0.0, 0.0}}, ErrorKind::Backward), ZeroError);

    const auto p = build_cdr_2d(5);
    const auto sp = make_hss_splitting(p.a, 1.0, formats::fp64());
    const auto op2 = dense_iteration_operator(p.a, sp.m, sp.n, 1.0, 1.0);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(op2.t_f);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> v(25);
        for (auto& e : v)
            e = g(rng);
        CHECK(lambda_sequence(op2, {v}, ErrorKind::Forward)[0] <= svd.singularValues()(0) * (1 + 1e-12));
    }
}

TEST_CASE("theory bounds formulas")
{
    TheoryInputs in;
    in.n = 100;
    in.kappa_a = 1e3;
    in.kappa_h = 20;
    in.kappa_s = 7;
    in.kappa_hs = 90;
    in.mu = 0.3;
    in.u = 1e-16;
    in.u_r = 1e-20;
    in.u_s = 1e-3;
    in.c_f = 1.2;
    in.c_b = 0.8;
    in.lambda_f = 0.4;
    in.lambda_b = 0.45;
    const auto tb = theory_bounds(in);
    const double c = 10.0;
    const double mf = std::min({90.0 * 20, 1e3 * 27, 140.0});
    const double mb = std::min({90.0 * 7, 1e3 * 27, 140.0});
    CHECK(tb.c_n == c);
    CHECK(tb.min_term_f == mf);
    CHECK(tb.min_term_b == mb);
    CHECK(tb.beta_f == doctest::Approx(0.4 + c * 1.2 * (mf * 1e-3 + 0.3 * 1e3 * 1e-3 + 1e3 * 1e-20 + 1e-16)));
    CHECK(tb.zeta_f == doctest::Approx(c * (1e-16 + 1.2 * 1e3 * 1e-20)));
    CHECK(tb.beta_b == doctest::Approx(0.45 + c * 0.8 * (mb * 1e-3 + 1e3 * 1e-16)));
    CHECK(tb.zeta_b == doctest::Approx(c * (1e-16 + 0.8 * 1e-20)));
    CHECK(tb.beta_f_simplified == doctest::Approx(0.4 + c * 140 * 1e-3));
    CHECK(tb.zeta_b_simplified == doctest::Approx(c * 1e-16));

    CHECK(tb.beta_f >= in.lambda_f);
    CHECK(tb.beta_b >= in.lambda_b);
    CHECK(tb.min_term_f <= 90.0 * 20);
    CHECK(tb.min_term_f <= 1e3 * 27);
    CHECK(tb.min_term_f <= 140.0);

    auto perturbed = in;
    perturbed.kappa_a = 1e9;
    CHECK(theory_bounds(perturbed).zeta_b == tb.zeta_b);

    TheoryInputs ideal = in;
    ideal.u = ideal.u_r = ideal.u_s = 0.0;
    const auto ti = theory_bounds(ideal);
    CHECK(ti.beta_f == ideal.lambda_f);
    CHECK(ti.zeta_f == 0.0);

    TheoryInputs unit = in;
    unit.kappa_h = unit.kappa_s = 1.0;
    unit.lambda_f = 0.0;
    CHECK(theory_bounds(unit).beta_f_simplified == doctest::Approx(c * in.u_s));

    const auto custom = theory_bounds(in, [](double n) { return n; });
    CHECK(custom.c_n == 100.0);
}

TEST_CASE("compare_with_theory on a recorded fp64 run")
{
    const auto p = build_cdr_2d(6);
    GadiConfig cfg;
    cfg.record_iterates = true;
    cfg.inner_tol = 1e-12;
    const auto sp = make_hss_splitting(p.a, cfg.alpha, cfg.solver);
    const auto rep = gadi_solve(p, sp, cfg);
    const auto tc = compare_with_theory(p, sp, cfg, rep);
    CHECK(tc.rows.size() == rep.history.size());
    CHECK(tc.rho < 1.0);
    CHECK(tc.kappa_a >= 1.0);
    for (const auto& row : tc.rows) {
        CHECK(row.mu >= 1.0 / tc.kappa_a - 1e-12);
        CHECK(row.mu <= 1.0 + 1e-12);
        CHECK(row.bounds.beta_f >= row.lambda_f);
    }
    GadiConfig bare = cfg;
    bare.record_iterates = false;
    CHECK_THROWS_AS(compare_with_theory(p, sp, bare, gadi_solve(p, sp, bare)), InvalidConfig);
}

} // TEST_SUITE
