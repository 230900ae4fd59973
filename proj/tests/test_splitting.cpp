#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "gadi/alphaselect.hpp"
#include "gadi/analysis.hpp"
#include "gadi/problems.hpp"
#include "gadi/splitting.hpp"
#include "oracles.hpp"

using namespace gadi;

TEST_SUITE("splitting") {

TEST_CASE("identity and skew examples")
{
    const auto sp = make_hss_splitting(CsrMatrix::identity(3), 1.0, formats::fp64());
    CHECK(sp.m == CsrMatrix::identity(3));
    CHECK(sp.n.nnz() == 0);
    CHECK(sp.h == CsrMatrix::identity(3).scaled(2.0));
    CHECK(sp.s == CsrMatrix::identity(3));
    CHECK(sp.alpha_minus_n == CsrMatrix::identity(3));

    const auto j = CsrMatrix::from_dense(2, 2, std::vector<double>{0, 1, -1, 0});
    const auto sk = make_hss_splitting(j, 2.0, formats::fp64());
    CHECK(sk.h == CsrMatrix::identity(2).scaled(2.0));
    CHECK(sk.s == add(CsrMatrix::identity(2).scaled(2.0), j));
    CHECK(sk.alpha_minus_n == transpose(sk.s));
}

TEST_CASE("errors")
{
    CHECK_THROWS_AS(make_hss_splitting(CsrMatrix(2, 3), 1.0, formats::fp64()), NonSquare);
    CHECK_THROWS_AS(make_hss_splitting(CsrMatrix::identity(2), 0.0, formats::fp64()), NonPositiveAlpha);
    CHECK_THROWS_AS(make_hss_splitting(CsrMatrix::identity(2), -1.0, formats::fp64()), NonPositiveAlpha);
    const auto sp = make_hss_splitting(CsrMatrix::identity(2), 1.0, formats::fp64());
    CHECK_THROWS_AS(with_alpha(sp, std::nan("")), NonPositiveAlpha);
}

TEST_CASE("property: random splittings satisfy the structural identities")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> la(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = oracle::random_sparse(rng, 12, 12, 0.3);
        const double alpha = std::pow(10.0, la(rng));
        const auto sp = make_hss_splitting(a, alpha, formats::bf16());
        const double tol = 4 * unit_roundoff(formats::fp64()) * (a.max_abs() + alpha);
        CHECK(add(add(sp.m, sp.n), a, 1.0, -1.0).max_abs() <= tol);
        CHECK(is_symmetric(sp.h));
        CHECK(is_skew_symmetric(shift_diagonal(sp.s, -alpha)));
        CHECK(add(shift_diagonal(sp.h, -alpha), sp.m, 1.0, -1.0).max_abs() <= tol);
        CHECK(add(shift_diagonal(sp.s, -alpha), sp.n, 1.0, -1.0).max_abs() <= tol);
        // H + S = 2 alpha I + A
        CHECK(add(add(sp.h, sp.s), shift_diagonal(a, 2 * alpha), 1.0, -1.0).max_abs() <= tol);
        CHECK(sp.h_low == sp.h.quantized(formats::bf16()));
        CHECK(sp.s_low == sp.s.quantized(formats::bf16()));
        CHECK(sp.alpha_minus_n_low == sp.alpha_minus_n.quantized(formats::bf16()));
        CHECK(sp.alpha == alpha);
    }
}

TEST_CASE("with_alpha equals a fresh splitting")
{
    const auto a = build_cdr_2d(5).a;
    const auto base = make_hss_splitting(a, 1.0, formats::fp32());
    const auto moved = with_alpha(base, 0.3);
    const auto fresh = make_hss_splitting(a, 0.3, formats::fp32());
    CHECK(moved.h == fresh.h);
    CHECK(moved.s == fresh.s);
    CHECK(moved.alpha_minus_n == fresh.alpha_minus_n);
    CHECK(moved.h_low == fresh.h_low);
    CHECK(moved.s_low == fresh.s_low);
}

TEST_CASE("H is positive definite on the benchmark problems")
{
    for (const auto& p : {build_cdr_2d(8), build_cd_3d(5), build_complex_rd(8)}) {
        const auto sp = make_hss_splitting(p.a, 0.1, formats::fp64());
        const Eigen::MatrixXd h = to_eigen(sp.h);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("property: increasing alpha never increases the condition number of H")
{
    const auto a = build_cdr_2d(6).a;
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : log_grid(-3.0, 3.0, 25)) {
        const auto sp = make_hss_splitting(a, alpha, formats::fp64());
        const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(sp.h), Eigen::EigenvaluesOnly).eigenvalues();
        const double kappa = ev.maxCoeff() / ev.minCoeff();
        CHECK(kappa <= prev * (1 + 1e-12));
        prev = kappa;
    }
}

} // TEST_SUITE
