#include "doctest.h"

#include <Eigen/Dense>

#include "gadi/analysis.hpp"
#include "gadi/problems.hpp"
#include "oracles.hpp"

using namespace gadi;

namespace {

double min_sym_eig(const CsrMatrix& a)
{
    const Eigen::MatrixXd d = to_eigen(a);
    const Eigen::MatrixXd m = 0.5 * (d + d.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

void check_manufactured(const Problem& p)
{
    validate(p);
    REQUIRE(p.exact_solution.has_value());
    for (double v : *p.exact_solution)
        CHECK(v == 1.0);
    const auto ax = spmv(p.a, *p.exact_solution);
    CHECK(oracle::rel_diff(ax, p.b) <= 10 * p.size() * unit_roundoff(formats::fp64()));
}

} // namespace

TEST_SUITE("problems") {

TEST_CASE("cdr2d matches the dense Kronecker oracle")
{
    for (Index ng : {2, 3, 5}) {
        const auto p = build_cdr_2d(ng, 1.0);
        const double shift = 100.0 / ((ng + 1.0) * (ng + 1.0));
        // With r = 1 the sub-diagonal is -1 + r and the super-diagonal -1 - r.
        const auto t = oracle::tridiag(ng, -1.0 + 1.0, 2.0 + shift, -1.0 - 1.0);
        const auto i = oracle::identity(ng);
        const auto expect = oracle::plus(oracle::kron(i, t), oracle::kron(t, i));
        const auto got = oracle::dense(p.a);
        REQUIRE(got.size() == expect.size());
        for (std::size_t r = 0; r < got.size(); ++r)
            for (std::size_t c = 0; c < got.size(); ++c)
                CHECK(got[r][c] == doctest::Approx(expect[r][c]).epsilon(1e-15));
        check_manufactured(p);
        CHECK(p.label == "cdr2d");
    }
}

TEST_CASE("cdr2d n_g = 2 hand values")
{
    const auto d = oracle::dense(build_cdr_2d(2, 1.0).a);
    CHECK(d[0][0] == doctest::Approx(2 * (2 + 100.0 / 9)));
    CHECK(d[1][0] == 0.0);
    CHECK(d[0][1] == -2.0);
}

TEST_CASE("cdr2d dimension law and symmetry at r = 0")
{
    for (Index ng : {4, 8, 16})
        CHECK(build_cdr_2d(ng).size() == ng * ng);
    CHECK(is_symmetric(build_cdr_2d(6, 0.0).a));
    CHECK_FALSE(is_symmetric(build_cdr_2d(6, 1.0).a));
    CHECK_THROWS_AS(build_cdr_2d(1), InvalidConfig);
}

TEST_CASE("cd3d variants")
{
    const Index ng = 2;
    const double r = 1.0 / (2 * ng + 2);
    const auto i = oracle::identity(ng);
    const auto tx = oracle::tridiag(ng, -1 - r, 2.0, -1 + r);
    for (auto variant : {Cd3dVariant::Consistent, Cd3dVariant::Literal}) {
        const auto ty = oracle::tridiag(ng, -1 - r, variant == Cd3dVariant::Consistent ? 2.0 : 0.0, -1 + r);
        const auto expect = oracle::plus(oracle::plus(oracle::kron(oracle::kron(tx, i), i),
                                                      oracle::kron(oracle::kron(i, ty), i)),
                                         oracle::kron(oracle::kron(i, i), ty));
        const auto p = build_cd_3d(ng, variant);
        const auto got = oracle::dense(p.a);
        for (std::size_t a = 0; a < got.size(); ++a)
            for (std::size_t b = 0; b < got.size(); ++b)
                CHECK(got[a][b] == doctest::Approx(expect[a][b]).epsilon(1e-15));
        check_manufactured(p);
    }
    CHECK(build_cd_3d(4).params.at("r") == doctest::Approx(0.1));
    for (double v : build_cd_3d(4, Cd3dVariant::Literal).a.diagonal_values())
        CHECK(v == 2.0);
    for (double v : build_cd_3d(4).a.diagonal_values())
        CHECK(v == 6.0);
    CHECK(build_cd_3d(5).size() == 125);
    CHECK(cd3d_variant_by_name("literal") == Cd3dVariant::Literal);
    CHECK(cd3d_variant_name(Cd3dVariant::Consistent) == "consistent");
    CHECK_THROWS_AS(cd3d_variant_by_name("other"), InvalidConfig);
    CHECK_THROWS_AS(build_cd_3d(100000), SizeOverflow);
}

TEST_CASE("symmetric part is positive definite for cdr2d and consistent cd3d")
{
    for (Index ng : {4, 8, 16})
        CHECK(min_sym_eig(build_cdr_2d(ng).a) > 0.0);
    for (Index ng : {4, 8})
        CHECK(min_sym_eig(build_cd_3d(ng).a) > 0.0);
    // The literal reading zeroes two diagonals and loses definiteness.
    CHECK(min_sym_eig(build_cd_3d(8, Cd3dVariant::Literal).a) < 0.0);
}

TEST_CASE("complex reaction-diffusion block form")
{
    CHECK(complex_rd_nu(64) == doctest::Approx(1e-5));
    CHECK(complex_rd_nu(32) == doctest::Approx(4e-5));
    CHECK(kDefaultPotentialScale == 1e4);
    const Index ng = 6, m = ng * ng;
    const auto p = build_complex_rd(ng, 1e4, 3);
    CHECK(p.size() == 2 * m);
    for (Index i = 0; i < m; ++i) {
        CHECK(p.a.at(i, i + m) == -p.a.at(i + m, i));
        CHECK(p.a.at(i + m, i) == 1e4 * counter_uniform(3, static_cast<std::uint64_t>(i)));
        CHECK(p.a.at(i, i) == p.a.at(i + m, i + m));
    }
    check_manufactured(p);

    // Laplacian block against the dense oracle for both scalings.
    const double h = 1.0 / (ng + 1);
    const auto t = oracle::tridiag(ng, -1, 2, -1);
    const auto i = oracle::identity(ng);
    const auto lap = oracle::plus(oracle::kron(i, t), oracle::kron(t, i));
    for (auto scaling : {LaplacianScaling::NuOverH2, LaplacianScaling::Nu}) {
        const double c = complex_rd_nu(ng) / (scaling == LaplacianScaling::NuOverH2 ? h * h : 1.0);
        const auto q = build_complex_rd(ng, 1e4, 0, scaling);
        for (Index r = 0; r < m; ++r)
            for (Index col = 0; col < m; ++col)
                CHECK(q.a.at(r, col) == doctest::Approx(c * lap[r][col]).epsilon(1e-14));
    }
}

TEST_CASE("counter generator")
{
    // Reference value of the documented SplitMix64 output for seed 0, counter 0.
    std::uint64_t z = 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    CHECK(counter_uniform(0, 0) == static_cast<double>(z >> 11) * std::ldexp(1.0, -53));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const double v = counter_uniform(17, k);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    CHECK(counter_uniform(1, 5) != counter_uniform(2, 5));
}

TEST_CASE("property: generators are deterministic")
{
    CHECK(build_cdr_2d(9).a == build_cdr_2d(9).a);
    CHECK(build_cd_3d(5).b == build_cd_3d(5).b);
    const auto a = build_complex_rd(7, 1e4, 11), b = build_complex_rd(7, 1e4, 11);
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
    CHECK_FALSE(build_complex_rd(7, 1e4, 12).a == a.a);
}

TEST_CASE("family names and validation")
{
    CHECK(family_by_name("crd") == ProblemFamily::ComplexRd);
    CHECK(family_name(ProblemFamily::Cd3d) == "cd3d");
    CHECK_THROWS_AS(family_by_name("poisson"), InvalidConfig);
    Problem p = build_cdr_2d(3);
    p.b.pop_back();
    CHECK_THROWS_AS(validate(p), DimensionMismatch);
}

} // TEST_SUITE
