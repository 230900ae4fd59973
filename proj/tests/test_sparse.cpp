#include "doctest.h"

#include <random>

#include "gadi/sparse_matrix.hpp"
#include "oracles.hpp"

using namespace gadi;

namespace {

void check_invariants(const CsrMatrix& a)
{
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    REQUIRE(off.size() == static_cast<std::size_t>(a.rows() + 1));
    REQUIRE(off.front() == 0);
    REQUIRE(off.back() == a.nnz());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = off[i]; k < off[i + 1]; ++k) {
            REQUIRE(col[k] >= 0);
            REQUIRE(col[k] < a.cols());
            if (k > off[i])
                REQUIRE(col[k] > col[k - 1]);
            REQUIRE(a.values()[k] != 0.0);
        }
}

} // namespace

TEST_SUITE("sparsemat") {

TEST_CASE("construction sums duplicates and prunes zeros")
{
    const auto a = CsrMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 2, 2.0}, {1, 0, 4.0}, {1, 1, 1.0}, {1, 1, -1.0}});
    check_invariants(a);
    CHECK(a.nnz() == 2);
    CHECK(a.at(0, 2) == 3.0);
    CHECK(a.at(1, 1) == 0.0);
    CHECK_THROWS_AS(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionMismatch);
    CHECK_THROWS_AS(CsrMatrix::from_csr(2, 2, {0, 1, 2}, {1, 0}, {1.0}), DimensionMismatch);
    CHECK_THROWS_AS(CsrMatrix::from_csr(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), DimensionMismatch);
    const auto pruned = CsrMatrix::from_csr(1, 3, {0, 2}, {0, 2}, {0.0, 5.0});
    CHECK(pruned.nnz() == 1);
    check_invariants(pruned);
}

TEST_CASE("spmv examples")
{
    const std::vector<double> x{1.0, 2.0, 3.0};
    for (const auto* f : {&formats::bf16(), &formats::fp16(), &formats::fp32(), &formats::fp64(), &formats::fp64x2()})
        CHECK(spmv(CsrMatrix::identity(3), x, *f) == x);
    CHECK(spmv(tridiag(3, -1, 2, -1), std::vector<double>{1, 1, 1}) == std::vector<double>{1, 0, 1});
    CHECK_THROWS_AS(spmv(CsrMatrix::identity(3), std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("fp64 spmv equals the dense product bit for bit")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const CsrMatrix a = oracle::random_sparse(rng, 8, 8, 0.4);
        std::vector<double> x(8);
        for (auto& v : x)
            v = u(rng);
        // Dense oracle accumulates left to right over the stored entries only.
        const auto d = oracle::dense(a);
        std::vector<double> y(8, 0.0);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j)
                if (d[i][j] != 0.0)
                    y[i] += d[i][j] * x[j];
        CHECK(spmv(a, x) == y);
    }
}

TEST_CASE("property: low-precision spmv satisfies the standard-model bound")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto* f : {&formats::bf16(), &formats::fp16(), &formats::fp32()}) {
        for (int trial = 0; trial < 20; ++trial) {
            const CsrMatrix a = oracle::random_sparse(rng, 30, 30, 0.3).quantized(*f);
            std::vector<double> x(30);
            for (auto& v : x)
                v = quantize(u(rng), *f);
            const auto y = spmv(a, x, *f);
            const auto exact = spmv(a, x);
            const auto d = oracle::dense(a);
            for (std::size_t i = 0; i < 30; ++i) {
                double row_abs = 0.0;
                int k = 0;
                for (std::size_t j = 0; j < 30; ++j) {
                    row_abs += std::fabs(d[i][j] * x[j]);
                    k += d[i][j] != 0.0;
                }
                const double gamma = k * unit_roundoff(*f) / (1 - k * unit_roundoff(*f));
                REQUIRE(std::fabs(y[i] - exact[i]) <= gamma * row_abs + 1e-300);
            }
        }
    }
}

TEST_CASE("compensated residual is exact where fp64 cancels")
{
    const auto a = CsrMatrix::from_dense(1, 3, std::vector<double>{1e16, 1.0, -1e16});
    const std::vector<double> x{1.0, 1.0, 1.0};
    const std::vector<double> b{2.0};
    CHECK(residual(a, x, b, formats::fp64x2())[0] == 1.0);
    CHECK(residual(a, x, b, formats::fp64())[0] != 1.0);
}

TEST_CASE("transpose")
{
    CHECK(transpose(CsrMatrix::identity(4)) == CsrMatrix::identity(4));
    const auto a = CsrMatrix::from_triplets(2, 3, {{0, 2, 5.0}});
    const auto t = transpose(a);
    CHECK(t.rows() == 3);
    CHECK(t.cols() == 2);
    CHECK(t.nnz() == 1);
    CHECK(t.at(2, 0) == 5.0);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = oracle::random_sparse(rng, 7, 5, 0.4);
        check_invariants(transpose(r));
        CHECK(transpose(transpose(r)) == r);
        const auto sq = oracle::random_sparse(rng, 6, 6, 0.4);
        CHECK(is_symmetric(add(sq, transpose(sq))));
    }
}

TEST_CASE("kron")
{
    CHECK(kron(CsrMatrix::identity(2), CsrMatrix::identity(2)) == CsrMatrix::identity(4));
    const std::vector<double> d23{2.0, 3.0};
    const std::vector<double> d2233{2.0, 2.0, 3.0, 3.0};
    CHECK(kron(CsrMatrix::diagonal(d23), CsrMatrix::identity(2)) == CsrMatrix::diagonal(d2233));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = oracle::random_sparse(rng, 3, 3, 0.6);
        const auto b = oracle::random_sparse(rng, 3, 3, 0.6);
        const auto k = kron(a, b);
        check_invariants(k);
        CHECK(k.nnz() == a.nnz() * b.nnz());
        CHECK(oracle::dense(k) == oracle::kron(oracle::dense(a), oracle::dense(b)));
    }
}

TEST_CASE("property: kron is associative")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        // Small integers keep every product exact, so associativity holds bitwise.
        auto ints = [&](Index n) {
            std::uniform_int_distribution<int> v(-3, 3);
            std::vector<Triplet> t;
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j)
                    t.push_back({i, j, static_cast<double>(v(rng))});
            return CsrMatrix::from_triplets(n, n, t);
        };
        const auto a = ints(2), b = ints(3), c = ints(2);
        CHECK(kron(kron(a, b), c) == kron(a, kron(b, c)));
        CHECK(oracle::dense(kron(kron(a, b), c)) ==
              oracle::kron(oracle::kron(oracle::dense(a), oracle::dense(b)), oracle::dense(c)));
    }
}

TEST_CASE("kron size guard")
{
    const auto big = CsrMatrix::identity(70000);
    CHECK_THROWS_AS(kron(big, big), SizeOverflow);
}

TEST_CASE("symm_skew_split")
{
    const auto sym = tridiag(4, -1, 2, -1);
    CHECK(symm_skew_split(sym).second.nnz() == 0);
    CHECK(symm_skew_split(sym).first == sym);

    const auto a = CsrMatrix::from_dense(2, 2, std::vector<double>{0, 1, 0, 0});
    const auto [m, n] = symm_skew_split(a);
    CHECK(m == CsrMatrix::from_dense(2, 2, std::vector<double>{0, 0.5, 0.5, 0}));
    CHECK(n == CsrMatrix::from_dense(2, 2, std::vector<double>{0, 0.5, -0.5, 0}));
    CHECK_THROWS_AS(symm_skew_split(CsrMatrix(2, 3)), NonSquare);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = oracle::random_sparse(rng, 9, 9, 0.4);
        const auto [mr, nr] = symm_skew_split(r);
        CHECK(is_symmetric(mr));
        CHECK(is_skew_symmetric(nr));
        CHECK(transpose(mr) == mr);
        CHECK(transpose(nr) == nr.scaled(-1.0));
        CHECK(add(add(mr, nr), r, 1.0, -1.0).max_abs() <= 2 * unit_roundoff(formats::fp64()) * r.max_abs());
    }
}

TEST_CASE("shift_diagonal")
{
    CHECK(shift_diagonal(CsrMatrix(3, 3), 2.0) == CsrMatrix::identity(3).scaled(2.0));
    CHECK(shift_diagonal(CsrMatrix::identity(3), 1.0) == CsrMatrix::identity(3).scaled(2.0));
    CHECK_THROWS_AS(shift_diagonal(CsrMatrix(2, 3), 1.0), NonSquare);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = oracle::random_sparse(rng, 6, 6, 0.3);
        const auto s = shift_diagonal(r, 0.75);
        const auto before = r.diagonal_values();
        const auto after = s.diagonal_values();
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(after[i] == 0.75 + before[i]);
    }
}

TEST_CASE("tridiag")
{
    CHECK(tridiag(1, 7.0, 5.0, 9.0) == CsrMatrix::diagonal(std::vector<double>{5.0}));
    const auto t = tridiag(3, -1, 2, -1);
    CHECK(t.at(1, 0) == -1.0);
    CHECK(t.at(1, 1) == 2.0);
    CHECK(t.at(1, 2) == -1.0);
    const auto n = tridiag(3, 0.5, 0, -0.5);
    for (double d : n.diagonal_values())
        CHECK(d == 0.0);
    CHECK(n.nnz() == 4);
    CHECK(oracle::dense(tridiag(5, 0.3, -2.0, 4.0)) == oracle::tridiag(5, 0.3, -2.0, 4.0));
}

TEST_CASE("quantized copies are exact images")
{
    std::mt19937_64 rng(8);
    const auto r = oracle::random_sparse(rng, 10, 10, 0.5);
    const auto q = r.quantized(formats::bf16());
    check_invariants(q);
    for (const auto& t : q.to_triplets())
        CHECK(t.value == quantize(r.at(t.row, t.col), formats::bf16()));
    CHECK(r.quantized(formats::fp64()) == r);
}

} // TEST_SUITE
