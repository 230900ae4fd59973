#include "gadi/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gadi/compensated.hpp"

namespace gadi {

namespace {

constexpr Index kMaxRows = std::numeric_limits<std::int32_t>::max();
constexpr Index kMaxNnz = Index{1} << 36;

void check_dims(Index rows, Index cols)
{
    if (rows < 0 || cols < 0)
        throw DimensionMismatch("negative matrix dimension");
    if (rows > kMaxRows || cols > kMaxRows)
        throw SizeOverflow("matrix dimension exceeds " + std::to_string(kMaxRows));
}

} // namespace

CsrMatrix::CsrMatrix(Index rows, Index cols) : rows_(rows), cols_(cols)
{
    check_dims(rows, cols);
    row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries)
{
    check_dims(rows, cols);
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionMismatch("triplet (" + std::to_string(t.row) + ", " +
                                    std::to_string(t.col) + ") outside " + std::to_string(rows) +
                                    "x" + std::to_string(cols));
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m(rows, cols);
    m.col_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    std::size_t k = 0;
    for (Index i = 0; i < rows; ++i) {
        while (k < entries.size() && entries[k].row == i) {
            const Index j = entries[k].col;
            double v = 0.0;
            while (k < entries.size() && entries[k].row == i && entries[k].col == j)
                v += entries[k++].value;
            if (v != 0.0) {
                m.col_indices_.push_back(j);
                m.values_.push_back(v);
            }
        }
        m.row_offsets_[static_cast<std::size_t>(i) + 1] = static_cast<Index>(m.values_.size());
    }
    return m;
}

CsrMatrix CsrMatrix::from_csr(Index rows, Index cols, std::vector<Index> row_offsets,
                              std::vector<Index> col_indices, std::vector<double> values)
{
    check_dims(rows, cols);
    if (row_offsets.size() != static_cast<std::size_t>(rows) + 1 || row_offsets.front() != 0 ||
        row_offsets.back() != static_cast<Index>(values.size()) ||
        col_indices.size() != values.size())
        throw DimensionMismatch("inconsistent CSR arrays");
    CsrMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Index begin = row_offsets[i];
        const Index end = row_offsets[i + 1];
        if (end < begin)
            throw DimensionMismatch("row offsets must be nondecreasing");
        for (Index k = begin; k < end; ++k) {
            const Index j = col_indices[k];
            if (j < 0 || j >= cols)
                throw DimensionMismatch("column index out of range");
            if (k > begin && j <= col_indices[k - 1])
                throw DimensionMismatch("column indices must be strictly increasing per row");
            if (values[k] != 0.0) {
                m.col_indices_.push_back(j);
                m.values_.push_back(values[k]);
            }
        }
        m.row_offsets_[i + 1] = static_cast<Index>(m.values_.size());
    }
    return m;
}

CsrMatrix CsrMatrix::identity(Index n)
{
    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d)
{
    const Index n = static_cast<Index>(d.size());
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (Index i = 0; i < n; ++i)
        t.push_back({i, i, d[i]});
    return from_triplets(n, n, std::move(t));
}

CsrMatrix CsrMatrix::from_dense(Index rows, Index cols, std::span<const double> row_major)
{
    if (static_cast<Index>(row_major.size()) != rows * cols)
        throw DimensionMismatch("dense buffer size does not match dimensions");
    std::vector<Triplet> t;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            if (row_major[i * cols + j] != 0.0)
                t.push_back({i, j, row_major[i * cols + j]});
    return from_triplets(rows, cols, std::move(t));
}

double CsrMatrix::at(Index i, Index j) const
{
    const auto first = col_indices_.begin() + row_offsets_[i];
    const auto last = col_indices_.begin() + row_offsets_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j)
        return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<double> CsrMatrix::diagonal_values() const
{
    std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i)
        d[i] = at(i, i);
    return d;
}

std::vector<double> CsrMatrix::to_dense() const
{
    std::vector<double> d(static_cast<std::size_t>(rows_ * cols_), 0.0);
    for (Index i = 0; i < rows_; ++i)
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            d[i * cols_ + col_indices_[k]] = values_[k];
    return d;
}

std::vector<Triplet> CsrMatrix::to_triplets() const
{
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (Index i = 0; i < rows_; ++i)
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
            t.push_back({i, col_indices_[k], values_[k]});
    return t;
}

double CsrMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::fabs(v));
    return m;
}

double CsrMatrix::frobenius_norm() const
{
    return std::sqrt(std::transform_reduce(values_.begin(), values_.end(), 0.0, std::plus<>{},
                                           [](double v) { return v * v; }));
}

CsrMatrix CsrMatrix::quantized(const PrecisionFormat& fmt) const
{
    std::vector<double> v = gadi::quantize(values_, fmt);
    return from_csr(rows_, cols_, row_offsets_, col_indices_, std::move(v));
}

CsrMatrix CsrMatrix::scaled(double factor) const
{
    std::vector<double> v(values_);
    for (double& x : v)
        x *= factor;
    return from_csr(rows_, cols_, row_offsets_, col_indices_, std::move(v));
}

void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
               const PrecisionFormat& fmt)
{
    if (static_cast<Index>(x.size()) != a.cols() || static_cast<Index>(y.size()) != a.rows())
        throw DimensionMismatch("spmv: matrix is " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", x has " + std::to_string(x.size()));
    const auto offs = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();

    if (fmt.kind == FormatKind::Compensated) {
        for (Index i = 0; i < a.rows(); ++i) {
            compensated::Dot2 acc;
            for (Index k = offs[i]; k < offs[i + 1]; ++k)
                acc.add_product(vals[k], x[cols[k]]);
            y[i] = acc.value();
        }
    } else if (fmt.is_native_fp64()) {
        for (Index i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (Index k = offs[i]; k < offs[i + 1]; ++k)
                s += vals[k] * x[cols[k]];
            y[i] = s;
        }
    } else {
        for (Index i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (Index k = offs[i]; k < offs[i + 1]; ++k)
                s = quantize(s + quantize(vals[k] * x[cols[k]], fmt), fmt);
            y[i] = s;
        }
    }
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x, const PrecisionFormat& fmt)
{
    std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
    spmv_into(a, x, y, fmt);
    return y;
}

std::vector<double> residual(const CsrMatrix& a, std::span<const double> x,
                             std::span<const double> b, const PrecisionFormat& fmt)
{
    if (static_cast<Index>(b.size()) != a.rows())
        throw DimensionMismatch("residual: b has wrong length");
    if (fmt.kind != FormatKind::Compensated) {
        std::vector<double> r = spmv(a, x, fmt);
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = quantize(b[i] - r[i], fmt);
        return r;
    }
    if (static_cast<Index>(x.size()) != a.cols())
        throw DimensionMismatch("residual: x has wrong length");
    std::vector<double> r(b.size());
    const auto offs = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (Index i = 0; i < a.rows(); ++i) {
        compensated::Dot2 acc(b[i]);
        for (Index k = offs[i]; k < offs[i + 1]; ++k)
            acc.add_product(-vals[k], x[cols[k]]);
        r[i] = acc.value();
    }
    return r;
}

CsrMatrix transpose(const CsrMatrix& a)
{
    const Index m = a.rows(), n = a.cols();
    std::vector<Index> offs(static_cast<std::size_t>(n) + 1, 0);
    for (Index j : a.col_indices())
        ++offs[j + 1];
    std::partial_sum(offs.begin(), offs.end(), offs.begin());
    std::vector<Index> cols(a.col_indices().size());
    std::vector<double> vals(a.values().size());
    std::vector<Index> next(offs.begin(), offs.end() - 1);
    const auto ao = a.row_offsets();
    for (Index i = 0; i < m; ++i) {
        for (Index k = ao[i]; k < ao[i + 1]; ++k) {
            const Index dst = next[a.col_indices()[k]]++;
            cols[dst] = i;
            vals[dst] = a.values()[k];
        }
    }
    return CsrMatrix::from_csr(n, m, std::move(offs), std::move(cols), std::move(vals));
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("add: shapes differ");
    std::vector<Index> offs{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
    vals.reserve(cols.capacity());
    const auto ao = a.row_offsets(), bo = b.row_offsets();
    const auto ac = a.col_indices(), bc = b.col_indices();
    for (Index i = 0; i < a.rows(); ++i) {
        Index p = ao[i], q = bo[i];
        while (p < ao[i + 1] || q < bo[i + 1]) {
            Index j;
            double v;
            if (q >= bo[i + 1] || (p < ao[i + 1] && ac[p] < bc[q])) {
                j = ac[p];
                v = alpha * a.values()[p++];
            } else if (p >= ao[i + 1] || bc[q] < ac[p]) {
                j = bc[q];
                v = beta * b.values()[q++];
            } else {
                j = ac[p];
                v = alpha * a.values()[p++] + beta * b.values()[q++];
            }
            cols.push_back(j);
            vals.push_back(v);
        }
        offs.push_back(static_cast<Index>(cols.size()));
    }
    return CsrMatrix::from_csr(a.rows(), a.cols(), std::move(offs), std::move(cols),
                               std::move(vals));
}

CsrMatrix kron(const CsrMatrix& a, const CsrMatrix& b)
{
    const auto mul_checked = [](Index x, Index y, Index limit, const char* what) {
        if (x != 0 && y > limit / x)
            throw SizeOverflow(std::string("kron: ") + what + " overflow");
        return x * y;
    };
    const Index rows = mul_checked(a.rows(), b.rows(), kMaxRows, "row count");
    const Index cols = mul_checked(a.cols(), b.cols(), kMaxRows, "column count");
    const Index nnz = mul_checked(a.nnz(), b.nnz(), kMaxNnz, "nonzero count");

    std::vector<Index> offs;
    offs.reserve(static_cast<std::size_t>(rows) + 1);
    offs.push_back(0);
    std::vector<Index> ci;
    std::vector<double> vals;
    ci.reserve(static_cast<std::size_t>(nnz));
    vals.reserve(static_cast<std::size_t>(nnz));
    const auto ao = a.row_offsets(), bo = b.row_offsets();
    for (Index ia = 0; ia < a.rows(); ++ia) {
        for (Index ib = 0; ib < b.rows(); ++ib) {
            // Columns come out sorted: block column ja ascending, then jb ascending.
            for (Index p = ao[ia]; p < ao[ia + 1]; ++p) {
                const Index ja = a.col_indices()[p];
                const double va = a.values()[p];
                for (Index q = bo[ib]; q < bo[ib + 1]; ++q) {
                    ci.push_back(ja * b.cols() + b.col_indices()[q]);
                    vals.push_back(va * b.values()[q]);
                }
            }
            offs.push_back(static_cast<Index>(ci.size()));
        }
    }
    return CsrMatrix::from_csr(rows, cols, std::move(offs), std::move(ci), std::move(vals));
}

std::pair<CsrMatrix, CsrMatrix> symm_skew_split(const CsrMatrix& a)
{
    if (!a.is_square())
        throw NonSquare("symm_skew_split needs a square matrix");
    const CsrMatrix at = transpose(a);
    CsrMatrix sum = add(a, at, 1.0, 1.0);
    CsrMatrix diff = add(a, at, 1.0, -1.0);
    return {sum.scaled(0.5), diff.scaled(0.5)};
}

CsrMatrix shift_diagonal(const CsrMatrix& a, double alpha)
{
    if (!a.is_square())
        throw NonSquare("shift_diagonal needs a square matrix");
    const Index n = a.rows();
    std::vector<Index> offs{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(static_cast<std::size_t>(a.nnz() + n));
    vals.reserve(cols.capacity());
    const auto ao = a.row_offsets();
    for (Index i = 0; i < n; ++i) {
        bool placed = false;
        for (Index k = ao[i]; k < ao[i + 1]; ++k) {
            const Index j = a.col_indices()[k];
            if (!placed && j >= i) {
                if (j == i) {
                    cols.push_back(i);
                    vals.push_back(alpha + a.values()[k]);
                    placed = true;
                    continue;
                }
                cols.push_back(i);
                vals.push_back(alpha);
                placed = true;
            }
            cols.push_back(j);
            vals.push_back(a.values()[k]);
        }
        if (!placed) {
            cols.push_back(i);
            vals.push_back(alpha);
        }
        offs.push_back(static_cast<Index>(cols.size()));
    }
    return CsrMatrix::from_csr(n, n, std::move(offs), std::move(cols), std::move(vals));
}

CsrMatrix tridiag(Index n, double lower, double diag, double upper)
{
    if (n < 1)
        throw DimensionMismatch("tridiag needs n >= 1");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i) {
        if (i > 0 && lower != 0.0)
            t.push_back({i, i - 1, lower});
        if (diag != 0.0)
            t.push_back({i, i, diag});
        if (i + 1 < n && upper != 0.0)
            t.push_back({i, i + 1, upper});
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

bool is_symmetric(const CsrMatrix& a)
{
    return a.is_square() && transpose(a) == a;
}

bool is_skew_symmetric(const CsrMatrix& a)
{
    return a.is_square() && transpose(a) == a.scaled(-1.0);
}

} // namespace gadi
