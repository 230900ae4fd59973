#include "gadi/problems.hpp"

#include <cmath>

namespace gadi {

void validate(const Problem& p)
{
    if (!p.a.is_square())
        throw NonSquare("problem matrix must be square");
    if (static_cast<Index>(p.b.size()) != p.a.rows())
        throw DimensionMismatch("right-hand side length " + std::to_string(p.b.size()) +
                                " does not match matrix size " + std::to_string(p.a.rows()));
    if (p.exact_solution && static_cast<Index>(p.exact_solution->size()) != p.a.cols())
        throw DimensionMismatch("exact solution has the wrong length");
}

void attach_manufactured_rhs(Problem& p)
{
    std::vector<double> ones(static_cast<std::size_t>(p.a.cols()), 1.0);
    p.b = spmv(p.a, ones);
    p.exact_solution = std::move(ones);
}

Problem build_cdr_2d(Index grid, double r)
{
    if (grid < 2)
        throw InvalidConfig("cdr2d needs grid >= 2");
    const double h1 = static_cast<double>(grid + 1);
    const CsrMatrix diffusion = tridiag(grid, -1.0, 2.0, -1.0);
    const CsrMatrix convection = tridiag(grid, 0.5, 0.0, -0.5);
    const CsrMatrix t = shift_diagonal(add(diffusion, convection, 1.0, 2.0 * r), 100.0 / (h1 * h1));
    const CsrMatrix eye = CsrMatrix::identity(grid);

    Problem p;
    p.a = add(kron(eye, t), kron(t, eye));
    p.label = "cdr2d";
    p.params = {{"ng", static_cast<double>(grid)}, {"r", r}};
    attach_manufactured_rhs(p);
    return p;
}

Problem build_cd_3d(Index grid, Cd3dVariant variant)
{
    if (grid < 2)
        throw InvalidConfig("cd3d needs grid >= 2");
    if (grid > 1290)
        throw SizeOverflow("cd3d grid^3 exceeds the supported matrix size");
    const double r = 1.0 / (2.0 * static_cast<double>(grid) + 2.0);
    const double t1 = 2.0, t2 = -1.0 - r, t3 = -1.0 + r;
    const CsrMatrix tx = tridiag(grid, t2, t1, t3);
    const double diag_yz = variant == Cd3dVariant::Consistent ? t1 : 0.0;
    const CsrMatrix tyz = tridiag(grid, t2, diag_yz, t3);
    const CsrMatrix eye = CsrMatrix::identity(grid);

    Problem p;
    p.a = add(add(kron(kron(tx, eye), eye), kron(kron(eye, tyz), eye)), kron(kron(eye, eye), tyz));
    p.label = variant == Cd3dVariant::Consistent ? "cd3d" : "cd3d-literal";
    p.params = {{"ng", static_cast<double>(grid)}, {"r", r}};
    attach_manufactured_rhs(p);
    return p;
}

Cd3dVariant cd3d_variant_by_name(const std::string& name)
{
    if (name == "consistent")
        return Cd3dVariant::Consistent;
    if (name == "literal")
        return Cd3dVariant::Literal;
    throw InvalidConfig("unknown cd3d variant '" + name + "' (expected consistent|literal)");
}

std::string cd3d_variant_name(Cd3dVariant v)
{
    return v == Cd3dVariant::Consistent ? "consistent" : "literal";
}

double complex_rd_nu(Index grid)
{
    const double ratio = 64.0 / static_cast<double>(grid);
    return 1.0e-5 * ratio * ratio;
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter)
{
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Problem build_complex_rd(Index grid, double s, std::uint64_t seed, LaplacianScaling scaling)
{
    if (grid < 2)
        throw InvalidConfig("crd needs grid >= 2");
    const double nu = complex_rd_nu(grid);
    const double h = 1.0 / static_cast<double>(grid + 1);
    const double coeff = scaling == LaplacianScaling::NuOverH2 ? nu / (h * h) : nu;

    const CsrMatrix t = tridiag(grid, -1.0, 2.0, -1.0);
    const CsrMatrix eye = CsrMatrix::identity(grid);
    const CsrMatrix lap = add(kron(eye, t), kron(t, eye)).scaled(coeff);

    const Index cells = grid * grid;
    std::vector<double> potential(static_cast<std::size_t>(cells));
    for (Index i = 0; i < cells; ++i)
        potential[i] = s * counter_uniform(seed, static_cast<std::uint64_t>(i));
    const CsrMatrix v = CsrMatrix::diagonal(potential);

    // [[L, -V], [V, L]] = I_2 (x) L + [[0, -1], [1, 0]] (x) V
    const double rot[] = {0.0, -1.0, 1.0, 0.0};
    const CsrMatrix j = CsrMatrix::from_dense(2, 2, rot);

    Problem p;
    p.a = add(kron(CsrMatrix::identity(2), lap), kron(j, v));
    p.label = "crd";
    p.params = {{"ng", static_cast<double>(grid)},
                {"s", s},
                {"nu", nu},
                {"seed", static_cast<double>(seed)},
                {"laplacian_nu_over_h2", scaling == LaplacianScaling::NuOverH2 ? 1.0 : 0.0}};
    attach_manufactured_rhs(p);
    return p;
}

ProblemFamily family_by_name(const std::string& name)
{
    if (name == "cdr2d")
        return ProblemFamily::Cdr2d;
    if (name == "cd3d")
        return ProblemFamily::Cd3d;
    if (name == "crd")
        return ProblemFamily::ComplexRd;
    throw InvalidConfig("unknown problem family '" + name + "' (expected cdr2d|cd3d|crd)");
}

std::string family_name(ProblemFamily f)
{
    switch (f) {
    case ProblemFamily::Cdr2d: return "cdr2d";
    case ProblemFamily::Cd3d: return "cd3d";
    case ProblemFamily::ComplexRd: return "crd";
    }
    return "unknown";
}

} // namespace gadi
