#pragma once

// Benchmark linear systems: 2D convection-diffusion-reaction, 3D
// convection-diffusion, and complex reaction-diffusion in real block form.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gadi/sparse_matrix.hpp"

namespace gadi {

struct Problem {
    CsrMatrix a;
    std::vector<double> b;
    std::optional<std::vector<double>> exact_solution;
    std::string label;
    std::map<std::string, double> params;

    Index size() const { return a.rows(); }
};

// Throws DimensionMismatch when the shapes disagree.
void validate(const Problem& p);

// b = A * 1 and exact_solution = 1.
void attach_manufactured_rhs(Problem& p);

Problem build_cdr_2d(Index grid, double r = 1.0);

enum class Cd3dVariant {
    // Seven-point stencil: every direction carries tridiag(t2, 2, t3), diagonal 6.
    Consistent,
    // T_x = tridiag(t2, 2, t3), T_y = T_z = tridiag(t2, 0, t3), diagonal 2.
    // The symmetric part is indefinite and GADI does not converge on it.
    Literal,
};

Problem build_cd_3d(Index grid, Cd3dVariant variant = Cd3dVariant::Consistent);

Cd3dVariant cd3d_variant_by_name(const std::string& name);
std::string cd3d_variant_name(Cd3dVariant v);

enum class LaplacianScaling {
    NuOverH2, // (nu / h^2) * five-point stencil
    Nu,       // nu * five-point stencil
};

inline constexpr double kDefaultPotentialScale = 1.0e4;

Problem build_complex_rd(Index grid, double s = kDefaultPotentialScale, std::uint64_t seed = 0,
                         LaplacianScaling scaling = LaplacianScaling::NuOverH2);

// Diffusion coefficient of the complex reaction-diffusion family: 1e-5 (64/grid)^2.
double complex_rd_nu(Index grid);

// Counter-based SplitMix64: uniform [0,1) value number `counter` of stream `seed`.
//   z = seed + (counter + 1) * 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z = z ^ (z >> 31);  result = (z >> 11) * 2^-53
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

enum class ProblemFamily { Cdr2d, Cd3d, ComplexRd };

ProblemFamily family_by_name(const std::string& name);
std::string family_name(ProblemFamily f);

} // namespace gadi
