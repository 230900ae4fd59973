#pragma once

// Error metrics, dense iteration-matrix oracles, condition numbers, and
// evaluation of the rounding-error bounds for the three-precision iteration.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gadi/norms.hpp"
#include "gadi/problems.hpp"
#include "gadi/solver.hpp"
#include "gadi/sparse_matrix.hpp"
#include "gadi/splitting.hpp"

namespace gadi {

inline constexpr Index kDefaultDenseCap = 2048;

Eigen::MatrixXd to_eigen(const CsrMatrix& a);

// ||xhat - x|| / ||x||. Throws ZeroReference when x = 0.
double forward_error(std::span<const double> xhat, std::span<const double> x);

// ||b - A xhat|| / (||A|| ||xhat|| + ||b||); ||A||_2 estimated when not given.
double backward_error(const CsrMatrix& a, std::span<const double> b, std::span<const double> xhat,
                      std::optional<double> a_norm = std::nullopt);

// ||A (x - xhat)|| / (||A|| ||x - xhat||). Throws ZeroError when xhat == x.
double mu_k(const CsrMatrix& a, std::span<const double> xhat, std::span<const double> x,
            std::optional<double> a_norm = std::nullopt);

struct DenseIterationOperator {
    Eigen::MatrixXd t_f;   // forward-error iteration matrix
    Eigen::MatrixXd t_b;   // A T_F A^{-1}, governs residuals
    Eigen::MatrixXd g_map; // x_{k+1} = T_F x_k + g_map b
    double c_f = 0.0;      // ||I - T_F||_2
    double c_b = 0.0;      // ||I - T_B||_2
    double rho = 0.0;      // spectral radius of T_F

    Eigen::VectorXd g(std::span<const double> b) const;
};

// Forms T_F = (aI+N)^{-1}(aI+M)^{-1}(a^2 I + MN - (1-w) a A) and friends by
// dense factorizations. Throws DenseCapExceeded when n > dense_cap.
DenseIterationOperator dense_iteration_operator(const CsrMatrix& a, const CsrMatrix& m,
                                                const CsrMatrix& n, double alpha, double omega,
                                                Index dense_cap = kDefaultDenseCap);

double spectral_radius(const Eigen::MatrixXd& t);

struct ConditionOptions {
    Index dense_cap = kDefaultDenseCap;
    double rel_tol = 1e-6;     // power / inverse iteration agreement
    int maxit = 500;           // outer power / inverse iterations
    double solve_tol = 1e-10;  // inner solves of the inverse iteration
};

struct SingularRange {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double condition() const { return sigma_max / sigma_min; }
};

// Extreme singular values: dense SVD up to dense_cap, otherwise power
// iteration on A^T A and inverse iteration through inner CG solves.
// Throws SingularMatrix when A is (numerically) singular.
SingularRange singular_range(const CsrMatrix& a, ConditionOptions opts = {});

// 2-norm condition number kappa(A) = ||A|| ||A^{-1}||.
double condition_estimate(const CsrMatrix& a, ConditionOptions opts = {});

enum class ErrorKind { Forward, Backward };

// lambda_k = ||T e_k|| / ||e_k|| with T = T_F on forward errors or T = T_B
// on residuals. Throws ZeroError for a zero vector.
std::vector<double> lambda_sequence(const DenseIterationOperator& op,
                                    const std::vector<std::vector<double>>& vectors,
                                    ErrorKind which);

using DimensionConstant = std::function<double(double n)>;
DimensionConstant sqrt_dimension_constant();

struct TheoryInputs {
    double n = 1.0;
    double kappa_a = 1.0;
    double kappa_h = 1.0;
    double kappa_s = 1.0;
    double kappa_hs = 1.0;
    double mu = 1.0;
    double u = 0.0;
    double u_r = 0.0;
    double u_s = 0.0;
    double c_f = 1.0;
    double c_b = 1.0;
    double lambda_f = 0.0;
    double lambda_b = 0.0;
};

struct TheoryBounds {
    double c_n = 0.0;
    double min_term_f = 0.0; // min{k(HS)k(H), k(A)(k(H)+k(S)), k(H)k(S)}
    double min_term_b = 0.0; // min{k(HS)k(S), k(A)(k(H)+k(S)), k(H)k(S)}
    double beta_f = 0.0;
    double zeta_f = 0.0;
    double beta_b = 0.0;
    double zeta_b = 0.0;
    // Forms valid when mu k(A) <= k(H) k(S) and c_F, c_B are absorbed into c(n).
    double beta_f_simplified = 0.0;
    double zeta_f_simplified = 0.0;
    double beta_b_simplified = 0.0;
    double zeta_b_simplified = 0.0;
};

TheoryBounds theory_bounds(const TheoryInputs& in,
                           const DimensionConstant& c_of_n = sqrt_dimension_constant());

struct TheoryRow {
    int iteration = 0;
    double forward_error = 0.0;
    double backward_error = 0.0;
    double forward_ratio = 0.0;  // ||e_{k+1}|| / ||e_k||
    double backward_ratio = 0.0; // ||r_{k+1}|| / ||r_k||
    double mu = 0.0;
    double lambda_f = 0.0;
    double lambda_b = 0.0;
    TheoryBounds bounds;
};

struct TheoryComparison {
    double kappa_a = 0.0, kappa_h = 0.0, kappa_s = 0.0, kappa_hs = 0.0;
    double rho = 0.0, c_f = 0.0, c_b = 0.0;
    std::vector<TheoryRow> rows;
};

// Re-runs nothing: consumes a report produced with record_iterates = true and
// a problem with a known exact solution, and pairs each step with its bounds.
TheoryComparison compare_with_theory(const Problem& problem, const Splitting& sp,
                                     const GadiConfig& cfg, const SolveReport& report,
                                     const DimensionConstant& c_of_n = sqrt_dimension_constant(),
                                     Index dense_cap = kDefaultDenseCap);

} // namespace gadi
