#pragma once

// Three-precision GADI outer iteration.
//
//   r_k = b - A x_k                      residual precision u_r, then cast to u_s
//   (alpha I + M) z_k = r_k              solver precision u_s (CG)
//   (alpha I + N) y_k = (2 - w) alpha z_k  solver precision u_s (CG on normal equations)
//   x_{k+1} = x_k + y_k                  working precision u

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gadi/precision.hpp"
#include "gadi/problems.hpp"
#include "gadi/splitting.hpp"

namespace gadi {

struct GadiConfig {
    double alpha = 1.0;
    double omega = 1.0;
    PrecisionFormat working = formats::fp64();  // u
    PrecisionFormat residual = formats::fp64(); // u_r
    PrecisionFormat solver = formats::fp64();   // u_s
    double outer_tol = 1e-10;
    int outer_maxit = 1000;
    double inner_tol = 1e-4;
    int inner_maxit = 0; // 0: default_inner_maxit(n)
    int stagnation_window = 10;
    double stagnation_factor = 0.99;
    double divergence_factor = 1e3;
    bool strict_model = true;
    // Scale r by a power of two to unit order before the cast to u_s and
    // undo it on y. Exact in binary arithmetic; keeps narrow formats from
    // overflowing on large residuals.
    bool scale_residual = true;
    bool record_iterates = false;
    // ||A||_2 for backward errors; estimated by power iteration when absent.
    std::optional<double> a_norm;
};

// Throws NonPositiveAlpha or InvalidConfig when the hypotheses on alpha,
// omega, and the precision ordering u_r <= u <= u_s are violated.
void validate(const GadiConfig& cfg);

enum class SolveStatus { Converged, Stagnated, MaxIt, Diverged };
std::string to_string(SolveStatus s);

struct IterationRecord {
    int iteration = 0;               // k + 1: the iterate this record describes
    double residual_norm = 0.0;      // ||r_k|| as evaluated in u_r
    double relative_residual = 0.0;  // ||b - A x_{k+1}|| / ||r_0||, fp64
    double backward_error = 0.0;     // normwise, fp64
    double forward_error = 0.0;      // NaN when no exact solution is known
    double mu = 0.0;                 // NaN when no exact solution is known
    int inner_h_iterations = 0;
    int inner_s_iterations = 0;
    bool inner_h_converged = false;
    bool inner_s_converged = false;
};

struct PhaseTimes {
    double residual = 0.0;
    double h_solve = 0.0;
    double s_solve = 0.0;
    double update = 0.0;
    double monitor = 0.0;
    double total = 0.0;
};

struct SolveReport {
    std::vector<double> x;
    SolveStatus status = SolveStatus::MaxIt;
    std::vector<IterationRecord> history;
    std::vector<std::vector<double>> iterates; // x_1, x_2, ... when recorded
    PhaseTimes seconds;
    double initial_residual_norm = 0.0;
    double a_norm = 0.0;
    int inner_breakdowns = 0;
    std::vector<std::string> warnings;

    int outer_iterations() const { return static_cast<int>(history.size()); }
    long total_inner_iterations() const;
};

// True iff the best value in the last `window` entries fails to improve on
// the best value before the window by at least `factor` (best_recent >
// factor * best_before). Needs more than `window` entries to return true.
bool stagnation_check(std::span<const double> history, int window, double factor);

SolveReport gadi_solve(const Problem& problem, const Splitting& splitting, const GadiConfig& cfg);

// Builds the HSS splitting at cfg.alpha in cfg.solver precision and solves.
SolveReport gadi_solve(const Problem& problem, const GadiConfig& cfg);

} // namespace gadi
