#pragma once

// Parameter selection for the GADI shift alpha: grid-searched training
// labels, a Gaussian process regressor on log(alpha), and the
// safety-threshold escalation on kappa(H) kappa(S) u_s.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gadi/precision.hpp"
#include "gadi/problems.hpp"
#include "gadi/solver.hpp"

namespace gadi {

struct GridSearchEntry {
    double alpha = 0.0;
    SolveStatus status = SolveStatus::MaxIt;
    int outer_iterations = 0;
    long inner_iterations = 0;
};

struct GridSearchResult {
    double best_alpha = 0.0;
    std::vector<GridSearchEntry> entries; // in candidate order
};

// Worker count for independent solves: GADI_MP_THREADS when set and
// positive, otherwise the hardware concurrency (at least 1).
int default_thread_count();

// Solves at every candidate (cfg.alpha is ignored). The best converged
// candidate has the fewest outer iterations, then the fewest total inner
// iterations, then the smallest alpha. Each solve's outer budget is capped
// at the best converged count so far, so losing candidates may report MaxIt
// early. Throws AllDiverged when none
// converges, InvalidConfig on an empty or non-positive candidate list.
GridSearchResult grid_search_alpha(const Problem& problem, const std::vector<double>& candidates,
                                   const GadiConfig& cfg, int threads = 1);

// count points 10^(lo + k (hi - lo) / (count - 1)).
std::vector<double> log_grid(double log10_lo, double log10_hi, int count);

struct GprKernel {
    double signal_variance = 1.0;      // sigma_f^2
    std::vector<double> length_scales; // one per feature
    double noise_variance = 1e-6;      // sigma_n^2
};

inline constexpr double kGprNoiseFloor = 1e-6;

// (log grid, log2(1/u_s), one-hot over cdr2d | cd3d | crd).
inline constexpr int kAlphaFeatureCount = 5;
std::vector<double> alpha_features(Index grid, const PrecisionFormat& solver, ProblemFamily family);

// Reads the grid size from params["ng"] and the family from the label.
std::vector<double> alpha_features(const Problem& problem, const PrecisionFormat& solver);

struct GprModel {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets; // log(alpha)
    GprKernel kernel;
    double log_marginal_likelihood = 0.0;

    // Cached: Cholesky factor of K + sigma_n^2 I and (K + sigma_n^2 I)^{-1} y.
    Eigen::MatrixXd chol_lower;
    Eigen::VectorXd weights;

    int dimension() const { return inputs.empty() ? 0 : static_cast<int>(inputs.front().size()); }
};

double rbf_kernel(const GprKernel& k, const std::vector<double>& a, const std::vector<double>& b);

// Candidate kernels for `dim` features: sigma_f^2 in {0.25, 1, 4},
// sigma_n^2 in {1e-6, 1e-4, 1e-2}, the first two length scales each in
// {0.5, 1, 2, 4}, the remaining ones fixed at 1.
std::vector<GprKernel> default_hyper_grid(int dim);

// Zero prior mean. Picks the candidate maximizing the log marginal
// likelihood. A candidate whose Gram matrix fails to factor is retried
// once with sigma_n^2 raised by the floor; IllConditionedGram is thrown
// when no candidate factors.
GprModel gpr_fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                 const std::vector<GprKernel>& hyper_grid);

struct GprPrediction {
    double mean = 0.0;
    double variance = 0.0;
    double alpha() const;
};

GprPrediction gpr_predict(const GprModel& model, const std::vector<double>& x);

nlohmann::json to_json(const GprModel& model);
// Refits the cached factorization with the stored kernel.
GprModel gpr_model_from_json(const nlohmann::json& j);

struct AlphaSelectConfig {
    double tau = 0.01;
    double escalation_factor = 2.0;
    int max_escalations = 20;
    std::vector<double> candidate_grid = log_grid(-2.0, 2.0, 13);
    // Off: escalate on stagnation or divergence of a probe solve instead.
    bool condition_gate = true;
    int probe_outer_maxit = 50;
};

// Throws InvalidConfig when a field is out of range.
void validate(const AlphaSelectConfig& cfg);

struct EscalationStep {
    double alpha = 0.0;
    double kappa_h = 0.0; // NaN when the gate is off
    double kappa_s = 0.0;
    double gate_value = 0.0; // kappa_h kappa_s u_s
    SolveStatus probe_status = SolveStatus::MaxIt;
    bool accepted = false;
};

struct AlphaSelection {
    double alpha = 0.0;
    double predicted_alpha = 0.0;
    int escalations = 0;
    std::vector<EscalationStep> trace;
};

// Throws EscalationExhausted when no alpha within max_escalations passes.
AlphaSelection select_alpha(const Problem& problem, const GprModel& model, const AlphaSelectConfig& sel,
                            const GadiConfig& cfg);

// Same, starting from a given alpha instead of the model prediction.
AlphaSelection escalate_alpha(const Problem& problem, double alpha, const AlphaSelectConfig& sel,
                              const GadiConfig& cfg);

} // namespace gadi
