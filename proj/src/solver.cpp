#include "gadi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "gadi/arith.hpp"
#include "gadi/inner.hpp"
#include "gadi/norms.hpp"

namespace gadi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

void validate(const GadiConfig& cfg)
{
    if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha))
        throw NonPositiveAlpha("alpha must be positive, got " + std::to_string(cfg.alpha));
    if (!(cfg.omega >= 0.0 && cfg.omega < 2.0))
        throw InvalidConfig("omega must lie in [0, 2), got " + std::to_string(cfg.omega));
    const double ur = unit_roundoff(cfg.residual);
    const double u = unit_roundoff(cfg.working);
    const double us = unit_roundoff(cfg.solver);
    if (!(ur <= u && u <= us))
        throw InvalidConfig("precisions must satisfy u_r <= u <= u_s (got u_r=" +
                            cfg.residual.name + ", u=" + cfg.working.name +
                            ", u_s=" + cfg.solver.name + ")");
    if (!(cfg.outer_tol > 0.0) || cfg.outer_maxit < 1)
        throw InvalidConfig("outer_tol must be positive and outer_maxit >= 1");
    if (!(cfg.inner_tol > 0.0 && cfg.inner_tol < 1.0))
        throw InvalidConfig("inner_tol must lie in (0, 1)");
    if (cfg.inner_maxit < 0)
        throw InvalidConfig("inner_maxit must be nonnegative");
    if (cfg.stagnation_window < 2)
        throw InvalidConfig("stagnation_window must be at least 2");
}

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::Stagnated: return "Stagnated";
    case SolveStatus::MaxIt: return "MaxIt";
    case SolveStatus::Diverged: return "Diverged";
    }
    return "Unknown";
}

long SolveReport::total_inner_iterations() const
{
    long total = 0;
    for (const IterationRecord& r : history)
        total += r.inner_h_iterations + r.inner_s_iterations;
    return total;
}

bool stagnation_check(std::span<const double> history, int window, double factor)
{
    if (window < 2)
        throw InvalidConfig("stagnation window must be at least 2");
    const std::size_t w = static_cast<std::size_t>(window);
    if (history.size() <= w)
        return false;
    const auto split = history.end() - static_cast<std::ptrdiff_t>(w);
    const double best_before = *std::min_element(history.begin(), split);
    const double best_recent = *std::min_element(split, history.end());
    return best_recent > factor * best_before;
}

SolveReport gadi_solve(const Problem& problem, const Splitting& sp, const GadiConfig& cfg)
{
    validate(problem);
    validate(cfg);
    if (sp.size() != problem.size())
        throw DimensionMismatch("splitting and problem sizes differ");
    if (sp.alpha != cfg.alpha)
        throw InvalidConfig("splitting was built for a different alpha");
    if (!(sp.solver_format == cfg.solver))
        throw InvalidConfig("splitting was quantized for a different solver precision");

    const auto t_start = Clock::now();
    const std::size_t n = static_cast<std::size_t>(problem.size());
    const Arith solver_arith(cfg.solver, cfg.strict_model);
    const int inner_maxit = cfg.inner_maxit > 0 ? cfg.inner_maxit : default_inner_maxit(problem.size());

    const CsrMatrix a_res = problem.a.quantized(cfg.residual);
    const std::vector<double> b_res = quantize(problem.b, cfg.residual);
    const double scale = solver_arith.store(solver_arith.round((2.0 - cfg.omega) * cfg.alpha));

    SolveReport rep;
    rep.a_norm = cfg.a_norm ? *cfg.a_norm : spectral_norm_estimate(problem.a);
    const double b_norm = norm2(problem.b);
    rep.initial_residual_norm = b_norm; // x_0 = 0
    rep.x.assign(n, 0.0);

    const std::vector<double>* exact = problem.exact_solution ? &*problem.exact_solution : nullptr;
    const double exact_norm = exact ? norm2(*exact) : 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (b_norm == 0.0) {
        rep.status = SolveStatus::Converged;
        rep.seconds.total = seconds_since(t_start);
        return rep;
    }

    std::vector<double> rel_history;
    std::vector<double> err(n);
    rep.status = SolveStatus::MaxIt;

    for (int k = 0; k < cfg.outer_maxit; ++k) {
        IterationRecord rec;
        rec.iteration = k + 1;

        auto t0 = Clock::now();
        std::vector<double> r = residual(a_res, rep.x, b_res, cfg.residual);
        rec.residual_norm = norm2(r);
        int shift = 0;
        if (cfg.scale_residual && rec.residual_norm > 0.0 && std::isfinite(rec.residual_norm)) {
            shift = std::ilogb(rec.residual_norm);
            for (double& v : r)
                v = std::ldexp(v, -shift);
        }
        quantize_inplace(r, cfg.solver);
        rep.seconds.residual += seconds_since(t0);

        t0 = Clock::now();
        InnerResult zres = cg_spd(sp.h_low, r, cfg.inner_tol, inner_maxit, solver_arith);
        rep.seconds.h_solve += seconds_since(t0);
        rec.inner_h_iterations = zres.stats.iterations;
        rec.inner_h_converged = zres.stats.converged;

        t0 = Clock::now();
        solver_arith.scal(scale, zres.x);
        InnerResult yres = cg_normal_skew(sp.s_low, sp.alpha_minus_n_low, zres.x, cfg.inner_tol,
                                          inner_maxit, solver_arith);
        rep.seconds.s_solve += seconds_since(t0);
        rec.inner_s_iterations = yres.stats.iterations;
        rec.inner_s_converged = yres.stats.converged;
        if (zres.stats.breakdown || yres.stats.breakdown) {
            ++rep.inner_breakdowns;
            if (rep.inner_breakdowns == 1)
                rep.warnings.push_back("inner CG breakdown at outer iteration " +
                                       std::to_string(k + 1));
        }

        t0 = Clock::now();
        for (std::size_t i = 0; i < n; ++i)
            rep.x[i] = quantize(rep.x[i] + std::ldexp(yres.x[i], shift), cfg.working);
        rep.seconds.update += seconds_since(t0);

        t0 = Clock::now();
        const std::vector<double> r64 = residual(problem.a, rep.x, problem.b, formats::fp64());
        const double rnorm = norm2(r64);
        rec.relative_residual = rnorm / rep.initial_residual_norm;
        rec.backward_error = rnorm / (rep.a_norm * norm2(rep.x) + b_norm);
        if (exact) {
            for (std::size_t i = 0; i < n; ++i)
                err[i] = rep.x[i] - (*exact)[i];
            const double en = norm2(err);
            rec.forward_error = en / exact_norm;
            rec.mu = en > 0.0 ? norm2(spmv(problem.a, err)) / (rep.a_norm * en) : nan;
        } else {
            rec.forward_error = nan;
            rec.mu = nan;
        }
        rep.seconds.monitor += seconds_since(t0);

        rep.history.push_back(rec);
        if (cfg.record_iterates)
            rep.iterates.push_back(rep.x);
        rel_history.push_back(rec.relative_residual);

        if (rec.relative_residual <= cfg.outer_tol) {
            rep.status = SolveStatus::Converged;
            break;
        }
        if (!std::isfinite(rec.relative_residual) ||
            rec.relative_residual > cfg.divergence_factor) {
            rep.status = SolveStatus::Diverged;
            break;
        }
        if (stagnation_check(rel_history, cfg.stagnation_window, cfg.stagnation_factor)) {
            rep.status = SolveStatus::Stagnated;
            break;
        }
    }
    rep.seconds.total = seconds_since(t_start);
    return rep;
}

SolveReport gadi_solve(const Problem& problem, const GadiConfig& cfg)
{
    validate(cfg);
    const Splitting sp = make_hss_splitting(problem.a, cfg.alpha, cfg.solver);
    return gadi_solve(problem, sp, cfg);
}

} // namespace gadi
