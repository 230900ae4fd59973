#include "gadi/alphaselect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

#include "gadi/analysis.hpp"
#include "gadi/error.hpp"
#include "gadi/splitting.hpp"

namespace gadi {

int default_thread_count()
{
    if (const char* env = std::getenv("GADI_MP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> log_grid(double log10_lo, double log10_hi, int count)
{
    if (count < 1)
        throw InvalidConfig("log_grid needs count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        out[k] = std::pow(10.0, log10_lo + t * (log10_hi - log10_lo));
    }
    return out;
}

namespace {

bool better(const GridSearchEntry& a, const GridSearchEntry& b)
{
    if (a.outer_iterations != b.outer_iterations)
        return a.outer_iterations < b.outer_iterations;
    if (a.inner_iterations != b.inner_iterations)
        return a.inner_iterations < b.inner_iterations;
    return a.alpha < b.alpha;
}

} // namespace

GridSearchResult grid_search_alpha(const Problem& problem, const std::vector<double>& candidates,
                                   const GadiConfig& cfg, int threads)
{
    if (candidates.empty())
        throw InvalidConfig("grid_search_alpha needs at least one candidate");
    for (double a : candidates)
        if (!(a > 0.0) || !std::isfinite(a))
            throw InvalidConfig("grid_search_alpha candidates must be positive and finite");

    const Splitting base = make_hss_splitting(problem.a, candidates.front(), cfg.solver);
    GridSearchResult result;
    result.entries.resize(candidates.size());

    // A candidate can only win with at most the best outer count seen so far,
    // so later solves are cut off there.
    std::atomic<int> budget{cfg.outer_maxit};
    auto run_one = [&](std::size_t i) {
        GadiConfig c = cfg;
        c.alpha = candidates[i];
        c.record_iterates = false;
        c.outer_maxit = budget.load();
        const SolveReport rep = gadi_solve(problem, with_alpha(base, c.alpha), c);
        result.entries[i] = {c.alpha, rep.status, rep.outer_iterations(), rep.total_inner_iterations()};
        if (rep.status == SolveStatus::Converged) {
            int cur = budget.load();
            while (rep.outer_iterations() < cur && !budget.compare_exchange_weak(cur, rep.outer_iterations())) {
            }
        }
    };

    const int workers = std::clamp(threads, 1, static_cast<int>(candidates.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < candidates.size(); i = next++)
                        run_one(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = candidates.size();
                }
            });
        }
        for (auto& t : pool)
            t.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    const GridSearchEntry* best = nullptr;
    for (const auto& e : result.entries)
        if (e.status == SolveStatus::Converged && (!best || better(e, *best)))
            best = &e;
    if (!best)
        throw AllDiverged("no alpha candidate converged");
    result.best_alpha = best->alpha;
    return result;
}

std::vector<double> alpha_features(Index grid, const PrecisionFormat& solver, ProblemFamily family)
{
    if (grid < 1)
        throw InvalidConfig("alpha features need grid >= 1");
    std::vector<double> f(kAlphaFeatureCount, 0.0);
    f[0] = std::log(static_cast<double>(grid));
    f[1] = std::log2(1.0 / unit_roundoff(solver));
    f[2 + static_cast<int>(family)] = 1.0;
    return f;
}

std::vector<double> alpha_features(const Problem& problem, const PrecisionFormat& solver)
{
    const auto it = problem.params.find("ng");
    if (it == problem.params.end())
        throw InvalidConfig("problem '" + problem.label + "' has no 'ng' parameter for alpha features");
    std::string family = problem.label;
    if (const auto dash = family.find('-'); dash != std::string::npos)
        family.resize(dash);
    return alpha_features(static_cast<Index>(it->second), solver, family_by_name(family));
}

double rbf_kernel(const GprKernel& k, const std::vector<double>& a, const std::vector<double>& b)
{
    double q = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / k.length_scales[i];
        q += d * d;
    }
    return k.signal_variance * std::exp(-0.5 * q);
}

std::vector<GprKernel> default_hyper_grid(int dim)
{
    if (dim < 1)
        throw InvalidConfig("hyper grid needs dim >= 1");
    const double signal[] = {0.25, 1.0, 4.0};
    const double noise[] = {1e-6, 1e-4, 1e-2};
    const double scales[] = {0.5, 1.0, 2.0, 4.0};
    const int free_scales = std::min(dim, 2);
    const int combos = free_scales == 1 ? 4 : 16;

    std::vector<GprKernel> grid;
    for (double sf : signal)
        for (double sn : noise)
            for (int c = 0; c < combos; ++c) {
                GprKernel k;
                k.signal_variance = sf;
                k.noise_variance = sn;
                k.length_scales.assign(static_cast<std::size_t>(dim), 1.0);
                k.length_scales[0] = scales[c % 4];
                if (free_scales == 2)
                    k.length_scales[1] = scales[c / 4];
                grid.push_back(std::move(k));
            }
    return grid;
}

namespace {

void check_training_set(const std::vector<std::vector<double>>& x, const std::vector<double>& y)
{
    if (x.size() < 2)
        throw InvalidConfig("gpr_fit needs at least 2 training points");
    if (x.size() != y.size())
        throw DimensionMismatch("gpr_fit: " + std::to_string(x.size()) + " inputs but " +
                                std::to_string(y.size()) + " targets");
    const std::size_t dim = x.front().size();
    if (dim == 0)
        throw InvalidConfig("gpr_fit needs at least one feature");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != dim)
            throw DimensionMismatch("gpr_fit: inconsistent feature lengths");
        for (double v : x[i])
            if (!std::isfinite(v))
                throw InvalidConfig("gpr_fit: non-finite feature");
        if (!std::isfinite(y[i]))
            throw InvalidConfig("gpr_fit: non-finite target");
    }
}

void check_kernel(const GprKernel& k, std::size_t dim)
{
    if (!(k.signal_variance > 0.0) || !(k.noise_variance > 0.0))
        throw InvalidConfig("GPR kernel variances must be positive");
    if (k.length_scales.size() != dim)
        throw DimensionMismatch("GPR kernel has " + std::to_string(k.length_scales.size()) +
                                " length scales for " + std::to_string(dim) + " features");
    for (double l : k.length_scales)
        if (!(l > 0.0))
            throw InvalidConfig("GPR length scales must be positive");
}

// Factors K + sigma_n^2 I; false when the factorization is not usable.
bool factor(const std::vector<std::vector<double>>& x, const Eigen::VectorXd& y, const GprKernel& k,
            GprModel& out)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            gram(i, j) = gram(j, i) = rbf_kernel(k, x[i], x[j]);
    gram.diagonal().array() += k.noise_variance;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        return false;
    Eigen::MatrixXd l = llt.matrixL();
    if ((l.diagonal().array() <= 0.0).any() || !l.allFinite())
        return false;

    out.kernel = k;
    out.chol_lower = std::move(l);
    out.weights = llt.solve(y);
    out.log_marginal_likelihood = -0.5 * y.dot(out.weights) - out.chol_lower.diagonal().array().log().sum() -
                                  0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return std::isfinite(out.log_marginal_likelihood);
}

} // namespace

GprModel gpr_fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                 const std::vector<GprKernel>& hyper_grid)
{
    check_training_set(x, y);
    if (hyper_grid.empty())
        throw InvalidConfig("gpr_fit needs a nonempty hyperparameter grid");
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));

    GprModel best;
    bool found = false;
    for (const GprKernel& k : hyper_grid) {
        check_kernel(k, x.front().size());
        GprModel trial;
        bool ok = factor(x, yv, k, trial);
        if (!ok) {
            GprKernel raised = k;
            raised.noise_variance += kGprNoiseFloor;
            ok = factor(x, yv, raised, trial);
        }
        if (ok && (!found || trial.log_marginal_likelihood > best.log_marginal_likelihood)) {
            best = std::move(trial);
            found = true;
        }
    }
    if (!found)
        throw IllConditionedGram("GPR Gram matrix is not positive definite for any hyperparameter candidate");
    best.inputs = x;
    best.targets = y;
    return best;
}

double GprPrediction::alpha() const { return std::exp(mean); }

GprPrediction gpr_predict(const GprModel& model, const std::vector<double>& x)
{
    if (model.inputs.empty() || model.weights.size() == 0)
        throw InvalidConfig("gpr_predict on an unfitted model");
    if (x.size() != static_cast<std::size_t>(model.dimension()))
        throw DimensionMismatch("gpr_predict: query has " + std::to_string(x.size()) + " features, model has " +
                                std::to_string(model.dimension()));
    const auto n = static_cast<Eigen::Index>(model.inputs.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ks[i] = rbf_kernel(model.kernel, model.inputs[i], x);

    GprPrediction p;
    p.mean = ks.dot(model.weights);
    const Eigen::VectorXd v = model.chol_lower.triangularView<Eigen::Lower>().solve(ks);
    p.variance = std::max(0.0, model.kernel.signal_variance - v.squaredNorm());
    return p;
}

nlohmann::json to_json(const GprModel& model)
{
    return {
        {"inputs", model.inputs},
        {"targets", model.targets},
        {"kernel",
         {{"signal_variance", model.kernel.signal_variance},
          {"length_scales", model.kernel.length_scales},
          {"noise_variance", model.kernel.noise_variance}}},
        {"log_marginal_likelihood", model.log_marginal_likelihood},
    };
}

GprModel gpr_model_from_json(const nlohmann::json& j)
{
    try {
        const auto x = j.at("inputs").get<std::vector<std::vector<double>>>();
        const auto y = j.at("targets").get<std::vector<double>>();
        GprKernel k;
        const auto& jk = j.at("kernel");
        k.signal_variance = jk.at("signal_variance").get<double>();
        k.length_scales = jk.at("length_scales").get<std::vector<double>>();
        k.noise_variance = jk.at("noise_variance").get<double>();
        return gpr_fit(x, y, {k});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("GPR model: ") + e.what());
    }
}

void validate(const AlphaSelectConfig& cfg)
{
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0))
        throw InvalidConfig("tau must lie in (0, 1)");
    if (!(cfg.escalation_factor > 1.0) || !std::isfinite(cfg.escalation_factor))
        throw InvalidConfig("escalation_factor must be > 1");
    if (cfg.max_escalations < 0)
        throw InvalidConfig("max_escalations must be >= 0");
    if (cfg.probe_outer_maxit < 1)
        throw InvalidConfig("probe_outer_maxit must be >= 1");
    for (double a : cfg.candidate_grid)
        if (!(a > 0.0))
            throw InvalidConfig("candidate_grid entries must be positive");
}

AlphaSelection escalate_alpha(const Problem& problem, double alpha, const AlphaSelectConfig& sel,
                              const GadiConfig& cfg)
{
    validate(sel);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw NonPositiveAlpha("starting alpha must be positive and finite");

    const Splitting base = make_hss_splitting(problem.a, alpha, cfg.solver);
    const double us = unit_roundoff(cfg.solver);
    AlphaSelection out;
    out.predicted_alpha = alpha;

    for (int step = 0; step <= sel.max_escalations; ++step) {
        const Splitting sp = with_alpha(base, alpha);
        EscalationStep rec;
        rec.alpha = alpha;
        if (sel.condition_gate) {
            rec.kappa_h = condition_estimate(sp.h);
            rec.kappa_s = condition_estimate(sp.s);
            rec.gate_value = rec.kappa_h * rec.kappa_s * us;
            rec.accepted = rec.gate_value < sel.tau;
        } else {
            GadiConfig probe = cfg;
            probe.alpha = alpha;
            probe.outer_maxit = std::min(cfg.outer_maxit, sel.probe_outer_maxit);
            probe.record_iterates = false;
            const SolveReport rep = gadi_solve(problem, sp, probe);
            rec.kappa_h = rec.kappa_s = rec.gate_value = std::numeric_limits<double>::quiet_NaN();
            rec.probe_status = rep.status;
            rec.accepted = rep.status != SolveStatus::Stagnated && rep.status != SolveStatus::Diverged;
        }
        out.trace.push_back(rec);
        if (rec.accepted) {
            out.alpha = alpha;
            out.escalations = step;
            return out;
        }
        alpha *= sel.escalation_factor;
    }
    throw EscalationExhausted("alpha escalation failed after " + std::to_string(sel.max_escalations) +
                              " steps (last alpha " + std::to_string(out.trace.back().alpha) + ")");
}

AlphaSelection select_alpha(const Problem& problem, const GprModel& model, const AlphaSelectConfig& sel,
                            const GadiConfig& cfg)
{
    const GprPrediction pred = gpr_predict(model, alpha_features(problem, cfg.solver));
    return escalate_alpha(problem, pred.alpha(), sel, cfg);
}

} // namespace gadi
