// gadi-mp: generate benchmark systems, run mixed-precision GADI solves,
// compare against the rounding-error bounds, and train/query the alpha model.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gadi/alphaselect.hpp"
#include "gadi/error.hpp"
#include "gadi/experiment.hpp"
#include "gadi/matrix_market.hpp"

using namespace gadi;

namespace {

struct PrecisionFlags {
    std::string u, ur, us;

    void apply(GadiConfig& cfg) const
    {
        if (!u.empty())
            cfg.working = parse_precision_field("--u", u);
        if (!ur.empty())
            cfg.residual = parse_precision_field("--ur", ur);
        if (!us.empty())
            cfg.solver = parse_precision_field("--us", us);
    }
};

void add_problem_options(CLI::App* app, ProblemSpec& p, bool with_grid = true)
{
    app->add_option("--problem", p.family, "Problem family (cdr2d | cd3d | crd) or a .mtx file");
    if (with_grid)
        app->add_option("--ng", p.grid, "Grid points per dimension");
    app->add_option("--r", p.r, "cdr2d convection strength");
    app->add_option("--s", p.s, "crd potential scale");
    app->add_option("--seed", p.seed, "crd potential seed");
    app->add_option("--cd3d-variant", p.cd3d_variant, "cd3d stencil: consistent | literal");
    app->add_option("--laplacian-scaling", p.laplacian_scaling, "crd Laplacian: nu_over_h2 | nu");
}

void add_solver_options(CLI::App* app, GadiConfig& s, PrecisionFlags& prec, bool with_us = true)
{
    app->add_option("--alpha", s.alpha, "Shift alpha");
    app->add_option("--omega", s.omega, "Extrapolation omega in [0, 2)");
    app->add_option("--u", prec.u, "Working precision");
    app->add_option("--ur", prec.ur, "Residual precision");
    if (with_us)
        app->add_option("--us", prec.us, "Solver precision");
    app->add_option("--outer-tol", s.outer_tol, "Outer relative residual tolerance");
    app->add_option("--outer-maxit", s.outer_maxit, "Outer iteration limit");
    app->add_option("--inner-tol", s.inner_tol, "Inner relative residual tolerance");
    app->add_option("--inner-maxit", s.inner_maxit, "Inner iteration limit (0: default)");
    app->add_option("--stagnation-window", s.stagnation_window);
    app->add_option("--stagnation-factor", s.stagnation_factor);
    app->add_option("--divergence-factor", s.divergence_factor);
    app->add_flag("--strict-model,!--no-strict-model", s.strict_model,
                  "Round every operation in the storage format (default on)");
    app->add_flag("--scale-residual,!--no-scale-residual", s.scale_residual,
                  "Power-of-two scaling of the residual before the inner solves (default on)");
}

void add_experiment_options(CLI::App* app, ExperimentConfig& cfg, PrecisionFlags& prec, double& override_alpha,
                            bool sweep = false)
{
    add_problem_options(app, cfg.problem, !sweep);
    if (!sweep)
        app->add_option("--matrix", cfg.problem.matrix_path, "Matrix Market file (sidecar JSON optional)");
    add_solver_options(app, cfg.solver, prec, !sweep);
    app->add_option("--alpha-override", override_alpha, "Use this alpha, bypassing model and escalation");
    app->add_option("--model", cfg.model_path, "GPR alpha model JSON");
    app->add_flag("--select,!--no-select", cfg.select, "Run the safety-threshold escalation on alpha");
    app->add_option("--tau", cfg.selection.tau, "Safety threshold for kappa(H) kappa(S) u_s");
    app->add_option("--escalation-factor", cfg.selection.escalation_factor);
    app->add_option("--max-escalations", cfg.selection.max_escalations);
    app->add_flag("--condition-gate,!--no-condition-gate", cfg.selection.condition_gate,
                  "Escalate on the condition gate (off: on probe stagnation)");
    app->add_option("--probe-maxit", cfg.selection.probe_outer_maxit);
    app->add_option("--repeat", cfg.repeat, "Timed repeats after the warm-up");
    app->add_flag("--warmup,!--no-warmup", cfg.warmup);
    app->add_option("--trace", cfg.trace_path, "Per-iteration JSON lines (appended)");
    app->add_option("--summary", cfg.summary_path, "Summary CSV (appended)");
    app->add_option("--theory", cfg.theory_path, "Theory comparison JSON");
    app->add_option("--report", cfg.report_path, "Solve report JSON (verify: theory comparison JSON)");
    app->add_option("--dense-cap", cfg.dense_cap, "Largest n for dense analysis");
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::vector<Index> parse_grid_list(const std::string& s)
{
    std::vector<Index> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(item, &pos);
            if (pos != item.size() || v < 2)
                throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParseError("field '--ng': bad grid size '" + item + "'");
        }
    }
    if (out.empty())
        throw ParseError("field '--ng': empty list");
    return out;
}

// The config file is read before the command line so flags override it.
std::string find_config(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc)
            return argv[i + 1];
        if (a.rfind("--config=", 0) == 0)
            return a.substr(9);
    }
    return {};
}

void print_rows(const ExperimentResult& res)
{
    std::cout << summary_csv_header() << '\n';
    for (const auto& r : res.rows)
        std::cout << to_csv(r) << '\n';
    for (const auto& w : res.last.warnings)
        std::cerr << "warning: " << w << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed-precision GADI solver"};
    app.require_subcommand(1);
    std::string config_path;

    ExperimentConfig exp;
    PrecisionFlags prec;
    double override_alpha = 0.0;

    try {
        if (const std::string path = find_config(argc, argv); !path.empty())
            apply_json(exp, read_config_file(path));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    auto* gen = app.add_subcommand("gen", "Write a benchmark system as Matrix Market plus sidecar JSON");
    std::string gen_out;
    add_problem_options(gen, exp.problem);
    gen->add_option("--out", gen_out, "Output .mtx path")->required();

    auto* solve = app.add_subcommand("solve", "Solve one system and report");
    add_experiment_options(solve, exp, prec, override_alpha);

    auto* verify = app.add_subcommand("verify", "Solve and compare each step with the error bounds");
    add_experiment_options(verify, exp, prec, override_alpha);

    auto* train = app.add_subcommand("train-alpha", "Fit the GPR alpha model from grid-searched labels");
    std::string train_grids = "8,16,32", train_out = "model.json";
    double grid_lo = -2.0, grid_hi = 2.0;
    int grid_count = 13, threads = 0;
    train->add_option("--family", exp.problem.family, "Problem family")->check(CLI::IsMember({"cdr2d", "cd3d", "crd"}));
    train->add_option("--ng", train_grids, "Comma-separated training grid sizes");
    train->add_option("--grid-lo", grid_lo, "log10 of the smallest candidate alpha");
    train->add_option("--grid-hi", grid_hi, "log10 of the largest candidate alpha");
    train->add_option("--grid-count", grid_count, "Number of log-spaced candidates");
    train->add_option("--threads", threads, "Parallel candidate solves (0: GADI_MP_THREADS or all cores)");
    train->add_option("--out", train_out, "Model JSON path");
    add_solver_options(train, exp.solver, prec);
    train->add_option("--r", exp.problem.r);
    train->add_option("--s", exp.problem.s);
    train->add_option("--seed", exp.problem.seed);
    train->add_option("--cd3d-variant", exp.problem.cd3d_variant);
    train->add_option("--laplacian-scaling", exp.problem.laplacian_scaling);

    auto* predict = app.add_subcommand("predict-alpha", "Predict alpha from a trained model");
    std::string model_in;
    Index predict_grid = 64;
    predict->add_option("--model", model_in, "Model JSON path")->required();
    predict->add_option("--ng", predict_grid, "Grid size");
    predict->add_option("--us", prec.us, "Solver precision");
    predict->add_option("--family", exp.problem.family, "Problem family")->check(CLI::IsMember({"cdr2d", "cd3d", "crd"}));

    auto* bench = app.add_subcommand("bench", "Sweep grid sizes and solver precisions");
    std::string bench_grids = "16,32", bench_us = "fp32,bf16";
    add_experiment_options(bench, exp, prec, override_alpha, true);
    bench->add_option("--ng", bench_grids, "Comma-separated grid sizes");
    bench->add_option("--us", bench_us, "Comma-separated solver precisions");

    for (auto* sub : {gen, solve, verify, train, predict, bench})
        sub->add_option("--config", config_path, "JSON config; keys are flag names without dashes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        prec.apply(exp.solver);
        if (solve->get_option("--alpha-override")->count() > 0 || verify->get_option("--alpha-override")->count() > 0 ||
            bench->get_option("--alpha-override")->count() > 0)
            exp.alpha_override = override_alpha;

        if (*gen) {
            const Problem p = build_problem(exp.problem);
            save_problem(gen_out, p);
            std::cout << gen_out << " n=" << p.size() << " nnz=" << p.a.nnz() << " sidecar=" << sidecar_path(gen_out)
                      << '\n';
            return 0;
        }

        if (*solve) {
            const ExperimentResult res = run_experiment(exp);
            print_rows(res);
            return res.converged() ? 0 : 1;
        }

        if (*verify) {
            if (exp.theory_path.empty() && !exp.report_path.empty())
                std::swap(exp.theory_path, exp.report_path);
            if (exp.theory_path.empty())
                exp.theory_path = "theory.json";
            const ExperimentResult res = run_experiment(exp);
            print_rows(res);
            const auto& th = *res.theory;
            std::cout << "kappa(A)=" << th.kappa_a << " kappa(H)=" << th.kappa_h << " kappa(S)=" << th.kappa_s
                      << " rho(T_F)=" << th.rho << " c_F=" << th.c_f << " c_B=" << th.c_b << '\n';
            if (!th.rows.empty()) {
                const auto& last = th.rows.back();
                std::cout << "final forward error " << last.forward_error << " (zeta_F " << last.bounds.zeta_f
                          << "), backward error " << last.backward_error << " (zeta_B " << last.bounds.zeta_b
                          << ")\n";
            }
            std::cout << "theory written to " << exp.theory_path << '\n';
            return res.converged() ? 0 : 1;
        }

        if (*train) {
            const auto grids = parse_grid_list(train_grids);
            const auto candidates = log_grid(grid_lo, grid_hi, grid_count);
            const int workers = threads > 0 ? threads : default_thread_count();
            std::vector<std::vector<double>> x;
            std::vector<double> y;
            nlohmann::json labels = nlohmann::json::array();
            for (Index g : grids) {
                ProblemSpec spec = exp.problem;
                spec.grid = g;
                const Problem p = build_problem(spec);
                const GridSearchResult gs = grid_search_alpha(p, candidates, exp.solver, workers);
                x.push_back(alpha_features(p, exp.solver.solver));
                y.push_back(std::log(gs.best_alpha));
                labels.push_back({{"ng", g}, {"best_alpha", gs.best_alpha}});
                std::cerr << p.label << " ng=" << g << " best alpha " << gs.best_alpha << '\n';
            }
            const GprModel model = gpr_fit(x, y, default_hyper_grid(kAlphaFeatureCount));
            nlohmann::json j = to_json(model);
            j["schema_version"] = kReportSchemaVersion;
            j["family"] = exp.problem.family;
            j["solver_precision"] = exp.solver.solver.name;
            j["labels"] = labels;
            std::ofstream out(train_out);
            if (!out)
                throw ParseError("cannot write '" + train_out + "'");
            out << j.dump(2) << '\n';
            std::cout << "model written to " << train_out << '\n';
            return 0;
        }

        if (*predict) {
            std::ifstream in(model_in);
            if (!in)
                throw ParseError("cannot open model '" + model_in + "'");
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(model_in + ": " + e.what());
            }
            const GprModel model = gpr_model_from_json(j);
            const GprPrediction pr = gpr_predict(
                model, alpha_features(predict_grid, exp.solver.solver, family_by_name(exp.problem.family)));
            std::cout << nlohmann::json{{"alpha", pr.alpha()}, {"log_alpha_mean", pr.mean},
                                        {"log_alpha_variance", pr.variance}}
                             .dump()
                      << '\n';
            return 0;
        }

        if (*bench) {
            const auto grids = parse_grid_list(bench_grids);
            std::vector<PrecisionFormat> formats;
            for (const auto& name : split_list(bench_us))
                formats.push_back(parse_precision_field("--us", name));
            bool all = true;
            std::cout << summary_csv_header() << '\n';
            for (Index g : grids)
                for (const auto& f : formats) {
                    ExperimentConfig c = exp;
                    c.problem.grid = g;
                    c.solver.solver = f;
                    const ExperimentResult res = run_experiment(c);
                    for (const auto& r : res.rows)
                        std::cout << to_csv(r) << '\n';
                    all = all && res.converged();
                }
            return all ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
