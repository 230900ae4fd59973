#include "gadi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gadi/error.hpp"
#include "gadi/matrix_market.hpp"
#include "gadi/splitting.hpp"

namespace gadi {

Problem build_problem(const ProblemSpec& spec)
{
    if (!spec.matrix_path.empty())
        return load_problem(spec.matrix_path);
    if (spec.family.size() > 4 && spec.family.ends_with(".mtx"))
        return load_problem(spec.family);
    switch (family_by_name(spec.family)) {
    case ProblemFamily::Cdr2d: return build_cdr_2d(spec.grid, spec.r);
    case ProblemFamily::Cd3d: return build_cd_3d(spec.grid, cd3d_variant_by_name(spec.cd3d_variant));
    case ProblemFamily::ComplexRd: {
        LaplacianScaling scaling;
        if (spec.laplacian_scaling == "nu_over_h2")
            scaling = LaplacianScaling::NuOverH2;
        else if (spec.laplacian_scaling == "nu")
            scaling = LaplacianScaling::Nu;
        else
            throw InvalidConfig("unknown laplacian scaling '" + spec.laplacian_scaling +
                                "' (expected nu_over_h2|nu)");
        return build_complex_rd(spec.grid, spec.s, spec.seed, scaling);
    }
    }
    throw InvalidConfig("unknown problem family");
}

PrecisionFormat parse_precision_field(const std::string& field, const std::string& value)
{
    try {
        return format_by_name(value);
    } catch (const InvalidConfig& e) {
        throw ParseError("field '" + field + "': " + e.what());
    }
}

namespace {

template <class T>
T field_value(const nlohmann::json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("field '" + key + "': wrong type (" + std::string(j.type_name()) + ")");
    }
}

} // namespace

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object())
        throw ParseError("config root must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        auto& p = cfg.problem;
        auto& s = cfg.solver;
        auto& sel = cfg.selection;
        if (key == "problem") p.family = field_value<std::string>(v, key);
        else if (key == "ng") p.grid = field_value<Index>(v, key);
        else if (key == "r") p.r = field_value<double>(v, key);
        else if (key == "s") p.s = field_value<double>(v, key);
        else if (key == "seed") p.seed = field_value<std::uint64_t>(v, key);
        else if (key == "cd3d-variant") p.cd3d_variant = field_value<std::string>(v, key);
        else if (key == "laplacian-scaling") p.laplacian_scaling = field_value<std::string>(v, key);
        else if (key == "matrix") p.matrix_path = field_value<std::string>(v, key);
        else if (key == "alpha") s.alpha = field_value<double>(v, key);
        else if (key == "omega") s.omega = field_value<double>(v, key);
        else if (key == "u") s.working = parse_precision_field(key, field_value<std::string>(v, key));
        else if (key == "ur") s.residual = parse_precision_field(key, field_value<std::string>(v, key));
        else if (key == "us") s.solver = parse_precision_field(key, field_value<std::string>(v, key));
        else if (key == "outer-tol") s.outer_tol = field_value<double>(v, key);
        else if (key == "outer-maxit") s.outer_maxit = field_value<int>(v, key);
        else if (key == "inner-tol") s.inner_tol = field_value<double>(v, key);
        else if (key == "inner-maxit") s.inner_maxit = field_value<int>(v, key);
        else if (key == "stagnation-window") s.stagnation_window = field_value<int>(v, key);
        else if (key == "stagnation-factor") s.stagnation_factor = field_value<double>(v, key);
        else if (key == "divergence-factor") s.divergence_factor = field_value<double>(v, key);
        else if (key == "strict-model") s.strict_model = field_value<bool>(v, key);
        else if (key == "scale-residual") s.scale_residual = field_value<bool>(v, key);
        else if (key == "alpha-override") cfg.alpha_override = field_value<double>(v, key);
        else if (key == "model") cfg.model_path = field_value<std::string>(v, key);
        else if (key == "select") cfg.select = field_value<bool>(v, key);
        else if (key == "tau") sel.tau = field_value<double>(v, key);
        else if (key == "escalation-factor") sel.escalation_factor = field_value<double>(v, key);
        else if (key == "max-escalations") sel.max_escalations = field_value<int>(v, key);
        else if (key == "condition-gate") sel.condition_gate = field_value<bool>(v, key);
        else if (key == "probe-maxit") sel.probe_outer_maxit = field_value<int>(v, key);
        else if (key == "repeat") cfg.repeat = field_value<int>(v, key);
        else if (key == "warmup") cfg.warmup = field_value<bool>(v, key);
        else if (key == "trace") cfg.trace_path = field_value<std::string>(v, key);
        else if (key == "summary") cfg.summary_path = field_value<std::string>(v, key);
        else if (key == "theory") cfg.theory_path = field_value<std::string>(v, key);
        else if (key == "report") cfg.report_path = field_value<std::string>(v, key);
        else if (key == "dense-cap") cfg.dense_cap = field_value<Index>(v, key);
        else throw ParseError("unknown config field '" + key + "'");
    }
}

nlohmann::json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        long line = 1, col = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
    }
}

std::string summary_csv_header()
{
    return "schema_version,problem,n,alpha,omega,u_s,u,u_r,status,outer_iterations,inner_iterations,"
           "relative_residual,backward_error,forward_error,wall_seconds,repeat";
}

namespace {

std::string num(double v)
{
    if (std::isnan(v))
        return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

std::string to_csv(const SummaryRow& r)
{
    std::ostringstream os;
    os << kReportSchemaVersion << ',' << r.problem << ',' << r.n << ',' << num(r.alpha) << ',' << num(r.omega)
       << ',' << r.u_s << ',' << r.u << ',' << r.u_r << ',' << to_string(r.status) << ',' << r.outer_iterations
       << ',' << r.inner_iterations << ',' << num(r.relative_residual) << ',' << num(r.backward_error) << ','
       << num(r.forward_error) << ',' << num(r.wall_seconds) << ',' << r.repeat;
    return os.str();
}

SummaryRow summarize(const Problem& p, const GadiConfig& cfg, const SolveReport& rep, int repeat)
{
    SummaryRow r;
    r.problem = p.label;
    r.n = p.size();
    r.alpha = cfg.alpha;
    r.omega = cfg.omega;
    r.u_s = cfg.solver.name;
    r.u = cfg.working.name;
    r.u_r = cfg.residual.name;
    r.status = rep.status;
    r.outer_iterations = rep.outer_iterations();
    r.inner_iterations = rep.total_inner_iterations();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.relative_residual = rep.history.empty() ? nan : rep.history.back().relative_residual;
    r.backward_error = rep.history.empty() ? nan : rep.history.back().backward_error;
    r.forward_error = rep.history.empty() ? nan : rep.history.back().forward_error;
    r.wall_seconds = rep.seconds.total;
    r.repeat = repeat;
    return r;
}

nlohmann::json to_json(const IterationRecord& rec)
{
    return {
        {"iteration", rec.iteration},
        {"residual_norm", finite_or_null(rec.residual_norm)},
        {"relative_residual", finite_or_null(rec.relative_residual)},
        {"backward_error", finite_or_null(rec.backward_error)},
        {"forward_error", finite_or_null(rec.forward_error)},
        {"mu", finite_or_null(rec.mu)},
        {"inner_h_iterations", rec.inner_h_iterations},
        {"inner_s_iterations", rec.inner_s_iterations},
        {"inner_h_converged", rec.inner_h_converged},
        {"inner_s_converged", rec.inner_s_converged},
    };
}

nlohmann::json to_json(const TheoryComparison& cmp)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cmp.rows) {
        rows.push_back({
            {"iteration", r.iteration},
            {"forward_error", finite_or_null(r.forward_error)},
            {"backward_error", finite_or_null(r.backward_error)},
            {"forward_ratio", finite_or_null(r.forward_ratio)},
            {"backward_ratio", finite_or_null(r.backward_ratio)},
            {"mu", finite_or_null(r.mu)},
            {"lambda_f", finite_or_null(r.lambda_f)},
            {"lambda_b", finite_or_null(r.lambda_b)},
            {"beta_f", finite_or_null(r.bounds.beta_f)},
            {"zeta_f", finite_or_null(r.bounds.zeta_f)},
            {"beta_b", finite_or_null(r.bounds.beta_b)},
            {"zeta_b", finite_or_null(r.bounds.zeta_b)},
            {"beta_f_simplified", finite_or_null(r.bounds.beta_f_simplified)},
            {"zeta_f_simplified", finite_or_null(r.bounds.zeta_f_simplified)},
            {"beta_b_simplified", finite_or_null(r.bounds.beta_b_simplified)},
            {"zeta_b_simplified", finite_or_null(r.bounds.zeta_b_simplified)},
        });
    }
    return {
        {"schema_version", kReportSchemaVersion},
        {"kappa_a", cmp.kappa_a},
        {"kappa_h", cmp.kappa_h},
        {"kappa_s", cmp.kappa_s},
        {"kappa_hs", cmp.kappa_hs},
        {"rho", cmp.rho},
        {"c_f", cmp.c_f},
        {"c_b", cmp.c_b},
        {"rows", rows},
    };
}

nlohmann::json report_json(const ExperimentResult& res)
{
    const GadiConfig& sc = res.solver;
    nlohmann::json j = {
        {"schema_version", kReportSchemaVersion},
        {"problem", res.problem.label},
        {"n", res.problem.size()},
        {"nnz", res.problem.a.nnz()},
        {"alpha", sc.alpha},
        {"omega", sc.omega},
        {"u_s", sc.solver.name},
        {"u", sc.working.name},
        {"u_r", sc.residual.name},
        {"outer_tol", sc.outer_tol},
        {"inner_tol", sc.inner_tol},
        {"strict_model", sc.strict_model},
        {"status", to_string(res.last.status)},
        {"outer_iterations", res.last.outer_iterations()},
        {"inner_iterations", res.last.total_inner_iterations()},
        {"a_norm", res.last.a_norm},
        {"warnings", res.last.warnings},
    };
    const PhaseTimes& t = res.last.seconds;
    j["seconds"] = {{"residual", t.residual}, {"h_solve", t.h_solve}, {"s_solve", t.s_solve},
                    {"update", t.update},     {"monitor", t.monitor}, {"total", t.total}};
    nlohmann::json walls = nlohmann::json::array();
    for (const auto& r : res.rows)
        walls.push_back(r.wall_seconds);
    j["wall_seconds"] = walls;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& rec : res.last.history)
        iters.push_back(to_json(rec));
    j["iterations"] = iters;
    if (res.selection) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& st : res.selection->trace)
            steps.push_back({{"alpha", st.alpha},
                             {"kappa_h", st.kappa_h},
                             {"kappa_s", st.kappa_s},
                             {"gate_value", st.gate_value},
                             {"probe_status", to_string(st.probe_status)},
                             {"accepted", st.accepted}});
        j["selection"] = {{"predicted_alpha", res.selection->predicted_alpha},
                          {"alpha", res.selection->alpha},
                          {"escalations", res.selection->escalations},
                          {"trace", steps}};
    }
    return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    if (cfg.repeat < 1)
        throw InvalidConfig("repeat must be >= 1");

    ExperimentResult out;
    out.problem = build_problem(cfg.problem);
    out.solver = cfg.solver;
    GadiConfig& sc = out.solver;

    if (cfg.alpha_override) {
        sc.alpha = *cfg.alpha_override;
    } else {
        if (!cfg.model_path.empty()) {
            std::ifstream in(cfg.model_path);
            if (!in)
                throw ParseError("cannot open model '" + cfg.model_path + "'");
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(cfg.model_path + ": " + e.what());
            }
            const GprModel model = gpr_model_from_json(j);
            sc.alpha = gpr_predict(model, alpha_features(out.problem, sc.solver)).alpha();
        }
        if (cfg.select) {
            out.selection = escalate_alpha(out.problem, sc.alpha, cfg.selection, sc);
            sc.alpha = out.selection->alpha;
        }
    }

    const bool want_theory = !cfg.theory_path.empty();
    if (want_theory) {
        if (!out.problem.exact_solution)
            throw InvalidConfig("theory comparison needs a problem with an exact solution");
        sc.record_iterates = true;
    }
    validate(sc);

    if (!sc.a_norm && out.problem.size() <= cfg.dense_cap)
        sc.a_norm = singular_range(out.problem.a, {.dense_cap = cfg.dense_cap}).sigma_max;

    const Splitting sp = make_hss_splitting(out.problem.a, sc.alpha, sc.solver);
    if (cfg.warmup)
        (void)gadi_solve(out.problem, sp, sc);

    for (int rep = 0; rep < cfg.repeat; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        out.last = gadi_solve(out.problem, sp, sc);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        SummaryRow row = summarize(out.problem, sc, out.last, rep);
        row.wall_seconds = wall;
        out.rows.push_back(row);
    }

    if (!cfg.summary_path.empty()) {
        const bool fresh = !std::filesystem::exists(cfg.summary_path) ||
                           std::filesystem::file_size(cfg.summary_path) == 0;
        std::ofstream csv(cfg.summary_path, std::ios::app);
        if (!csv)
            throw ParseError("cannot write '" + cfg.summary_path + "'");
        if (fresh)
            csv << summary_csv_header() << '\n';
        for (const auto& r : out.rows)
            csv << to_csv(r) << '\n';
    }

    if (!cfg.trace_path.empty()) {
        std::ofstream trace(cfg.trace_path, std::ios::app);
        if (!trace)
            throw ParseError("cannot write '" + cfg.trace_path + "'");
        nlohmann::json head = {
            {"schema_version", kReportSchemaVersion},
            {"type", "run"},
            {"problem", out.problem.label},
            {"n", out.problem.size()},
            {"alpha", sc.alpha},
            {"omega", sc.omega},
            {"u_s", sc.solver.name},
            {"u", sc.working.name},
            {"u_r", sc.residual.name},
            {"status", to_string(out.last.status)},
        };
        if (!out.last.warnings.empty())
            head["warnings"] = out.last.warnings;
        trace << head.dump() << '\n';
        for (const auto& rec : out.last.history) {
            nlohmann::json line = to_json(rec);
            line["schema_version"] = kReportSchemaVersion;
            line["type"] = "iteration";
            trace << line.dump() << '\n';
        }
    }

    if (want_theory) {
        out.theory = compare_with_theory(out.problem, sp, sc, out.last, sqrt_dimension_constant(), cfg.dense_cap);
        std::ofstream th(cfg.theory_path);
        if (!th)
            throw ParseError("cannot write '" + cfg.theory_path + "'");
        th << to_json(*out.theory).dump(2) << '\n';
    }

    if (!cfg.report_path.empty()) {
        std::ofstream rep(cfg.report_path);
        if (!rep)
            throw ParseError("cannot write '" + cfg.report_path + "'");
        rep << report_json(out).dump(2) << '\n';
    }
    return out;
}

} // namespace gadi
