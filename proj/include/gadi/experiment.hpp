#pragma once

// Experiment driver behind the gadi-mp command line: problem construction,
// alpha choice, warm-up plus timed repeats, and the report files.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gadi/alphaselect.hpp"
#include "gadi/analysis.hpp"
#include "gadi/problems.hpp"
#include "gadi/solver.hpp"

namespace gadi {

inline constexpr int kReportSchemaVersion = 1;

struct ProblemSpec {
    std::string family = "cdr2d";
    Index grid = 16;
    double r = 1.0;                       // cdr2d convection strength
    double s = kDefaultPotentialScale;    // crd potential scale
    std::uint64_t seed = 0;               // crd potential stream
    std::string cd3d_variant = "consistent";
    std::string laplacian_scaling = "nu_over_h2";
    std::string matrix_path;              // non-empty: load from Matrix Market
                                          // (a family ending in .mtx does the same)
};

Problem build_problem(const ProblemSpec& spec);

struct ExperimentConfig {
    ProblemSpec problem;
    GadiConfig solver;
    // Explicit alpha; otherwise the model prediction (when given) or
    // solver.alpha, passed through the escalation when `select` is set.
    std::optional<double> alpha_override;
    std::string model_path;
    bool select = false;
    AlphaSelectConfig selection;

    int repeat = 1;
    bool warmup = true;
    std::string trace_path;   // JSON lines, appended
    std::string summary_path; // CSV, appended; header written once
    std::string theory_path;  // JSON, overwritten
    std::string report_path;  // JSON, overwritten: run header plus one record per iteration
    Index dense_cap = kDefaultDenseCap;
};

// Keys mirror the long command-line flags without the leading dashes.
// Throws ParseError naming the offending field.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

// Reads a JSON config file; parse errors carry the line and column.
nlohmann::json read_config_file(const std::string& path);

PrecisionFormat parse_precision_field(const std::string& field, const std::string& value);

struct SummaryRow {
    std::string problem;
    Index n = 0;
    double alpha = 0.0;
    double omega = 0.0;
    std::string u_s, u, u_r;
    SolveStatus status = SolveStatus::MaxIt;
    int outer_iterations = 0;
    long inner_iterations = 0;
    double relative_residual = 0.0;
    double backward_error = 0.0;
    double forward_error = 0.0;
    double wall_seconds = 0.0;
    int repeat = 0;
};

std::string summary_csv_header();
std::string to_csv(const SummaryRow& row);
SummaryRow summarize(const Problem& p, const GadiConfig& cfg, const SolveReport& rep, int repeat);

nlohmann::json to_json(const IterationRecord& rec);
nlohmann::json to_json(const TheoryComparison& cmp);

struct ExperimentResult {
    Problem problem;
    GadiConfig solver; // with the alpha actually used
    std::optional<AlphaSelection> selection;
    std::vector<SummaryRow> rows; // timed repeats only
    SolveReport last;
    std::optional<TheoryComparison> theory;

    bool converged() const { return last.status == SolveStatus::Converged; }
};

// Single-document solve report: configuration, status, phase times and the
// per-iteration records of the last timed run.
nlohmann::json report_json(const ExperimentResult& res);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

} // namespace gadi
