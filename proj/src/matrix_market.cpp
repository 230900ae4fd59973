#include "gadi/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "gadi/error.hpp"

namespace gadi {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void fail(long line, const std::string& msg)
{
    throw ParseError("matrix market line " + std::to_string(line) + ": " + msg);
}

} // namespace

CsrMatrix read_matrix_market(std::istream& in)
{
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line))
        fail(1, "empty input");
    ++lineno;

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket")
        fail(lineno, "missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix")
        fail(lineno, "unsupported object '" + object + "'");
    if (format != "coordinate")
        fail(lineno, "unsupported format '" + format + "' (only coordinate)");
    if (field != "real" && field != "integer" && field != "pattern")
        fail(lineno, "unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
        fail(lineno, "unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] != '%')
            break;
    }
    long long rows = 0, cols = 0, entries = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
            fail(lineno, "bad size line");
    }
    if (symmetry != "general" && rows != cols)
        fail(lineno, "symmetric storage needs a square matrix");

    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(symmetry == "general" ? entries : 2 * entries));
    long long seen = 0;
    while (seen < entries && std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%')
            continue;
        std::istringstream entry(line);
        long long i = 0, j = 0;
        double v = 1.0;
        if (!(entry >> i >> j))
            fail(lineno, "bad entry");
        if (field != "pattern" && !(entry >> v))
            fail(lineno, "missing value");
        if (i < 1 || i > rows || j < 1 || j > cols)
            fail(lineno, "index out of range");
        t.push_back({i - 1, j - 1, v});
        if (i != j) {
            if (symmetry == "symmetric")
                t.push_back({j - 1, i - 1, v});
            else if (symmetry == "skew-symmetric")
                t.push_back({j - 1, i - 1, -v});
        } else if (symmetry == "skew-symmetric") {
            fail(lineno, "skew-symmetric storage with a diagonal entry");
        }
        ++seen;
    }
    if (seen < entries)
        fail(lineno, "expected " + std::to_string(entries) + " entries, found " + std::to_string(seen));
    return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

CsrMatrix read_matrix_market(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    try {
        return read_matrix_market(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a)
{
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    const auto& off = a.row_offsets();
    const auto& col = a.col_indices();
    const auto& val = a.values();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = off[i]; k < off[i + 1]; ++k)
            out << i + 1 << ' ' << col[k] + 1 << ' ' << val[k] << '\n';
}

void write_matrix_market(const std::string& path, const CsrMatrix& a)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write '" + path + "'");
    write_matrix_market(out, a);
}

std::string sidecar_path(const std::string& matrix_path)
{
    const std::string ext = ".mtx";
    if (matrix_path.size() > ext.size() && matrix_path.compare(matrix_path.size() - ext.size(), ext.size(), ext) == 0)
        return matrix_path.substr(0, matrix_path.size() - ext.size()) + ".json";
    return matrix_path + ".json";
}

void save_problem(const std::string& matrix_path, const Problem& p)
{
    validate(p);
    write_matrix_market(matrix_path, p.a);
    nlohmann::json j;
    j["label"] = p.label;
    j["params"] = p.params;
    j["b"] = p.b;
    if (p.exact_solution)
        j["exact_solution"] = *p.exact_solution;
    std::ofstream out(sidecar_path(matrix_path));
    if (!out)
        throw ParseError("cannot write '" + sidecar_path(matrix_path) + "'");
    out << std::setprecision(17) << j << '\n';
}

Problem load_problem(const std::string& matrix_path)
{
    Problem p;
    p.a = read_matrix_market(matrix_path);
    p.label = "file";
    std::ifstream side(sidecar_path(matrix_path));
    if (!side) {
        attach_manufactured_rhs(p);
        return p;
    }
    try {
        const nlohmann::json j = nlohmann::json::parse(side);
        p.label = j.value("label", std::string("file"));
        if (j.contains("params"))
            p.params = j.at("params").get<std::map<std::string, double>>();
        p.b = j.at("b").get<std::vector<double>>();
        if (j.contains("exact_solution"))
            p.exact_solution = j.at("exact_solution").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(sidecar_path(matrix_path) + ": " + e.what());
    }
    validate(p);
    return p;
}

} // namespace gadi
