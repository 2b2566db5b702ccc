#include "nlsob/report_io.hpp"

#include "nlsob/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <CLI11.hpp>
#include <boost/version.hpp>

namespace nlsob {

namespace {

const char* scheme_name(Scheme s)
{
    return s == Scheme::Pair ? "pair" : "polar";
}

std::string flag(bool b)
{
    return b ? "1" : "0";
}

} // namespace

std::string format_number(double v)
{
    if (!std::isfinite(v)) {
        return kInfFlag;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void CsvTable::add(std::vector<double> values)
{
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) {
        row.push_back(format_number(v));
    }
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

CsvTable sweep_table(const SweepReport& report)
{
    CsvTable t{{"delta", "value", "tail_bound", "energy", "ratio"}, {}};
    for (const auto& r : report.rows) {
        t.add({r.delta, r.value, r.tail_bound, r.energy, r.ratio});
    }
    return t;
}

CsvTable divergence_table(const DivergenceTable& table)
{
    CsvTable t{{"n", "value", "ratio"}, {}};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        t.rows.push_back({std::to_string(r.n), format_number(r.value),
                          i == 0 ? std::string(kInfFlag) : format_number(r.ratio)});
    }
    return t;
}

CsvTable kappa_trace_table(const KappaReport& report)
{
    CsvTable t{{"iteration", "objective", "proximity", "restart", "best_so_far"}, {}};
    for (const auto& p : report.trace) {
        t.rows.push_back({std::to_string(p.iteration), format_number(p.objective),
                          format_number(p.proximity), std::to_string(p.restart),
                          format_number(p.best)});
    }
    return t;
}

CsvTable validation_table(const KernelValidationReport& r)
{
    CsvTable t{{"check", "value", "ok"}, {}};
    t.rows.push_back({"growth", format_number(r.growth_ratio), flag(r.cond_growth_ok)});
    t.rows.push_back({"bounded", format_number(r.sup_value), flag(r.cond_bounded_ok)});
    t.rows.push_back({"monotone", kInfFlag, flag(r.cond_monotone_ok)});
    t.rows.push_back({"normalization", format_number(r.normalization_value), flag(r.normalized_ok)});
    return t;
}

CsvTable cross_check_table(const std::vector<CrossCheckRow>& rows)
{
    CsvTable t{{"delta", "pair", "pair_tail", "polar", "polar_tail", "difference", "allowance", "agree"},
               {}};
    for (const auto& r : rows) {
        t.rows.push_back({format_number(r.delta), format_number(r.pair.value),
                          format_number(r.pair.tail_bound), format_number(r.polar.value),
                          format_number(r.polar.tail_bound), format_number(r.difference),
                          format_number(r.allowance), flag(r.agree)});
    }
    return t;
}

nlohmann::json json_number(double v)
{
    if (!std::isfinite(v)) {
        return kInfFlag;
    }
    return v;
}

nlohmann::json to_json(const SweepReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"delta", r.delta},
                        {"value", json_number(r.value)},
                        {"tail_bound", json_number(r.tail_bound)},
                        {"energy", json_number(r.energy)},
                        {"ratio", json_number(r.ratio)}});
    }
    return {{"kernel", report.kernel},
            {"function", report.function},
            {"p", report.p},
            {"grid_n", report.grid_n},
            {"scheme", scheme_name(report.scheme)},
            {"empirical_bound_ratio", json_number(report.empirical_bound_ratio)},
            {"rows", rows}};
}

nlohmann::json to_json(const DivergenceTable& table)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"n", r.n}, {"value", json_number(r.value)}, {"ratio", json_number(r.ratio)}});
    }
    return {{"p", table.p},
            {"delta", table.delta},
            {"threshold", table.threshold},
            {"diverging", table.diverging},
            {"certified", table.certified},
            {"rows", rows}};
}

nlohmann::json to_json(const KappaReport& report)
{
    return {{"kappa_hat", json_number(report.kappa_hat)},
            {"objective", json_number(report.objective)},
            {"baseline", json_number(report.baseline)},
            {"proximity", json_number(report.proximity)},
            {"epsilon", json_number(report.epsilon)},
            {"best_restart", report.best_restart},
            {"accepted_moves", report.accepted_moves},
            {"seed", report.seed},
            {"in_range", report.in_range},
            {"trace_length", report.trace.size()}};
}

nlohmann::json to_json(const KernelValidationReport& r)
{
    return {{"cond_growth_ok", r.cond_growth_ok},
            {"growth_ratio", json_number(r.growth_ratio)},
            {"growth_constant", json_number(r.growth_constant)},
            {"cond_bounded_ok", r.cond_bounded_ok},
            {"sup_value", json_number(r.sup_value)},
            {"cond_monotone_ok", r.cond_monotone_ok},
            {"normalization_value", json_number(r.normalization_value)},
            {"normalized_ok", r.normalized_ok},
            {"all_ok", r.all_ok()}};
}

nlohmann::json to_json(const EvalResult& r)
{
    return {{"value", json_number(r.value)},
            {"tail_bound", json_number(r.tail_bound)},
            {"scheme", scheme_name(r.scheme)},
            {"diverging", r.diverging},
            {"doubling_ratio", json_number(r.doubling_ratio)},
            {"certified", r.certified}};
}

nlohmann::json versions_json()
{
    return {{"nlsob", kVersion},
            {"compiler", __VERSION__},
            {"openmp", _OPENMP},
            {"boost", BOOST_LIB_VERSION},
            {"cli11", CLI11_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParameterError("cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw ParameterError("failed writing '" + path + "'");
    }
}

} // namespace nlsob
