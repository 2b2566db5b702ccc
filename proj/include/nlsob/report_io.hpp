#pragma once

// CSV and JSON serialisation of experiment reports. Numbers are written with
// 17 significant digits; non-finite or undefined values become `inf-flag`.

#include "nlsob/experiments.hpp"
#include "nlsob/gamma_limit.hpp"
#include "nlsob/kernels.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nlsob {

inline constexpr const char* kInfFlag = "inf-flag";
inline constexpr const char* kVersion = "0.1.0";

std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<double> values);
    std::string render() const;
};

CsvTable sweep_table(const SweepReport& report);
CsvTable divergence_table(const DivergenceTable& table);
CsvTable kappa_trace_table(const KappaReport& report);
CsvTable validation_table(const KernelValidationReport& report);

struct CrossCheckRow {
    double delta = 0.0;
    EvalResult pair;
    EvalResult polar;
    double difference = 0.0;
    double allowance = 0.0;
    bool agree = false;
};
CsvTable cross_check_table(const std::vector<CrossCheckRow>& rows);

/// A finite number, or the string "inf-flag".
nlohmann::json json_number(double v);
nlohmann::json to_json(const SweepReport& report);
nlohmann::json to_json(const DivergenceTable& table);
nlohmann::json to_json(const KappaReport& report);
nlohmann::json to_json(const KernelValidationReport& report);
nlohmann::json to_json(const EvalResult& result);
nlohmann::json versions_json();

void write_file(const std::string& path, const std::string& content);

} // namespace nlsob
