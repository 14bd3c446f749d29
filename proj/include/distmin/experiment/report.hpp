#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "distmin/opt/minimizer.hpp"

namespace distmin::experiment {

struct RunReport {
  nlohmann::json config;  // spec echo
  std::vector<opt::IterationRecord> records;
  opt::ConvergenceReason reason;
  double seconds = 0;
  std::map<std::string, double> metrics;

  double final_loss() const { return records.empty() ? 0 : records.back().value; }
  double final_grad_norm() const { return records.empty() ? 0 : records.back().grad_norm; }
  std::size_t iterations() const { return records.empty() ? 0 : records.back().iter; }
};

bool operator==(const RunReport& a, const RunReport& b);

std::string reason_name(opt::ConvergenceReason::Kind kind);  // e.g. gradNormBelow
opt::ConvergenceReason::Kind parse_reason_name(const std::string& name);

inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kSummaryJson = "summary.json";

nlohmann::json summary_json(const RunReport& report);

// Writes report.csv (one row per iteration) and summary.json under `dir`.
void emit_report(const RunReport& report, const std::filesystem::path& dir);
RunReport read_report(const std::filesystem::path& dir);

}  // namespace distmin::experiment
