#include "distmin/experiment/report.hpp"

#include <fstream>

#include "distmin/error.hpp"
#include "distmin/opt/iteration_log.hpp"

namespace distmin::experiment {

using nlohmann::json;
using Kind = opt::ConvergenceReason::Kind;

bool operator==(const RunReport& a, const RunReport& b) {
  return a.config == b.config && a.records == b.records && a.reason.kind == b.reason.kind &&
         a.reason.tolerance == b.reason.tolerance && a.reason.detail == b.reason.detail && a.seconds == b.seconds &&
         a.metrics == b.metrics;
}

std::string reason_name(Kind kind) {
  switch (kind) {
    case Kind::MaxIterations: return "maxIterations";
    case Kind::GradNormBelow: return "gradNormBelow";
    case Kind::RelativeImprovementBelow: return "relativeImprovementBelow";
    case Kind::LineSearchFailed: return "lineSearchFailed";
  }
  return "?";
}

Kind parse_reason_name(const std::string& name) {
  for (auto k : {Kind::MaxIterations, Kind::GradNormBelow, Kind::RelativeImprovementBelow, Kind::LineSearchFailed}) {
    if (reason_name(k) == name) return k;
  }
  throw FormatError("unknown convergence reason '" + name + "'");
}

json summary_json(const RunReport& r) {
  return json{{"final_loss", r.final_loss()},
              {"grad_norm", r.final_grad_norm()},
              {"iterations", r.iterations()},
              {"reason", reason_name(r.reason.kind)},
              {"reason_tolerance", r.reason.tolerance},
              {"reason_detail", r.reason.detail},
              {"seconds", r.seconds},
              {"metrics", r.metrics},
              {"config", r.config}};
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / kReportCsv, std::ios::trunc);
    out << opt::kIterationLogHeader << '\n';
    for (const auto& r : report.records) out << opt::format_iteration_record(r) << '\n';
    if (!out) throw FormatError("cannot write " + (dir / kReportCsv).string());
  }
  std::ofstream out(dir / kSummaryJson, std::ios::trunc);
  out << summary_json(report).dump(2) << '\n';
  if (!out) throw FormatError("cannot write " + (dir / kSummaryJson).string());
}

RunReport read_report(const std::filesystem::path& dir) {
  RunReport r;
  {
    std::ifstream in(dir / kReportCsv);
    if (!in) throw FormatError("cannot open " + (dir / kReportCsv).string());
    std::string line;
    if (!std::getline(in, line) || line != opt::kIterationLogHeader) {
      throw FormatError((dir / kReportCsv).string() + ": missing header");
    }
    while (std::getline(in, line)) {
      if (!line.empty()) r.records.push_back(opt::parse_iteration_record(line));
    }
  }
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    if (r.records[i].iter <= r.records[i - 1].iter) throw FormatError("report iterations are not increasing");
  }
  std::ifstream in(dir / kSummaryJson);
  if (!in) throw FormatError("cannot open " + (dir / kSummaryJson).string());
  try {
    const json j = json::parse(in);
    r.reason.kind = parse_reason_name(j.at("reason").get<std::string>());
    r.reason.tolerance = j.at("reason_tolerance").get<Scalar>();
    r.reason.detail = j.at("reason_detail").get<std::string>();
    r.seconds = j.at("seconds").get<double>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.config = j.at("config");
    if (j.at("iterations").get<std::size_t>() != r.iterations()) {
      throw FormatError("summary and report disagree on the iteration count");
    }
  } catch (const json::exception& e) {
    throw FormatError((dir / kSummaryJson).string() + ": " + e.what());
  }
  return r;
}

}  // namespace distmin::experiment
