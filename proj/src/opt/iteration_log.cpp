#include "distmin/opt/iteration_log.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "distmin/error.hpp"

namespace distmin::opt {

std::string format_iteration_record(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%zu,%.17g", r.iter, static_cast<double>(r.value),
                static_cast<double>(r.grad_norm), static_cast<double>(r.rel_improvement), r.batch_index, r.seconds);
  return buf;
}

IterationRecord parse_iteration_record(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  if (fields.size() != 6) throw FormatError("iteration record needs 6 fields: '" + line + "'");
  auto num = [&](std::size_t i) {
    char* end = nullptr;
    const double v = std::strtod(fields[i].c_str(), &end);
    if (fields[i].empty() || *end != '\0') throw FormatError("bad number '" + fields[i] + "' in iteration record");
    return v;
  };
  auto count = [&](std::size_t i) {
    char* end = nullptr;
    const auto v = std::strtoull(fields[i].c_str(), &end, 10);
    if (fields[i].empty() || *end != '\0') throw FormatError("bad count '" + fields[i] + "' in iteration record");
    return static_cast<std::size_t>(v);
  };
  return {count(0), static_cast<Scalar>(num(1)), static_cast<Scalar>(num(2)), static_cast<Scalar>(num(3)), count(4),
          num(5)};
}

IterationLog::IterationLog(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw FormatError("cannot open iteration log " + path.string());
  if (fresh) out_ << kIterationLogHeader << '\n';
}

void IterationLog::append(const IterationRecord& r) {
  out_ << format_iteration_record(r) << '\n';
  out_.flush();
}

}  // namespace distmin::opt
