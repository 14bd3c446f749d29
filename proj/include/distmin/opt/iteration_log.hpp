#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "distmin/opt/minimizer.hpp"

namespace distmin::opt {

inline constexpr const char* kIterationLogHeader = "iter,value,grad_norm,rel_improvement,batch_index,seconds";

// One CSV row per record, values printed with round-trip precision.
std::string format_iteration_record(const IterationRecord& r);
// Inverse of format_iteration_record; throws FormatError.
IterationRecord parse_iteration_record(const std::string& line);

// Appends records to a CSV file, writing the header when the file is new
// or empty.
class IterationLog {
 public:
  explicit IterationLog(const std::filesystem::path& path);

  void append(const IterationRecord& r);
  IterationObserver observer() {
    return [this](const IterationRecord& r) { append(r); };
  }

 private:
  std::ofstream out_;
};

}  // namespace distmin::opt
