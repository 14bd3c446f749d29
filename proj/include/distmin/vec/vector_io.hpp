#pragma once

#include <filesystem>
#include <iosfwd>

#include "distmin/vec/dist_vector.hpp"

namespace distmin::vec {

// Binary block dump:
//   "DVEC" | u32 version | u32 scalar width | u64 e | u64 eb | u64 m
// followed by blocks in index order, each m x len row-major, little-endian.
// Dumps written with a different scalar width are converted on load.
inline constexpr char kVectorMagic[4] = {'D', 'V', 'E', 'C'};
inline constexpr std::uint32_t kVectorFormatVersion = 1;

void write_vector(std::ostream& out, const DistVector& v);
DistVector read_vector(std::istream& in);

void save_vector(const std::filesystem::path& path, const DistVector& v);
DistVector load_vector(const std::filesystem::path& path);

}  // namespace distmin::vec
