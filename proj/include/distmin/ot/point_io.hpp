#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace distmin::ot {

// n points of dimension dim, row-major.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;

  PointCloud() = default;
  PointCloud(std::size_t d, std::vector<double> c);

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  const double* point(std::size_t i) const { return coords.data() + i * dim; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// CSV: one point per line, comma-separated coordinates, '#' comments.
PointCloud read_points_csv(std::istream& in);
void write_points_csv(std::ostream& out, const PointCloud& points);

// Binary: "DPTS", u32 version, u64 count, u64 dim, little-endian doubles.
inline constexpr char kPointsMagic[4] = {'D', 'P', 'T', 'S'};
inline constexpr std::uint32_t kPointsFormatVersion = 1;

PointCloud read_points_binary(std::istream& in);
void write_points_binary(std::ostream& out, const PointCloud& points);

// Binary when the file starts with the magic, CSV otherwise.
PointCloud read_points(const std::filesystem::path& path);
// Binary when the extension is ".dpts", CSV otherwise.
void write_points(const std::filesystem::path& path, const PointCloud& points);

}  // namespace distmin::ot
