#include "distmin/ot/point_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "distmin/binary_io.hpp"
#include "distmin/error.hpp"

namespace distmin::ot {

PointCloud::PointCloud(std::size_t d, std::vector<double> c) : dim(d), coords(std::move(c)) {
  if (dim == 0 || coords.size() % dim != 0) {
    throw InvalidArgument("point coordinates (" + std::to_string(coords.size()) + ") are not a multiple of dimension " +
                          std::to_string(dim));
  }
}

PointCloud read_points_csv(std::istream& in) {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s(line);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    if (s.empty() || s.front() == '#') continue;
    std::size_t count = 0;
    while (true) {
      const std::size_t comma = s.find(',');
      std::string_view field = s.substr(0, comma);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": bad coordinate '" + std::string(field) + "'");
      }
      coords.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    if (dim == 0) dim = count;
    if (count != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " coordinates, got " +
                        std::to_string(count));
    }
  }
  if (dim == 0) throw FormatError("no points");
  return PointCloud(dim, std::move(coords));
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  char buf[32];
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t d = 0; d < points.dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", points.point(i)[d]);
      if (d > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw FormatError("failed writing points");
}

PointCloud read_points_binary(std::istream& in) {
  binary::expect_magic(in, kPointsMagic, "point file");
  const auto version = binary::read<std::uint32_t>(in, "version");
  if (version != kPointsFormatVersion) throw FormatError("unsupported point file version " + std::to_string(version));
  const auto n = binary::read<std::uint64_t>(in, "count");
  const auto dim = binary::read<std::uint64_t>(in, "dimension");
  if (dim == 0) throw FormatError("point dimension must be positive");
  std::vector<double> coords(n * dim);
  for (auto& c : coords) c = binary::read<double>(in, "coordinate");
  return PointCloud(dim, std::move(coords));
}

void write_points_binary(std::ostream& out, const PointCloud& points) {
  out.write(kPointsMagic, 4);
  binary::write<std::uint32_t>(out, kPointsFormatVersion);
  binary::write<std::uint64_t>(out, points.size());
  binary::write<std::uint64_t>(out, points.dim);
  for (double c : points.coords) binary::write<double>(out, c);
  if (!out) throw FormatError("failed writing points");
}

PointCloud read_points(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char head[4] = {};
  in.read(head, 4);
  const bool binary_file = in.gcount() == 4 && std::equal(head, head + 4, kPointsMagic);
  in.clear();
  in.seekg(0);
  try {
    return binary_file ? read_points_binary(in) : read_points_csv(in);
  } catch (const FormatError& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

void write_points(const std::filesystem::path& path, const PointCloud& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  if (path.extension() == ".dpts") {
    write_points_binary(out, points);
  } else {
    write_points_csv(out, points);
  }
}

}  // namespace distmin::ot
