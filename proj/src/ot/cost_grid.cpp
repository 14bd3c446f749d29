#include "distmin/ot/cost_grid.hpp"

#include <cstring>
#include <fstream>

#include "distmin/binary_io.hpp"
#include "distmin/error.hpp"

namespace distmin::ot {

using exec::CellKey;

void OtLayout::validate() const {
  if (n_x == 0 || n_y == 0) throw InvalidArgument("both point sets must be non-empty");
  if (block_size == 0 || n_x % block_size != 0) {
    throw InvalidArgument("block size " + std::to_string(block_size) + " must divide n_x = " + std::to_string(n_x));
  }
}

double squared_euclidean(const double* x, const double* y, std::size_t dim) {
  double s = 0;
  for (std::size_t d = 0; d < dim; ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
  return s;
}

CostGrid::CostGrid(OtLayout layout, CostCells cells) : layout_(layout), cells_(std::move(cells)) {
  layout_.validate();
  partitioner_ = std::make_shared<exec::GridPartitioner>(layout_.p_u(), layout_.p_v());
  if (cells_.count() != layout_.p_u() * layout_.p_v() || !cells_.partitioner().same_as(*partitioner_)) {
    throw DimensionMismatch("cost cells do not tile a " + std::to_string(layout_.p_u()) + "x" +
                            std::to_string(layout_.p_v()) + " grid");
  }
  for (std::size_t p = 0; p < cells_.num_partitions(); ++p) {
    for (const auto& [key, block] : cells_.partition(p)) {
      const auto b = static_cast<std::size_t>(key.col);
      if (block.rows != layout_.block_size || block.cols != layout_.v_length(b)) {
        throw DimensionMismatch("cost cell has the wrong shape");
      }
    }
  }
}

std::vector<double> CostGrid::to_dense() const {
  std::vector<double> out(layout_.n_x * layout_.n_y);
  const std::size_t eb = layout_.block_size;
  for (std::size_t p = 0; p < cells_.num_partitions(); ++p) {
    for (const auto& [key, block] : cells_.partition(p)) {
      for (std::size_t i = 0; i < block.rows; ++i) {
        for (std::size_t j = 0; j < block.cols; ++j) {
          out[(static_cast<std::size_t>(key.row) * eb + i) * layout_.n_y + static_cast<std::size_t>(key.col) * eb + j] =
              block(i, j);
        }
      }
    }
  }
  return out;
}

CostGrid build_cost_grid(const PointCloud& source, const PointCloud& target, std::size_t block_size,
                         const CostFn& cost) {
  if (source.dim != target.dim) {
    throw DimensionMismatch("source points have dimension " + std::to_string(source.dim) + ", target points " +
                            std::to_string(target.dim));
  }
  const OtLayout layout{source.size(), target.size(), block_size};
  layout.validate();
  auto part = std::make_shared<exec::GridPartitioner>(layout.p_u(), layout.p_v());
  std::vector<CostCells::Partition> parts(layout.p_u() * layout.p_v());
  exec::Engine::global().parallel_for(parts.size(), [&](std::size_t p) {
    const std::size_t a = p / layout.p_v();
    const std::size_t b = p % layout.p_v();
    vec::Block block(block_size, layout.v_length(b));
    for (std::size_t i = 0; i < block.rows; ++i) {
      for (std::size_t j = 0; j < block.cols; ++j) {
        block(i, j) = static_cast<Scalar>(
            cost(source.point(a * block_size + i), target.point(b * block_size + j), source.dim));
      }
    }
    const CellKey key{static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)};
    parts[part->partition(key)].emplace_back(key, std::move(block));
  });
  return CostGrid(layout, CostCells(CostCells::Trusted{}, std::move(parts), part, 0));
}

namespace {

constexpr char kHeaderMagic[4] = {'D', 'C', 'G', 'R'};
constexpr char kCellMagic[4] = {'D', 'C', 'E', 'L'};
constexpr std::uint32_t kCacheVersion = 1;

std::filesystem::path cell_path(const std::filesystem::path& dir, std::size_t a, std::size_t b) {
  return dir / ("cell_" + std::to_string(a) + "_" + std::to_string(b) + ".bin");
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < bytes; ++k) {
    h ^= p[k];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t checksum(const std::vector<Scalar>& values) {
  std::uint64_t h = 1469598103934665603ull;
  for (Scalar v : values) {
    const double d = v;
    h = fnv1a(&d, sizeof d, h);
  }
  return h;
}

}  // namespace

std::uint64_t points_fingerprint(const PointCloud& source, const PointCloud& target) {
  std::uint64_t h = 1469598103934665603ull;
  for (const PointCloud* pc : {&source, &target}) {
    const std::uint64_t shape[2] = {pc->size(), pc->dim};
    h = fnv1a(shape, sizeof shape, h);
    h = fnv1a(pc->coords.data(), pc->coords.size() * sizeof(double), h);
  }
  return h;
}

void save_cost_grid(const CostGrid& grid, const std::filesystem::path& dir, std::uint64_t fingerprint) {
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / "grid.hdr");
  const OtLayout& layout = grid.layout();
  for (std::size_t p = 0; p < grid.cells().num_partitions(); ++p) {
    for (const auto& [key, block] : grid.cells().partition(p)) {
      std::ofstream out(cell_path(dir, static_cast<std::size_t>(key.row), static_cast<std::size_t>(key.col)),
                        std::ios::binary);
      out.write(kCellMagic, 4);
      binary::write<std::uint64_t>(out, static_cast<std::uint64_t>(key.row));
      binary::write<std::uint64_t>(out, static_cast<std::uint64_t>(key.col));
      binary::write<std::uint64_t>(out, block.rows);
      binary::write<std::uint64_t>(out, block.cols);
      for (Scalar v : block.values) binary::write<double>(out, v);
      binary::write<std::uint64_t>(out, checksum(block.values));
      if (!out) throw FormatError("failed writing cost cell");
    }
  }
  std::ofstream out(dir / "grid.hdr", std::ios::binary);
  out.write(kHeaderMagic, 4);
  binary::write<std::uint32_t>(out, kCacheVersion);
  binary::write<std::uint64_t>(out, layout.n_x);
  binary::write<std::uint64_t>(out, layout.n_y);
  binary::write<std::uint64_t>(out, layout.block_size);
  binary::write<std::uint64_t>(out, fingerprint);
  if (!out) throw FormatError("failed writing cost grid header");
}

CostGrid load_cost_grid(const std::filesystem::path& dir, const OtLayout& layout, std::uint64_t fingerprint) {
  layout.validate();
  std::ifstream hdr(dir / "grid.hdr", std::ios::binary);
  if (!hdr) throw FormatError("no cost grid cache in " + dir.string());
  binary::expect_magic(hdr, kHeaderMagic, "cost grid header");
  if (binary::read<std::uint32_t>(hdr, "version") != kCacheVersion) throw FormatError("unsupported cost grid cache");
  const OtLayout stored{binary::read<std::uint64_t>(hdr, "n_x"), binary::read<std::uint64_t>(hdr, "n_y"),
                        binary::read<std::uint64_t>(hdr, "block size")};
  if (!(stored == layout)) throw FormatError("cached cost grid has a different layout");
  if (binary::read<std::uint64_t>(hdr, "fingerprint") != fingerprint) {
    throw FormatError("cached cost grid was built from different points");
  }
  auto part = std::make_shared<exec::GridPartitioner>(layout.p_u(), layout.p_v());
  std::vector<CostCells::Partition> parts(layout.p_u() * layout.p_v());
  for (std::size_t a = 0; a < layout.p_u(); ++a) {
    for (std::size_t b = 0; b < layout.p_v(); ++b) {
      std::ifstream in(cell_path(dir, a, b), std::ios::binary);
      if (!in) throw FormatError("missing cost cell " + std::to_string(a) + "," + std::to_string(b));
      binary::expect_magic(in, kCellMagic, "cost cell");
      const auto ra = binary::read<std::uint64_t>(in, "cell row");
      const auto rb = binary::read<std::uint64_t>(in, "cell column");
      const auto rows = binary::read<std::uint64_t>(in, "rows");
      const auto cols = binary::read<std::uint64_t>(in, "cols");
      if (ra != a || rb != b || rows != layout.block_size || cols != layout.v_length(b)) {
        throw FormatError("cost cell " + std::to_string(a) + "," + std::to_string(b) + " has a bad header");
      }
      vec::Block block(rows, cols);
      for (auto& v : block.values) v = static_cast<Scalar>(binary::read<double>(in, "cost"));
      if (binary::read<std::uint64_t>(in, "checksum") != checksum(block.values)) {
        throw FormatError("cost cell " + std::to_string(a) + "," + std::to_string(b) + " is corrupt");
      }
      const CellKey key{static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)};
      parts[part->partition(key)].emplace_back(key, std::move(block));
    }
  }
  return CostGrid(layout, CostCells(CostCells::Trusted{}, std::move(parts), part, 0));
}

CostGrid cached_cost_grid(const PointCloud& source, const PointCloud& target, std::size_t block_size,
                          const std::filesystem::path& dir) {
  const OtLayout layout{source.size(), target.size(), block_size};
  const std::uint64_t fp = points_fingerprint(source, target);
  try {
    return load_cost_grid(dir, layout, fp);
  } catch (const FormatError&) {
  }
  CostGrid grid = build_cost_grid(source, target, block_size);
  save_cost_grid(grid, dir, fp);
  return grid;
}

}  // namespace distmin::ot
