#pragma once

#include <filesystem>
#include <functional>

#include "distmin/exec/collection.hpp"
#include "distmin/ot/point_io.hpp"
#include "distmin/vec/dist_vector.hpp"

namespace distmin::ot {

// Potentials (u, v) stored in one vector of length n_x + n_y with blocks of
// block_size; block_size must divide n_x so that u and v never share a
// block. u-blocks are 0 .. p_u - 1, v-blocks p_u .. p_u + p_v - 1.
struct OtLayout {
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::size_t block_size = 1;

  void validate() const;
  std::size_t p_u() const { return n_x / block_size; }
  std::size_t p_v() const { return (n_y + block_size - 1) / block_size; }
  std::size_t v_length(std::size_t b) const {
    return (b + 1) * block_size <= n_y ? block_size : n_y - b * block_size;
  }
  vec::VectorLayout vector_layout() const { return {n_x + n_y, block_size, 1}; }
  friend bool operator==(const OtLayout&, const OtLayout&) = default;
};

// Cell (a, b) holds c_ij for i in u-block a and j in v-block b.
using CostCells = exec::PartitionedCollection<exec::CellKey, vec::Block>;

using CostFn = std::function<double(const double* x, const double* y, std::size_t dim)>;

double squared_euclidean(const double* x, const double* y, std::size_t dim);

class CostGrid {
 public:
  CostGrid() = default;
  CostGrid(OtLayout layout, CostCells cells);

  const OtLayout& layout() const { return layout_; }
  const CostCells& cells() const { return cells_; }
  std::shared_ptr<const exec::GridPartitioner> partitioner() const { return partitioner_; }

  // Dense n_x x n_y matrix, row-major.
  std::vector<double> to_dense() const;

 private:
  OtLayout layout_;
  CostCells cells_;
  std::shared_ptr<const exec::GridPartitioner> partitioner_;
};

CostGrid build_cost_grid(const PointCloud& source, const PointCloud& target, std::size_t block_size,
                         const CostFn& cost = squared_euclidean);

// Cell-indexed binary files under `dir` plus a header tying them to the
// inputs. Loading fails with FormatError on any mismatch or corruption.
void save_cost_grid(const CostGrid& grid, const std::filesystem::path& dir, std::uint64_t fingerprint);
CostGrid load_cost_grid(const std::filesystem::path& dir, const OtLayout& layout, std::uint64_t fingerprint);

// FNV-1a over both point sets; identifies a cached grid.
std::uint64_t points_fingerprint(const PointCloud& source, const PointCloud& target);

// Reuses a cache under `dir` when it matches, otherwise builds and stores
// one. The default cost only; custom costs are never cached.
CostGrid cached_cost_grid(const PointCloud& source, const PointCloud& target, std::size_t block_size,
                          const std::filesystem::path& dir);

}  // namespace distmin::ot
