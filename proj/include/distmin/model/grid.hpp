#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "distmin/exec/collection.hpp"
#include "distmin/model/example.hpp"
#include "distmin/vec/dist_vector.hpp"

namespace distmin::model {

// Features of one example that fall in one model block: entries
// [begin, end) of the owning cell's columns/values.
struct FeatureSlice {
  std::int64_t example = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

// Cell (j, i): slices F_i(e) for the examples e in D_j that have features
// in block i. Columns are offsets inside the block.
struct GridCell {
  std::vector<FeatureSlice> slices;
  std::vector<std::uint32_t> columns;
  std::vector<Scalar> values;
};

// Per-example data needed after scoring: everything except the features,
// plus the blocks i with F_i(e) non-empty.
struct ExampleRoute {
  Scalar weight = 1;
  Label label;
  std::optional<std::int64_t> link;
  std::vector<std::uint32_t> blocks;
};

using Cells = exec::PartitionedCollection<exec::CellKey, GridCell>;
using Routes = exec::PartitionedCollection<std::int64_t, ExampleRoute>;
using ModelCells = exec::PartitionedCollection<exec::CellKey, vec::Block>;

// Examples split across data partitions x model blocks. Only cells holding
// at least one feature exist. Built once per batch and model layout.
class ComputationalGrid {
 public:
  ComputationalGrid(const ExampleBatch& batch, const vec::VectorLayout& layout);

  const Cells& cells() const { return cells_; }
  const Routes& routes() const { return routes_; }
  const vec::VectorLayout& layout() const { return layout_; }
  std::size_t data_partitions() const { return data_partitions_; }
  std::size_t feature_blocks() const { return layout_.num_blocks(); }
  std::size_t num_cells() const { return num_cells_; }
  bool has_cell(std::size_t j, std::size_t i) const;
  Scalar total_weight() const { return total_weight_; }
  std::size_t num_examples() const { return routes_.count(); }

  const exec::PartitionerPtr<exec::CellKey>& cell_partitioner() const { return cells_.partitioner_ptr(); }
  const exec::PartitionerPtr<std::int64_t>& example_partitioner() const { return routes_.partitioner_ptr(); }

  // Copies block i of x into every existing cell (j, i).
  ModelCells broadcast(const vec::DistVector& x) const;

 private:
  vec::VectorLayout layout_;
  std::size_t data_partitions_ = 0;
  Cells cells_;
  Routes routes_;
  std::vector<std::vector<std::size_t>> rows_for_block_;
  std::size_t num_cells_ = 0;
  Scalar total_weight_ = 0;
};

}  // namespace distmin::model
