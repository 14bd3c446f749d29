#include "distmin/model/grid.hpp"

#include <algorithm>
#include <string>

#include "distmin/error.hpp"

namespace distmin::model {

using exec::CellKey;

ComputationalGrid::ComputationalGrid(const ExampleBatch& batch, const vec::VectorLayout& layout)
    : layout_(layout), data_partitions_(batch.num_partitions()) {
  layout_.validate();
  if (batch.max_feature_index() >= static_cast<std::int64_t>(layout_.length)) {
    throw IndexOutOfRange("feature index " + std::to_string(batch.max_feature_index()) +
                          " outside model dimension " + std::to_string(layout_.length));
  }
  const std::size_t eb = layout_.block_size;
  const std::size_t m_f = layout_.num_blocks();
  auto grid_part = std::make_shared<exec::GridPartitioner>(data_partitions_, m_f);
  using ExPart = ExampleBatch::Examples::Partition;

  cells_ = exec::flat_map_to(
      batch.examples(),
      [&](std::size_t j, const ExPart& part) {
        std::vector<std::pair<CellKey, GridCell>> out;
        std::vector<std::ptrdiff_t> slot(m_f, -1);
        for (const auto& [id, e] : part) {
          std::size_t k = 0;
          while (k < e.features.size()) {
            const std::size_t i = static_cast<std::size_t>(e.features[k].index) / eb;
            if (slot[i] < 0) {
              slot[i] = static_cast<std::ptrdiff_t>(out.size());
              out.emplace_back(CellKey{static_cast<std::int64_t>(j), static_cast<std::int64_t>(i)}, GridCell{});
            }
            GridCell& cell = out[static_cast<std::size_t>(slot[i])].second;
            FeatureSlice slice{id, static_cast<std::uint32_t>(cell.columns.size()), 0};
            const std::size_t begin = i * eb;
            for (; k < e.features.size() && static_cast<std::size_t>(e.features[k].index) / eb == i; ++k) {
              cell.columns.push_back(static_cast<std::uint32_t>(static_cast<std::size_t>(e.features[k].index) - begin));
              cell.values.push_back(e.features[k].value);
            }
            slice.end = static_cast<std::uint32_t>(cell.columns.size());
            cell.slices.push_back(slice);
          }
        }
        return out;
      },
      exec::PartitionerPtr<CellKey>(grid_part));

  routes_ = exec::map_values(batch.examples(), [eb](std::int64_t, const Example& e) {
    ExampleRoute r{e.weight, e.label, e.link, {}};
    for (const auto& f : e.features) {
      const auto i = static_cast<std::uint32_t>(static_cast<std::size_t>(f.index) / eb);
      if (r.blocks.empty() || r.blocks.back() != i) r.blocks.push_back(i);
    }
    return r;
  });

  rows_for_block_.assign(m_f, {});
  for (std::size_t p = 0; p < cells_.num_partitions(); ++p) {
    for (const auto& [key, cell] : cells_.partition(p)) {
      rows_for_block_[static_cast<std::size_t>(key.col)].push_back(static_cast<std::size_t>(key.row));
      ++num_cells_;
    }
  }
  for (auto& rows : rows_for_block_) std::sort(rows.begin(), rows.end());

  total_weight_ = exec::tree_aggregate(
      routes_, Scalar{0}, [](Scalar acc, const Routes::Element& e) { return acc + e.second.weight; },
      [](Scalar a, Scalar b) { return a + b; });
}

bool ComputationalGrid::has_cell(std::size_t j, std::size_t i) const {
  const auto& rows = rows_for_block_.at(i);
  return std::binary_search(rows.begin(), rows.end(), j);
}

ModelCells ComputationalGrid::broadcast(const vec::DistVector& x) const {
  if (!(x.layout() == layout_)) {
    throw MetadataMismatch("model layout " + x.layout().describe() + " does not match grid layout " +
                           layout_.describe());
  }
  using Part = vec::DistVector::Blocks::Partition;
  return exec::flat_map_to(
      x.blocks(),
      [&](std::size_t, const Part& part) {
        std::vector<std::pair<CellKey, vec::Block>> out;
        for (const auto& [i, block] : part) {
          for (std::size_t j : rows_for_block_[static_cast<std::size_t>(i)]) {
            out.emplace_back(CellKey{static_cast<std::int64_t>(j), i}, block);
          }
        }
        return out;
      },
      cell_partitioner());
}

}  // namespace distmin::model
