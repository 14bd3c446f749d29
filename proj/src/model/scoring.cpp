#include "distmin/model/scoring.hpp"

#include "distmin/error.hpp"

namespace distmin::model {

using exec::CellKey;

std::string to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "fm"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "fm") return ModelKind::FactorizationMachine;
  throw InvalidArgument("unknown model kind '" + name + "'");
}

namespace {

using Partial = std::vector<Scalar>;

// Per-cell partial sums keyed by example, folded per example, then
// completed with zeros for examples without features.
template <class CellFn, class Finish>
ScoreTable grid_scores(const vec::DistVector& x, const ComputationalGrid& grid, std::size_t width, CellFn cell_fn,
                       Finish finish) {
  const ModelCells model = grid.broadcast(x);
  auto partials = exec::zip_flat_map_to(
      grid.cells(), model,
      [&](std::size_t, const Cells::Partition& cells, const ModelCells::Partition& blocks) {
        std::vector<std::pair<std::int64_t, Partial>> out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const GridCell& cell = cells[c].second;
          const vec::Block& block = blocks[c].second;
          for (const auto& s : cell.slices) {
            Partial p(width, Scalar{0});
            cell_fn(cell, s, block, p);
            out.emplace_back(s.example, std::move(p));
          }
        }
        return out;
      },
      grid.example_partitioner());
  auto summed = exec::reduce_by_key(partials, [](Partial a, const Partial& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    return a;
  });
  return exec::zip_partitions(
      grid.routes(), summed,
      [&](std::size_t, const Routes::Partition& routes, const decltype(summed)::Partition& sums) {
        std::unordered_map<std::int64_t, std::size_t> at;
        at.reserve(sums.size());
        for (std::size_t k = 0; k < sums.size(); ++k) at.emplace(sums[k].first, k);
        const Partial zero(width, Scalar{0});
        std::vector<std::pair<std::int64_t, ScoreEntry>> out;
        out.reserve(routes.size());
        for (const auto& [id, route] : routes) {
          auto it = at.find(id);
          out.emplace_back(id, finish(it == at.end() ? zero : sums[it->second].second));
        }
        return out;
      });
}

}  // namespace

ScoreTable linear_score(const vec::DistVector& x, const ComputationalGrid& grid) {
  const std::size_t rows = x.rows();
  return grid_scores(
      x, grid, rows,
      [rows](const GridCell& cell, const FeatureSlice& s, const vec::Block& block, Partial& p) {
        for (std::size_t r = 0; r < rows; ++r) {
          Scalar acc = 0;
          for (std::uint32_t k = s.begin; k < s.end; ++k) acc += cell.values[k] * block(r, cell.columns[k]);
          p[r] = acc;
        }
      },
      [](const Partial& p) { return ScoreEntry{p, {}}; });
}

ScoreTable fm_score(const vec::DistVector& x, const ComputationalGrid& grid) {
  const std::size_t m = x.rows();
  return grid_scores(
      x, grid, 2 * m,
      [m](const GridCell& cell, const FeatureSlice& s, const vec::Block& block, Partial& p) {
        for (std::size_t r = 0; r < m; ++r) {
          Scalar lin = 0;
          Scalar quad = 0;
          for (std::uint32_t k = s.begin; k < s.end; ++k) {
            const Scalar fx = cell.values[k] * block(r, cell.columns[k]);
            lin += fx;
            quad += fx * fx;
          }
          p[r] = lin;
          p[m + r] = quad;
        }
      },
      [m](const Partial& p) {
        ScoreEntry e{{Scalar{0}}, std::vector<Scalar>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(m))};
        Scalar s = 0;
        for (std::size_t r = 0; r < m; ++r) s += p[r] * p[r] - p[m + r];
        e.scores[0] = s / 2;
        return e;
      });
}

ScoreTable score(ModelKind kind, const vec::DistVector& x, const ComputationalGrid& grid) {
  return kind == ModelKind::Linear ? linear_score(x, grid) : fm_score(x, grid);
}

}  // namespace distmin::model
