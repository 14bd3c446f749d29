#include "distmin/ot/ot_loss.hpp"

#include <cmath>

#include "distmin/error.hpp"

namespace distmin::ot {

using exec::CellKey;

void OtConfig::validate() const {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  if (!(exponent_cap > 0)) throw InvalidArgument("exponent cap must be positive");
}

namespace {

struct PotentialPiece {
  bool is_v = false;
  vec::Block block;
};

// Row (u-block) or column (v-block) sums of d/da of the capped exponential,
// plus the cell's exponential total and saturation count on u pieces.
struct SumPiece {
  vec::Block sums;
  double exp_sum = 0;
  std::uint64_t saturated = 0;
};

using SumCollection = exec::PartitionedCollection<std::int64_t, SumPiece>;

SumCollection cell_sums(const vec::DistVector& p, const CostGrid& grid, const OtConfig& cfg) {
  cfg.validate();
  const OtLayout& layout = grid.layout();
  if (!(p.layout() == layout.vector_layout())) {
    throw DimensionMismatch("potentials " + p.layout().describe() + " do not match the cost grid " +
                            layout.vector_layout().describe());
  }
  const std::size_t p_u = layout.p_u();
  const std::size_t p_v = layout.p_v();
  using BlockPart = vec::DistVector::Blocks::Partition;
  auto pieces = exec::flat_map_to(
      p.blocks(),
      [&](std::size_t, const BlockPart& part) {
        std::vector<std::pair<CellKey, PotentialPiece>> out;
        for (const auto& [k, block] : part) {
          const auto idx = static_cast<std::size_t>(k);
          if (idx < p_u) {
            for (std::size_t b = 0; b < p_v; ++b) {
              out.emplace_back(CellKey{k, static_cast<std::int64_t>(b)}, PotentialPiece{false, block});
            }
          } else {
            for (std::size_t a = 0; a < p_u; ++a) {
              out.emplace_back(CellKey{static_cast<std::int64_t>(a), static_cast<std::int64_t>(idx - p_u)},
                               PotentialPiece{true, block});
            }
          }
        }
        return out;
      },
      exec::PartitionerPtr<CellKey>(grid.partitioner()));

  const Scalar inv_eps = 1 / cfg.epsilon;
  const double cap = cfg.exponent_cap;
  const double exp_cap = std::exp(cap);
  using CostPart = CostCells::Partition;
  using PiecePart = decltype(pieces)::Partition;
  auto partial = exec::zip_flat_map_to(
      grid.cells(), pieces,
      [&](std::size_t, const CostPart& costs, const PiecePart& pots) {
        std::vector<std::pair<std::int64_t, SumPiece>> out;
        for (const auto& [key, c] : costs) {
          const vec::Block* u = nullptr;
          const vec::Block* v = nullptr;
          for (const auto& [pk, piece] : pots) {
            if (pk == key) (piece.is_v ? v : u) = &piece.block;
          }
          if (!u || !v) throw DimensionMismatch("cost cell without both potential blocks");
          SumPiece rows{vec::Block(1, c.rows), 0, 0};
          SumPiece cols{vec::Block(1, c.cols), 0, 0};
          for (std::size_t i = 0; i < c.rows; ++i) {
            const Scalar ui = u->values[i];
            double row = 0;
            for (std::size_t j = 0; j < c.cols; ++j) {
              const double a = (ui + v->values[j] - c(i, j)) * inv_eps;
              double e;
              double d;
              if (a > cap) {
                e = exp_cap * (1 + a - cap);
                d = exp_cap;
                ++rows.saturated;
              } else {
                e = d = std::exp(a);
              }
              rows.exp_sum += e;
              row += d;
              cols.sums.values[j] += static_cast<Scalar>(d);
            }
            rows.sums.values[i] = static_cast<Scalar>(row);
          }
          out.emplace_back(key.row, std::move(rows));
          out.emplace_back(static_cast<std::int64_t>(p_u) + key.col, std::move(cols));
        }
        return out;
      },
      exec::PartitionerPtr<std::int64_t>(vec::DistVector::partitioner_for(p.layout())));
  return exec::reduce_by_key(partial, [](SumPiece a, const SumPiece& b) {
    for (std::size_t k = 0; k < a.sums.values.size(); ++k) a.sums.values[k] += b.sums.values[k];
    a.exp_sum += b.exp_sum;
    a.saturated += b.saturated;
    return a;
  });
}

}  // namespace

OtEvaluation ot_evaluate(const vec::DistVector& potentials, const CostGrid& grid, const OtConfig& cfg,
                         bool with_grad) {
  const SumCollection sums = cell_sums(potentials, grid, cfg);
  const OtLayout& layout = grid.layout();
  const auto p_u = static_cast<std::int64_t>(layout.p_u());
  const double inv_nx = 1.0 / static_cast<double>(layout.n_x);
  const double inv_ny = 1.0 / static_cast<double>(layout.n_y);
  const double inv_nn = inv_nx * inv_ny;

  struct Totals {
    double linear = 0;
    double exp_sum = 0;
    std::uint64_t saturated = 0;
  };
  using BlockPart = vec::DistVector::Blocks::Partition;
  using SumPart = SumCollection::Partition;
  const auto joined = exec::join(potentials.blocks(), sums);
  const Totals t = exec::tree_aggregate(
      joined, Totals{},
      [&](Totals acc, const decltype(joined)::Element& e) {
        const auto& [block, piece] = e.second;
        double s = 0;
        for (Scalar x : block.values) s += x;
        acc.linear += s * (e.first < p_u ? inv_nx : inv_ny);
        acc.exp_sum += piece.exp_sum;
        acc.saturated += piece.saturated;
        return acc;
      },
      [](Totals a, const Totals& b) {
        a.linear += b.linear;
        a.exp_sum += b.exp_sum;
        a.saturated += b.saturated;
        return a;
      });

  OtEvaluation out;
  out.value = static_cast<Scalar>(-(t.linear - cfg.epsilon * inv_nn * t.exp_sum));
  out.saturated = t.saturated;
  if (!with_grad) return out;
  auto grad_blocks = exec::zip_partitions(
      potentials.blocks(), sums, [&](std::size_t, const BlockPart& blocks, const SumPart& parts) {
        BlockPart res;
        for (std::size_t n = 0; n < blocks.size(); ++n) {
          const auto& [k, block] = blocks[n];
          const SumPiece& piece = parts.at(n).second;
          if (parts[n].first != k) throw DimensionMismatch("potential and sum blocks out of step");
          const double mean = k < p_u ? inv_nx : inv_ny;
          vec::Block g(1, block.cols);
          for (std::size_t j = 0; j < block.cols; ++j) {
            g.values[j] = static_cast<Scalar>(-(mean - inv_nn * piece.sums.values[j]));
          }
          res.emplace_back(k, std::move(g));
        }
        return res;
      });
  out.grad = vec::DistVector(potentials.layout(), std::move(grad_blocks));
  return out;
}

Marginals plan_marginals(const vec::DistVector& potentials, const CostGrid& grid, const OtConfig& cfg) {
  const SumCollection sums = cell_sums(potentials, grid, cfg);
  const OtLayout& layout = grid.layout();
  const double inv_nn = 1.0 / (static_cast<double>(layout.n_x) * static_cast<double>(layout.n_y));
  Marginals m;
  m.rows.resize(layout.n_x);
  m.cols.resize(layout.n_y);
  const std::size_t eb = layout.block_size;
  for (const auto& [k, piece] : sums.collect()) {
    const auto idx = static_cast<std::size_t>(k);
    const bool is_u = idx < layout.p_u();
    auto& target = is_u ? m.rows : m.cols;
    const std::size_t base = (is_u ? idx : idx - layout.p_u()) * eb;
    for (std::size_t j = 0; j < piece.sums.values.size(); ++j) target[base + j] = piece.sums.values[j] * inv_nn;
  }
  return m;
}

OtObjective::OtObjective(CostGrid grid, OtConfig cfg) : grid_(std::move(grid)), cfg_(cfg) { cfg_.validate(); }

opt::Evaluation OtObjective::compute(const vec::DistVector& x) {
  auto r = ot_evaluate(x, grid_, cfg_, true);
  saturated_ += r.saturated;
  ++evaluations_;
  return {r.value, std::move(r.grad)};
}

Scalar OtObjective::compute_value(const vec::DistVector& x) {
  auto r = ot_evaluate(x, grid_, cfg_, false);
  saturated_ += r.saturated;
  ++evaluations_;
  return r.value;
}

}  // namespace distmin::ot
