#include "distmin/model/loss.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "distmin/error.hpp"

namespace distmin::model {

using exec::CellKey;

void LossSpec::validate() const {
  if (kind == LossKind::Quantile && !(tau > 0 && tau < 1)) {
    throw InvalidArgument("quantile level must lie in (0, 1), got " + std::to_string(tau));
  }
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L2: return "l2";
    case LossKind::Quantile: return "quantile";
    case LossKind::Logistic: return "logistic";
    case LossKind::Softmax: return "softmax";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "l2") return LossKind::L2;
  if (name == "quantile") return LossKind::Quantile;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "softmax") return LossKind::Softmax;
  throw InvalidArgument("unknown loss kind '" + name + "'");
}

std::vector<Scalar> softmax(std::span<const Scalar> scores) {
  std::vector<Scalar> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const Scalar top = *std::max_element(p.begin(), p.end());
  Scalar z = 0;
  for (auto& v : p) z += (v = std::exp(v - top));
  for (auto& v : p) v /= z;
  return p;
}

namespace {

Scalar scalar_target(const Label& label, const char* loss) {
  if (const auto* y = std::get_if<Scalar>(&label)) return *y;
  throw InvalidArgument(std::string(loss) + " loss needs a scalar label");
}

void require_width(std::span<const Scalar> scores, std::size_t n, const char* loss) {
  if (scores.size() != n) {
    throw DimensionMismatch(std::string(loss) + " loss expects " + std::to_string(n) + " score(s), got " +
                            std::to_string(scores.size()));
  }
}

// log(1 + exp(z)) without overflow.
Scalar softplus(Scalar z) { return std::max(z, Scalar{0}) + std::log1p(std::exp(-std::abs(z))); }

Scalar sigmoid(Scalar z) {
  if (z >= 0) return 1 / (1 + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (1 + e);
}

}  // namespace

ExampleLoss example_loss(const LossSpec& spec, std::span<const Scalar> scores, const Label& label) {
  switch (spec.kind) {
    case LossKind::L2: {
      require_width(scores, 1, "l2");
      const Scalar r = scores[0] - scalar_target(label, "l2");
      return {r * r / 2, {r}};
    }
    case LossKind::Quantile: {
      require_width(scores, 1, "quantile");
      const Scalar r = scalar_target(label, "quantile") - scores[0];
      if (r >= 0) return {spec.tau * r, {-spec.tau}};
      return {(spec.tau - 1) * r, {1 - spec.tau}};
    }
    case LossKind::Logistic: {
      require_width(scores, 1, "logistic");
      const Scalar y = scalar_target(label, "logistic");
      if (y != 1 && y != -1) throw InvalidArgument("logistic loss needs labels -1 or +1, got " + std::to_string(y));
      const Scalar m = -y * scores[0];
      return {softplus(m), {-y * sigmoid(m)}};
    }
    case LossKind::Softmax: {
      const auto* targets = std::get_if<std::vector<ClassTarget>>(&label);
      if (!targets) throw InvalidArgument("softmax loss needs a class label");
      const std::size_t m = scores.size();
      const Scalar top = *std::max_element(scores.begin(), scores.end());
      Scalar z = 0;
      for (Scalar s : scores) z += std::exp(s - top);
      const Scalar lse = top + std::log(z);
      ExampleLoss out{0, std::vector<Scalar>(m, Scalar{0})};
      Scalar total = 0;
      for (const auto& t : *targets) {
        if (t.cls < 0 || static_cast<std::size_t>(t.cls) >= m) {
          throw UnknownClass("class " + std::to_string(t.cls) + " outside [0, " + std::to_string(m) + ")");
        }
        out.value += t.weight * (lse - scores[static_cast<std::size_t>(t.cls)]);
        out.grad[static_cast<std::size_t>(t.cls)] -= t.weight;
        total += t.weight;
      }
      for (std::size_t k = 0; k < m; ++k) out.grad[k] += total * std::exp(scores[k] - lse);
      return out;
    }
  }
  throw InvalidArgument("unknown loss kind");
}

vec::DistVector assemble_gradient(const vec::VectorLayout& layout,
                                  exec::PartitionedCollection<std::int64_t, vec::Block> pieces) {
  auto summed = exec::reduce_by_key(
      pieces,
      [](vec::Block a, const vec::Block& b) {
        for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] += b.values[k];
        return a;
      },
      exec::PartitionerPtr<std::int64_t>(vec::DistVector::partitioner_for(layout)));
  using Part = decltype(summed)::Partition;
  auto blocks = exec::map_partitions(summed, [&](std::size_t i, const Part& part) {
    if (!part.empty()) return part;
    return Part{{static_cast<std::int64_t>(i), vec::Block(layout.rows, layout.block_length(i))}};
  });
  return vec::DistVector(layout, std::move(blocks));
}

namespace {

// Signals of the examples in D_j that touch block i, addressed to cell (j, i).
struct CellSignals {
  std::vector<std::int64_t> ids;
  std::vector<ExampleSignal> signals;
};

exec::PartitionedCollection<CellKey, CellSignals> fan_out(const ComputationalGrid& grid, const Signals& signals) {
  return exec::zip_flat_map_to(
      grid.routes(), signals,
      [&](std::size_t j, const Routes::Partition& routes, const Signals::Partition& sigs) {
        std::unordered_map<std::int64_t, const ExampleSignal*> by_id;
        by_id.reserve(sigs.size());
        for (const auto& [id, s] : sigs) by_id.emplace(id, &s);
        std::unordered_map<std::uint32_t, std::size_t> slot;
        std::vector<std::pair<CellKey, CellSignals>> out;
        for (const auto& [id, route] : routes) {
          auto it = by_id.find(id);
          if (it == by_id.end()) continue;
          for (std::uint32_t i : route.blocks) {
            auto [s, inserted] = slot.try_emplace(i, out.size());
            if (inserted) {
              out.emplace_back(CellKey{static_cast<std::int64_t>(j), static_cast<std::int64_t>(i)}, CellSignals{});
            }
            auto& cell = out[s->second].second;
            cell.ids.push_back(id);
            cell.signals.push_back(*it->second);
          }
        }
        return out;
      },
      grid.cell_partitioner());
}

using CellPart = Cells::Partition;
using SignalPart = exec::PartitionedCollection<CellKey, CellSignals>::Partition;
using ModelPart = ModelCells::Partition;
using GradPieces = std::vector<std::pair<std::int64_t, vec::Block>>;

// Index of each example's slice inside a cell.
std::unordered_map<std::int64_t, const FeatureSlice*> slices_by_example(const GridCell& cell) {
  std::unordered_map<std::int64_t, const FeatureSlice*> at;
  at.reserve(cell.slices.size());
  for (const auto& s : cell.slices) at.emplace(s.example, &s);
  return at;
}

}  // namespace

vec::DistVector backprop(ModelKind kind, const vec::DistVector& x, const ComputationalGrid& grid,
                         const Signals& signals) {
  const vec::VectorLayout& layout = x.layout();
  const std::size_t rows = layout.rows;
  const auto routed = fan_out(grid, signals);
  const auto target = exec::PartitionerPtr<std::int64_t>(vec::DistVector::partitioner_for(layout));

  if (kind == ModelKind::Linear) {
    auto pieces = exec::zip_flat_map_to(
        grid.cells(), routed,
        [&](std::size_t, const CellPart& cells, const SignalPart& sigs) {
          GradPieces out;
          if (sigs.empty()) return out;
          const auto& [key, cell] = cells.front();
          const auto at = slices_by_example(cell);
          vec::Block g(rows, layout.block_length(static_cast<std::size_t>(key.col)));
          const CellSignals& cs = sigs.front().second;
          for (std::size_t n = 0; n < cs.ids.size(); ++n) {
            const FeatureSlice& s = *at.at(cs.ids[n]);
            const auto& ds = cs.signals[n].ds;
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::uint32_t k = s.begin; k < s.end; ++k) g(r, cell.columns[k]) += ds[r] * cell.values[k];
            }
          }
          out.emplace_back(key.col, std::move(g));
          return out;
        },
        target);
    return assemble_gradient(layout, std::move(pieces));
  }

  const ModelCells model = grid.broadcast(x);
  auto pieces = exec::zip3_flat_map_to(
      grid.cells(), model, routed,
      [&](std::size_t, const CellPart& cells, const ModelPart& blocks, const SignalPart& sigs) {
        GradPieces out;
        if (sigs.empty()) return out;
        const auto& [key, cell] = cells.front();
        const vec::Block& xb = blocks.front().second;
        const auto at = slices_by_example(cell);
        vec::Block g(rows, xb.cols);
        const CellSignals& cs = sigs.front().second;
        for (std::size_t n = 0; n < cs.ids.size(); ++n) {
          const FeatureSlice& s = *at.at(cs.ids[n]);
          const Scalar ds = cs.signals[n].ds[0];
          const auto& v = cs.signals[n].cache;
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::uint32_t k = s.begin; k < s.end; ++k) {
              const Scalar f = cell.values[k];
              const std::uint32_t c = cell.columns[k];
              g(r, c) += ds * f * (v[r] - f * xb(r, c));
            }
          }
        }
        out.emplace_back(key.col, std::move(g));
        return out;
      },
      target);
  return assemble_gradient(layout, std::move(pieces));
}

LossGradient loss_and_backprop(ModelKind kind, const LossSpec& loss, const vec::DistVector& x,
                               const ComputationalGrid& grid, bool with_grad) {
  loss.validate();
  if (kind == ModelKind::Linear && loss.kind != LossKind::Softmax && x.rows() != 1) {
    throw DimensionMismatch("scalar losses need a single-row linear model, got " + std::to_string(x.rows()) +
                            " rows");
  }
  if (kind == ModelKind::FactorizationMachine && loss.kind == LossKind::Softmax) {
    throw InvalidArgument("softmax loss needs the linear multi-class model");
  }
  const Scalar total_weight = grid.total_weight();
  if (!(total_weight > 0)) throw InvalidArgument("loss over an empty batch");
  const ScoreTable scores = score(kind, x, grid);

  using ScorePart = ScoreTable::Partition;
  using Weighted = std::pair<Scalar, ExampleSignal>;  // (w * l, signal)
  auto per_example = exec::zip_partitions(
      grid.routes(), scores, [&](std::size_t, const Routes::Partition& routes, const ScorePart& sc) {
        std::vector<std::pair<std::int64_t, Weighted>> out;
        out.reserve(routes.size());
        for (std::size_t n = 0; n < routes.size(); ++n) {
          const ExampleRoute& route = routes[n].second;
          const ScoreEntry& entry = sc[n].second;
          ExampleLoss l = example_loss(loss, entry.scores, route.label);
          const Scalar scale = route.weight / total_weight;
          for (auto& d : l.grad) d *= scale;
          out.emplace_back(routes[n].first, Weighted{route.weight * l.value, ExampleSignal{std::move(l.grad), entry.cache}});
        }
        return out;
      });

  LossGradient result;
  result.value = exec::tree_aggregate(
                     per_example, Scalar{0},
                     [](Scalar acc, const decltype(per_example)::Element& e) { return acc + e.second.first; },
                     [](Scalar a, Scalar b) { return a + b; }) /
                 total_weight;
  if (!with_grad) return result;
  const Signals signals = exec::map_values(per_example, [](std::int64_t, const Weighted& w) { return w.second; });
  result.grad = backprop(kind, x, grid, signals);
  return result;
}

}  // namespace distmin::model
