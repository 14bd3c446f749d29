#include "distmin/model/ranking.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

#include "distmin/error.hpp"

namespace distmin::model {

UniformItemSampler::UniformItemSampler(std::int64_t item_offset, std::int64_t num_items)
    : offset_(item_offset), items_(num_items) {
  if (item_offset < 0 || num_items < 2) throw InvalidArgument("item sampler needs offset >= 0 and at least 2 items");
}

std::vector<Example> UniformItemSampler::sample(const Example& positive, std::size_t count,
                                                std::uint64_t seed) const {
  std::size_t at = positive.features.size();
  for (std::size_t k = 0; k < positive.features.size(); ++k) {
    const auto idx = positive.features[k].index;
    if (idx >= offset_ && idx < offset_ + items_) {
      at = k;
      break;
    }
  }
  if (at == positive.features.size()) {
    throw InvalidArgument("example " + std::to_string(positive.id) + " has no item feature");
  }
  const std::int64_t item = positive.features[at].index - offset_;
  const auto id = static_cast<std::uint64_t>(positive.id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::int64_t> draw(0, items_ - 2);
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::int64_t other = draw(rng);
    if (other >= item) ++other;
    Example neg = positive;
    neg.features[at] = Feature{offset_ + other, 1};
    out.push_back(normalize(std::move(neg)));
  }
  return out;
}

std::int64_t negative_id(std::int64_t positive_id, std::size_t j, std::size_t per_positive) {
  return -(1 + positive_id * static_cast<std::int64_t>(per_positive) + static_cast<std::int64_t>(j));
}

ExampleBatch sample_negatives(const ExampleBatch& positives, const NegativeSampler& sampler, std::size_t per_positive,
                              std::uint64_t seed, std::size_t b) {
  if (per_positive == 0) throw InvalidArgument("need at least one negative per positive");
  const std::uint64_t batch_seed = seed * 0x9E3779B97F4A7C15ull + b + 1;
  std::vector<Example> negatives;
  negatives.reserve(positives.size() * per_positive);
  for (const auto& [id, e] : positives.examples().collect()) {
    if (id < 0) throw InvalidArgument("ranking positives need non-negative ids, got " + std::to_string(id));
    auto drawn = sampler.sample(e, per_positive, batch_seed);
    for (std::size_t j = 0; j < drawn.size(); ++j) {
      drawn[j].id = negative_id(id, j, per_positive);
      drawn[j].weight = 1;
      drawn[j].link = id;
      negatives.push_back(std::move(drawn[j]));
    }
  }
  return ExampleBatch(std::move(negatives), positives.num_partitions());
}

namespace {

Scalar sigmoid(Scalar z) {
  if (z >= 0) return 1 / (1 + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (1 + e);
}

// -log sigmoid(z) without overflow.
Scalar neg_log_sigmoid(Scalar z) { return std::max(-z, Scalar{0}) + std::log1p(std::exp(-std::abs(z))); }

struct NegScore {
  std::int64_t id = 0;
  Scalar score = 0;
  std::vector<Scalar> cache;
};

struct NegTerm {
  std::int64_t id = 0;
  Scalar coef = 0;  // d loss_b / d s(negative)
  std::vector<Scalar> cache;
};

// Per positive, for one negative batch.
struct PairStats {
  Scalar loss = 0;
  Scalar dpos = 0;
  std::vector<NegTerm> negatives;
};

struct PosAcc {
  Scalar loss = 0;
  Scalar dpos = 0;
};

Scalar single_score(const ScoreEntry& e) {
  if (e.scores.size() != 1) throw DimensionMismatch("ranking needs a single score per example");
  return e.scores[0];
}

}  // namespace

LossGradient ranking_loss_and_backprop(ModelKind kind, const vec::DistVector& x, const RankingGrids& grids,
                                       bool with_grad) {
  if (!grids.positives || grids.negatives.empty()) throw InvalidArgument("ranking needs positives and negative batches");
  if (kind == ModelKind::Linear && x.rows() != 1) throw DimensionMismatch("linear ranking needs a single-row model");
  const ComputationalGrid& pos = *grids.positives;
  const ScoreTable pos_scores = score(kind, x, pos);
  const Scalar total_weight = pos.total_weight();
  if (!(total_weight > 0)) throw InvalidArgument("ranking loss over an empty batch");
  const Scalar inv_b = Scalar{1} / static_cast<Scalar>(grids.negatives.size());

  using ScorePart = ScoreTable::Partition;
  using StatsCollection = exec::PartitionedCollection<std::int64_t, PairStats>;
  std::vector<StatsCollection> stats;
  stats.reserve(grids.negatives.size());
  for (const auto& neg : grids.negatives) {
    const ScoreTable neg_scores = score(kind, x, *neg);
    auto by_link = exec::zip_flat_map_to(
        neg->routes(), neg_scores,
        [](std::size_t, const Routes::Partition& routes, const ScorePart& sc) {
          std::vector<std::pair<std::int64_t, NegScore>> out;
          out.reserve(routes.size());
          for (std::size_t n = 0; n < routes.size(); ++n) {
            const auto& [id, route] = routes[n];
            if (!route.link) throw LinkMismatch("negative example " + std::to_string(id) + " has no link");
            out.emplace_back(*route.link, NegScore{id, single_score(sc[n].second), sc[n].second.cache});
          }
          return out;
        },
        pos.example_partitioner());
    using NegPart = decltype(by_link)::Partition;
    stats.push_back(exec::zip_partitions(pos_scores, by_link, [](std::size_t, const ScorePart& ps, const NegPart& ns) {
      std::unordered_map<std::int64_t, std::size_t> at;
      at.reserve(ps.size());
      for (std::size_t n = 0; n < ps.size(); ++n) at.emplace(ps[n].first, n);
      std::vector<std::pair<std::int64_t, PairStats>> out;
      out.reserve(ps.size());
      for (const auto& [id, entry] : ps) out.emplace_back(id, PairStats{});
      for (const auto& [link, ns_entry] : ns) {
        auto it = at.find(link);
        if (it == at.end()) {
          throw LinkMismatch("negative example " + std::to_string(ns_entry.id) + " links to missing positive " +
                             std::to_string(link));
        }
        const Scalar z = single_score(ps[it->second].second) - ns_entry.score;
        PairStats& s = out[it->second].second;
        s.loss += neg_log_sigmoid(z);
        const Scalar d = sigmoid(-z);
        s.dpos -= d;
        s.negatives.push_back(NegTerm{ns_entry.id, d, ns_entry.cache});
      }
      for (auto& [id, s] : out) {
        if (s.negatives.empty()) continue;
        const Scalar inv_n = Scalar{1} / static_cast<Scalar>(s.negatives.size());
        s.loss *= inv_n;
        s.dpos *= inv_n;
        for (auto& t : s.negatives) t.coef *= inv_n;
      }
      return out;
    }));
  }

  using AccCollection = exec::PartitionedCollection<std::int64_t, PosAcc>;
  AccCollection acc = exec::map_values(stats.front(), [](std::int64_t, const PairStats& s) {
    return PosAcc{s.loss, s.dpos};
  });
  for (std::size_t b = 1; b < stats.size(); ++b) {
    acc = exec::zip_partitions(acc, stats[b],
                               [](std::size_t, const AccCollection::Partition& a, const StatsCollection::Partition& s) {
                                 auto out = a;
                                 for (std::size_t n = 0; n < out.size(); ++n) {
                                   out[n].second.loss += s[n].second.loss;
                                   out[n].second.dpos += s[n].second.dpos;
                                 }
                                 return out;
                               });
  }

  LossGradient result;
  auto weighted = exec::zip_partitions(pos.routes(), acc,
                                       [](std::size_t, const Routes::Partition& r, const AccCollection::Partition& a) {
                                         std::vector<std::pair<std::int64_t, Scalar>> out;
                                         out.reserve(r.size());
                                         for (std::size_t n = 0; n < r.size(); ++n) {
                                           out.emplace_back(r[n].first, r[n].second.weight * a[n].second.loss);
                                         }
                                         return out;
                                       });
  result.value = exec::tree_aggregate(
                     weighted, Scalar{0}, [](Scalar s, const std::pair<std::int64_t, Scalar>& e) { return s + e.second; },
                     [](Scalar a, Scalar b) { return a + b; }) *
                 inv_b / total_weight;
  if (!with_grad) return result;

  const Signals pos_signals = exec::zip_partitions(
      pos.routes(), acc, [&](std::size_t, const Routes::Partition& r, const AccCollection::Partition& a) {
        std::vector<std::pair<std::int64_t, ExampleSignal>> out;
        out.reserve(r.size());
        for (std::size_t n = 0; n < r.size(); ++n) {
          const Scalar scale = r[n].second.weight * inv_b / total_weight;
          out.emplace_back(r[n].first, ExampleSignal{{scale * a[n].second.dpos}, {}});
        }
        return out;
      });
  // Attach the positive caches in partition order.
  const Signals pos_full = exec::zip_partitions(
      pos_signals, pos_scores, [](std::size_t, const Signals::Partition& s, const ScorePart& sc) {
        auto out = s;
        for (std::size_t n = 0; n < out.size(); ++n) out[n].second.cache = sc[n].second.cache;
        return out;
      });
  vec::DistVector grad = backprop(kind, x, pos, pos_full);

  for (std::size_t b = 0; b < stats.size(); ++b) {
    const ComputationalGrid& neg = *grids.negatives[b];
    const Signals neg_signals = exec::zip_flat_map_to(
        pos.routes(), stats[b],
        [&](std::size_t, const Routes::Partition& r, const StatsCollection::Partition& s) {
          std::vector<std::pair<std::int64_t, ExampleSignal>> out;
          for (std::size_t n = 0; n < r.size(); ++n) {
            const Scalar scale = r[n].second.weight * inv_b / total_weight;
            for (const auto& t : s[n].second.negatives) out.emplace_back(t.id, ExampleSignal{{scale * t.coef}, t.cache});
          }
          return out;
        },
        neg.example_partitioner());
    grad = grad + backprop(kind, x, neg, neg_signals);
  }
  result.grad = std::move(grad);
  return result;
}

}  // namespace distmin::model
