#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "distmin/model/loss.hpp"

namespace distmin::model {

// Produces negatives for one positive. Must be deterministic in
// (positive, count, seed). Ids and links of the returned examples are
// assigned by the caller.
class NegativeSampler {
 public:
  virtual ~NegativeSampler() = default;
  virtual std::vector<Example> sample(const Example& positive, std::size_t count, std::uint64_t seed) const = 0;
};

// Item features occupy indices [item_offset, item_offset + num_items). Each
// negative copies the positive and swaps its item for a different one drawn
// uniformly.
class UniformItemSampler final : public NegativeSampler {
 public:
  UniformItemSampler(std::int64_t item_offset, std::int64_t num_items);
  std::vector<Example> sample(const Example& positive, std::size_t count, std::uint64_t seed) const override;

 private:
  std::int64_t offset_;
  std::int64_t items_;
};

// Id of negative j of a positive; negatives are always negative ids.
std::int64_t negative_id(std::int64_t positive_id, std::size_t j, std::size_t per_positive);

// Negative batch b for `positives`, sampled once with seed (seed, b).
ExampleBatch sample_negatives(const ExampleBatch& positives, const NegativeSampler& sampler, std::size_t per_positive,
                              std::uint64_t seed, std::size_t b);

// Positives plus their negative batches E_b^-, gridded for one layout.
struct RankingGrids {
  std::shared_ptr<const ComputationalGrid> positives;
  std::vector<std::shared_ptr<const ComputationalGrid>> negatives;
};

// L = sum_e w(e) (1/B) sum_b mean_j -log sigmoid(s(e) - s(e_bj)) / sum_e w(e)
// and its gradient; negatives are matched to positives by their link.
LossGradient ranking_loss_and_backprop(ModelKind kind, const vec::DistVector& x, const RankingGrids& grids,
                                       bool with_grad = true);

}  // namespace distmin::model
