#pragma once

#include <memory>
#include <vector>

#include "distmin/model/ranking.hpp"
#include "distmin/opt/diff_function.hpp"

namespace distmin::model {

// Empirical risk of a linear model or FM over rotating example batches.
// Grids are built on first use of each batch and kept; the objective then
// lets go of its copy of the batch.
class ModelObjective final : public opt::BatchedFunction {
 public:
  ModelObjective(ModelKind kind, LossSpec loss, vec::VectorLayout layout, std::vector<ExampleBatch> batches,
                 opt::HoldPolicy policy = opt::HoldPolicy::SameBatch);

  const ComputationalGrid& grid(std::size_t batch);
  const vec::VectorLayout& layout() const { return layout_; }
  ModelKind kind() const { return kind_; }
  const LossSpec& loss() const { return loss_; }

 protected:
  opt::Evaluation evaluate(const vec::DistVector& x, std::size_t batch, bool with_grad) override;

 private:
  ModelKind kind_;
  LossSpec loss_;
  vec::VectorLayout layout_;
  std::vector<ExampleBatch> batches_;
  std::vector<std::shared_ptr<const ComputationalGrid>> grids_;
};

// Pairwise ranking loss over rotating positive batches. Negative batches
// are drawn once per positive batch at construction.
class RankingObjective final : public opt::BatchedFunction {
 public:
  struct Options {
    ModelKind kind = ModelKind::FactorizationMachine;
    std::size_t negatives_per_positive = 1;
    std::size_t negative_batches = 1;
    std::uint64_t seed = 0;
    opt::HoldPolicy policy = opt::HoldPolicy::SameBatch;
  };

  RankingObjective(vec::VectorLayout layout, std::vector<ExampleBatch> positives, const NegativeSampler& sampler,
                   Options options);

  const RankingGrids& grids(std::size_t batch) const { return grids_.at(batch); }

 protected:
  opt::Evaluation evaluate(const vec::DistVector& x, std::size_t batch, bool with_grad) override;

 private:
  vec::VectorLayout layout_;
  Options options_;
  std::vector<RankingGrids> grids_;
};

}  // namespace distmin::model
