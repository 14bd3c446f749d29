#include "distmin/model/objective.hpp"

#include "distmin/error.hpp"

namespace distmin::model {

namespace {

std::size_t require_batches(std::size_t n) {
  if (n == 0) throw InvalidArgument("an objective needs at least one batch");
  return n;
}

}  // namespace

ModelObjective::ModelObjective(ModelKind kind, LossSpec loss, vec::VectorLayout layout,
                               std::vector<ExampleBatch> batches, opt::HoldPolicy policy)
    : BatchedFunction(require_batches(batches.size()), policy),
      kind_(kind),
      loss_(loss),
      layout_(layout),
      batches_(std::move(batches)),
      grids_(batches_.size()) {
  loss_.validate();
  layout_.validate();
}

const ComputationalGrid& ModelObjective::grid(std::size_t batch) {
  auto& g = grids_.at(batch);
  if (!g) {
    g = std::make_shared<const ComputationalGrid>(batches_[batch], layout_);
    batches_[batch] = ExampleBatch();
  }
  return *g;
}

opt::Evaluation ModelObjective::evaluate(const vec::DistVector& x, std::size_t batch, bool with_grad) {
  auto r = loss_and_backprop(kind_, loss_, x, grid(batch), with_grad);
  return {r.value, std::move(r.grad)};
}

RankingObjective::RankingObjective(vec::VectorLayout layout, std::vector<ExampleBatch> positives,
                                   const NegativeSampler& sampler, Options options)
    : BatchedFunction(require_batches(positives.size()), options.policy), layout_(layout), options_(options) {
  layout_.validate();
  if (options_.negative_batches == 0) throw InvalidArgument("ranking needs at least one negative batch");
  grids_.reserve(positives.size());
  for (std::size_t p = 0; p < positives.size(); ++p) {
    RankingGrids g;
    g.positives = std::make_shared<const ComputationalGrid>(positives[p], layout_);
    for (std::size_t b = 0; b < options_.negative_batches; ++b) {
      const ExampleBatch neg = sample_negatives(positives[p], sampler, options_.negatives_per_positive, options_.seed,
                                                p * options_.negative_batches + b);
      g.negatives.push_back(std::make_shared<const ComputationalGrid>(neg, layout_));
    }
    grids_.push_back(std::move(g));
  }
}

opt::Evaluation RankingObjective::evaluate(const vec::DistVector& x, std::size_t batch, bool with_grad) {
  auto r = ranking_loss_and_backprop(options_.kind, x, grids_.at(batch), with_grad);
  return {r.value, std::move(r.grad)};
}

}  // namespace distmin::model
