#include "distmin/opt/diff_function.hpp"

#include <string>

#include "distmin/error.hpp"

namespace distmin::opt {

BatchedFunction::BatchedFunction(std::size_t num_batches, HoldPolicy policy)
    : num_batches_(num_batches), policy_(policy) {
  if (num_batches_ == 0) throw InvalidArgument("a batched function needs at least one batch");
}

std::size_t BatchedFunction::active_batch() const { return holding_ ? held_ : counter_ % num_batches_; }

std::size_t BatchedFunction::take_batch() {
  if (holding_) {
    last_ = held_;
    return held_;
  }
  last_ = counter_ % num_batches_;
  ++counter_;
  return last_;
}

Evaluation BatchedFunction::compute(const DistVector& x) { return evaluate(x, take_batch(), true); }

Scalar BatchedFunction::compute_value(const DistVector& x) { return evaluate(x, take_batch(), false).value; }

DistVector BatchedFunction::compute_grad(const DistVector& x) { return evaluate(x, take_batch(), true).grad; }

void BatchedFunction::hold_batch() {
  if (holding_) return;
  holding_ = true;
  held_ = policy_ == HoldPolicy::SameBatch ? last_ : (last_ + 1) % num_batches_;
}

void BatchedFunction::hold_batch_at(std::size_t batch) {
  if (batch >= num_batches_) throw IndexOutOfRange("batch " + std::to_string(batch) + " out of range");
  holding_ = true;
  held_ = batch;
}

void BatchedFunction::stop_holding_batch() { holding_ = false; }

Evaluation L2Regularized::compute(const DistVector& x) {
  auto e = base_.compute(x);
  if (l2_ != 0) {
    e.value += l2_ / 2 * x.dot(x);
    e.grad = e.grad.add_scaled(x, l2_);
  }
  return e;
}

Scalar L2Regularized::compute_value(const DistVector& x) {
  Scalar v = base_.compute_value(x);
  if (l2_ != 0) v += l2_ / 2 * x.dot(x);
  return v;
}

}  // namespace distmin::opt
