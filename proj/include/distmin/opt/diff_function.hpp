#pragma once

#include <cstddef>

#include "distmin/scalar.hpp"
#include "distmin/vec/dist_vector.hpp"

namespace distmin::opt {

using vec::DistVector;

struct Evaluation {
  Scalar value = 0;
  DistVector grad;
};

// Objective evaluated on distributed parameters. Batched implementations
// rotate through their batches on every evaluation unless a hold is active.
class DiffFunction {
 public:
  virtual ~DiffFunction() = default;

  virtual Evaluation compute(const DistVector& x) = 0;
  virtual Scalar compute_value(const DistVector& x) { return compute(x).value; }
  virtual DistVector compute_grad(const DistVector& x) { return compute(x).grad; }

  virtual void hold_batch() {}
  // Pins a specific batch; ends like any other hold.
  virtual void hold_batch_at(std::size_t) {}
  virtual void stop_holding_batch() {}
  virtual std::size_t batch_count() const { return 1; }
  // Batch the next evaluation will use.
  virtual std::size_t active_batch() const { return 0; }
  // Batch used by the most recent evaluation.
  virtual std::size_t last_batch() const { return 0; }
};

// Which batch a hold pins: the batch of the latest evaluation, or the one
// after it so that step sizes are chosen on data the gradient did not see.
enum class HoldPolicy { SameBatch, NextBatch };

class BatchedFunction : public DiffFunction {
 public:
  explicit BatchedFunction(std::size_t num_batches, HoldPolicy policy = HoldPolicy::SameBatch);

  Evaluation compute(const DistVector& x) final;
  Scalar compute_value(const DistVector& x) final;
  DistVector compute_grad(const DistVector& x) final;

  void hold_batch() override;
  void hold_batch_at(std::size_t batch) override;
  void stop_holding_batch() override;
  std::size_t batch_count() const override { return num_batches_; }
  std::size_t active_batch() const override;
  std::size_t last_batch() const override { return last_; }

  bool holding() const { return holding_; }
  std::size_t evaluations() const { return counter_; }
  HoldPolicy hold_policy() const { return policy_; }

 protected:
  virtual Evaluation evaluate(const DistVector& x, std::size_t batch, bool with_grad) = 0;

 private:
  std::size_t take_batch();

  std::size_t num_batches_;
  HoldPolicy policy_;
  std::size_t counter_ = 0;
  std::size_t last_ = 0;
  bool holding_ = false;
  std::size_t held_ = 0;
};

// f(x) + l2/2 * ||x||^2.
class L2Regularized : public DiffFunction {
 public:
  L2Regularized(DiffFunction& base, Scalar l2) : base_(base), l2_(l2) {}

  Evaluation compute(const DistVector& x) override;
  Scalar compute_value(const DistVector& x) override;
  void hold_batch() override { base_.hold_batch(); }
  void hold_batch_at(std::size_t batch) override { base_.hold_batch_at(batch); }
  void stop_holding_batch() override { base_.stop_holding_batch(); }
  std::size_t batch_count() const override { return base_.batch_count(); }
  std::size_t active_batch() const override { return base_.active_batch(); }
  std::size_t last_batch() const override { return base_.last_batch(); }

 private:
  DiffFunction& base_;
  Scalar l2_;
};

// Forwards everything to another function; used when no adjustment applies.
class FunctionRef : public DiffFunction {
 public:
  explicit FunctionRef(DiffFunction& base) : base_(base) {}

  Evaluation compute(const DistVector& x) override { return base_.compute(x); }
  Scalar compute_value(const DistVector& x) override { return base_.compute_value(x); }
  DistVector compute_grad(const DistVector& x) override { return base_.compute_grad(x); }
  void hold_batch() override { base_.hold_batch(); }
  void hold_batch_at(std::size_t batch) override { base_.hold_batch_at(batch); }
  void stop_holding_batch() override { base_.stop_holding_batch(); }
  std::size_t batch_count() const override { return base_.batch_count(); }
  std::size_t active_batch() const override { return base_.active_batch(); }
  std::size_t last_batch() const override { return base_.last_batch(); }

 private:
  DiffFunction& base_;
};

// Holds the batch for the lifetime of the guard when `enabled`.
class BatchHold {
 public:
  BatchHold(DiffFunction& f, bool enabled) : f_(f), enabled_(enabled) {
    if (enabled_) f_.hold_batch();
  }
  ~BatchHold() {
    if (enabled_) f_.stop_holding_batch();
  }
  BatchHold(const BatchHold&) = delete;
  BatchHold& operator=(const BatchHold&) = delete;

 private:
  DiffFunction& f_;
  bool enabled_;
};

}  // namespace distmin::opt
