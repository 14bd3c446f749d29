#pragma once

#include <span>
#include <string>
#include <vector>

#include "distmin/model/scoring.hpp"

namespace distmin::model {

enum class LossKind { L2, Quantile, Logistic, Softmax };

struct LossSpec {
  LossKind kind = LossKind::L2;
  Scalar tau = 0.5;  // quantile level, used by Quantile only

  void validate() const;
};

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

struct ExampleLoss {
  Scalar value = 0;
  std::vector<Scalar> grad;  // d loss / d scores
};

// Unweighted loss of one example.
//   l2        1/2 (s - y)^2
//   quantile  tau r if r >= 0 else (tau - 1) r, with r = y - s
//   logistic  log(1 + exp(-y s)), y in {-1, +1}
//   softmax   sum_k w_k (logsumexp(s) - s_k) over targets (k, w_k)
ExampleLoss example_loss(const LossSpec& spec, std::span<const Scalar> scores, const Label& label);

// Numerically stable softmax (max subtracted first).
std::vector<Scalar> softmax(std::span<const Scalar> scores);

// Per-example score derivatives, already multiplied by w(e)/W, plus the FM
// cache needed to pull them back.
struct ExampleSignal {
  std::vector<Scalar> ds;
  std::vector<Scalar> cache;
};
using Signals = exec::PartitionedCollection<std::int64_t, ExampleSignal>;

// Pulls signals back through the scoring function into a gradient with the
// layout of x. Signals must be partitioned like grid.routes(); examples
// without a signal contribute nothing.
vec::DistVector backprop(ModelKind kind, const vec::DistVector& x, const ComputationalGrid& grid,
                         const Signals& signals);

struct LossGradient {
  Scalar value = 0;
  vec::DistVector grad;  // invalid when not requested
};

// L = sum_e w(e) l(e) / sum_e w(e) and its gradient.
LossGradient loss_and_backprop(ModelKind kind, const LossSpec& loss, const vec::DistVector& x,
                               const ComputationalGrid& grid, bool with_grad = true);

// Sums gradient blocks per model block and fills blocks nobody touched with
// zeros.
vec::DistVector assemble_gradient(const vec::VectorLayout& layout,
                                  exec::PartitionedCollection<std::int64_t, vec::Block> pieces);

}  // namespace distmin::model
