#pragma once

#include "distmin/opt/minimizer.hpp"

namespace distmin::opt {

// eta_t = eta0 * t^(-p) for the t-th step (t >= 1); p = 0 keeps it constant.
Scalar sgd_learning_rate(Scalar eta0, Scalar decay_power, std::size_t t);

class Sgd : public FirstOrderMinimizer {
 public:
  explicit Sgd(MinimizerConfig cfg) : FirstOrderMinimizer(std::move(cfg)) {}

  DistVector choose_descent_direction(const MinimizerState& state, DiffFunction& f) override;
  Scalar determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) override;
};

struct AdagradParams {
  Scalar eta = 1;
  Scalar l1 = 0;
  Scalar l2 = 0;
  Scalar delta = 1e-8;
};

// One step from x with smooth gradient g and history h = h_{t-1}:
//   sigma = sqrt(h + g^2 + delta)
//   x~    = (sigma x - eta g) / (sigma + eta l2)
//   x     = shrink(x~, eta l1 / sigma)
DistVector adagrad_step(const DistVector& x, const DistVector& g, const DistVector& h, const AdagradParams& p);

// h_t from h_{t-1}: running sum of squared gradients at x_1 .. x_{t-1} while
// t <= m, then h_t = (1 - 1/m) h_{t-1} + g_t^2 / m.
//   g_prev: gradient at x_{t-1}, g_new: gradient at x_t.
DistVector adagrad_history(const DistVector& h, const DistVector& g_prev, const DistVector& g_new, std::size_t t,
                           std::size_t m);

// Adagrad with l1 shrinkage and l2 in the step denominator. The objective
// logged is f + l1 |x|_1 + l2/2 |x|^2; convergence uses its pseudo-gradient.
class Adagrad : public FirstOrderMinimizer {
 public:
  explicit Adagrad(MinimizerConfig cfg) : FirstOrderMinimizer(std::move(cfg)) {}

  std::unique_ptr<DiffFunction> adjust_function(DiffFunction& f) override;
  History initial_history(DiffFunction& f, const DistVector& x) override;
  ObjectiveValue calculate_objective(DiffFunction& f, const DistVector& x, const History& history) override;
  DistVector choose_descent_direction(const MinimizerState& state, DiffFunction& f) override;
  Scalar determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) override;
  DistVector take_step(const MinimizerState& state, const DistVector& direction, Scalar step) override;
  History update_history(const DistVector& x_new, const ObjectiveValue& objective, DiffFunction& f,
                         const MinimizerState& state) override;
};

}  // namespace distmin::opt
