#pragma once

#include "distmin/opt/minimizer.hpp"

namespace distmin::opt {

// -H g by the two-loop recursion, with initial scaling s.y / y.y taken from
// the newest pair (1 when the history is empty).
DistVector lbfgs_direction(const LbfgsHistory& history, const DistVector& grad);

class Lbfgs : public FirstOrderMinimizer {
 public:
  explicit Lbfgs(MinimizerConfig cfg) : FirstOrderMinimizer(std::move(cfg)) {}

  History initial_history(DiffFunction& f, const DistVector& x) override;
  DistVector choose_descent_direction(const MinimizerState& state, DiffFunction& f) override;
  Scalar determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) override;
  History update_history(const DistVector& x_new, const ObjectiveValue& objective, DiffFunction& f,
                         const MinimizerState& state) override;

 protected:
  // Initial trial step: 1/|d| on the first iteration, then the configured step.
  Scalar initial_trial_step(const MinimizerState& state, const DistVector& direction) const;

  // Set when the quasi-Newton direction was replaced by steepest descent;
  // the next history update starts over.
  bool reset_history_ = false;
};

}  // namespace distmin::opt
