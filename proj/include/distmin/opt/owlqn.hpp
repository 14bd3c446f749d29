#pragma once

#include "distmin/opt/lbfgs.hpp"

namespace distmin::opt {

// Minimum-norm subgradient of f + l1 |x|_1 given the smooth gradient g.
DistVector pseudo_gradient(const DistVector& x, const DistVector& g, Scalar l1);

// Zeroes the components of d whose sign disagrees with -pg.
DistVector constrain_to_pseudo_gradient(const DistVector& d, const DistVector& pg);

// Orthant to search in: sign(x_i), or sign(-pg_i) where x_i = 0.
DistVector search_orthant(const DistVector& x, const DistVector& pg);

// Components of y whose sign differs from the orthant are set to 0.
DistVector project_to_orthant(const DistVector& y, const DistVector& orthant);

// LBFGS on f + l1 |x|_1. With l1 = 0 every hook defers to LBFGS.
class Owlqn : public Lbfgs {
 public:
  explicit Owlqn(MinimizerConfig cfg) : Lbfgs(std::move(cfg)) {}

  ObjectiveValue calculate_objective(DiffFunction& f, const DistVector& x, const History& history) override;
  DistVector choose_descent_direction(const MinimizerState& state, DiffFunction& f) override;
  Scalar determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) override;
  DistVector take_step(const MinimizerState& state, const DistVector& direction, Scalar step) override;

 private:
  bool smooth() const { return cfg_.l1 == 0; }
};

}  // namespace distmin::opt
