#include "distmin/opt/owlqn.hpp"

#include <cmath>
#include <string>

#include "distmin/error.hpp"

namespace distmin::opt {

namespace {

Scalar sign(Scalar v) { return v > 0 ? Scalar(1) : v < 0 ? Scalar(-1) : Scalar(0); }

}  // namespace

DistVector pseudo_gradient(const DistVector& x, const DistVector& g, Scalar l1) {
  return x.keyed_pair_wise(g, [l1](std::int64_t, Scalar xi, Scalar gi) -> Scalar {
    if (xi > 0) return gi + l1;
    if (xi < 0) return gi - l1;
    if (gi + l1 < 0) return gi + l1;
    if (gi - l1 > 0) return gi - l1;
    return 0;
  });
}

DistVector constrain_to_pseudo_gradient(const DistVector& d, const DistVector& pg) {
  return d.keyed_pair_wise(pg, [](std::int64_t, Scalar di, Scalar pgi) { return di * pgi < 0 ? di : Scalar(0); });
}

DistVector search_orthant(const DistVector& x, const DistVector& pg) {
  return x.keyed_pair_wise(pg, [](std::int64_t, Scalar xi, Scalar pgi) { return xi != 0 ? sign(xi) : sign(-pgi); });
}

DistVector project_to_orthant(const DistVector& y, const DistVector& orthant) {
  return y.keyed_pair_wise(orthant, [](std::int64_t, Scalar yi, Scalar oi) { return sign(yi) == oi ? yi : Scalar(0); });
}

ObjectiveValue Owlqn::calculate_objective(DiffFunction& f, const DistVector& x, const History& history) {
  if (smooth()) return Lbfgs::calculate_objective(f, x, history);
  auto e = f.compute(x);
  return ObjectiveValue{e.value + cfg_.l1 * x.norm(1), pseudo_gradient(x, e.grad, cfg_.l1), e.grad};
}

DistVector Owlqn::choose_descent_direction(const MinimizerState& state, DiffFunction& f) {
  if (smooth()) return Lbfgs::choose_descent_direction(state, f);
  const auto& history = std::get<LbfgsHistory>(state.history);
  DistVector d = constrain_to_pseudo_gradient(lbfgs_direction(history, state.grad), state.grad);
  if (!(d.dot(state.grad) < 0)) {
    reset_history_ = true;
    return -state.grad;
  }
  return d;
}

Scalar Owlqn::determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) {
  if (smooth()) return Lbfgs::determine_step_size(state, f, direction);
  Scalar value0 = state.value;
  DistVector pg = state.grad;
  if (cfg_.hold_batch && f.active_batch() != state.batch_index) {
    auto e = f.compute(state.x);
    auto held_pg = pseudo_gradient(state.x, e.grad, cfg_.l1);
    if (held_pg.dot(direction) < 0) {
      value0 = e.value + cfg_.l1 * state.x.norm(1);
      pg = std::move(held_pg);
    } else {
      f.hold_batch_at(state.batch_index);
    }
  }
  const DistVector orthant = search_orthant(state.x, state.grad);
  const auto& bt = cfg_.backtracking;
  Scalar t = initial_trial_step(state, direction);
  for (std::size_t evals = 0; evals < bt.max_evals; ++evals) {
    const DistVector candidate = project_to_orthant(state.x.add_scaled(direction, t), orthant);
    const Scalar value = f.compute_value(candidate) + cfg_.l1 * candidate.norm(1);
    if (value <= value0 + bt.c1 * pg.dot(candidate - state.x)) return t;
    t *= bt.shrink;
  }
  throw LineSearchFailed("projected backtracking exhausted " + std::to_string(bt.max_evals) + " evaluations");
}

DistVector Owlqn::take_step(const MinimizerState& state, const DistVector& direction, Scalar step) {
  if (smooth()) return Lbfgs::take_step(state, direction, step);
  return project_to_orthant(state.x.add_scaled(direction, step), search_orthant(state.x, state.grad));
}

}  // namespace distmin::opt
