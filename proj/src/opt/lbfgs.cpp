#include "distmin/opt/lbfgs.hpp"

#include <vector>

#include "distmin/error.hpp"

namespace distmin::opt {

DistVector lbfgs_direction(const LbfgsHistory& history, const DistVector& grad) {
  const auto& pairs = history.pairs;
  if (pairs.empty()) return -grad;
  std::vector<Scalar> alpha(pairs.size());
  DistVector q = grad;
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q = q.add_scaled(pairs[i].y, -alpha[i]);
  }
  const auto& last = pairs.back();
  const Scalar gamma = last.s.dot(last.y) / last.y.dot(last.y);
  DistVector r = q * gamma;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Scalar beta = pairs[i].rho * pairs[i].y.dot(r);
    r = r.add_scaled(pairs[i].s, alpha[i] - beta);
  }
  return -r;
}

History Lbfgs::initial_history(DiffFunction&, const DistVector&) {
  reset_history_ = false;
  return LbfgsHistory{cfg_.memory, {}};
}

DistVector Lbfgs::choose_descent_direction(const MinimizerState& state, DiffFunction&) {
  const auto& history = std::get<LbfgsHistory>(state.history);
  DistVector d = lbfgs_direction(history, state.grad);
  if (!history.pairs.empty() && !(d.dot(state.grad) < 0)) {
    reset_history_ = true;
    return -state.grad;
  }
  return d;
}

Scalar Lbfgs::initial_trial_step(const MinimizerState& state, const DistVector& direction) const {
  if (state.iter == 0) {
    const Scalar n = direction.norm(2);
    if (n > 0) return 1 / n;
  }
  return cfg_.initial_step;
}

Scalar Lbfgs::determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) {
  Scalar value0 = state.value;
  Scalar slope0 = state.grad.dot(direction);
  if (cfg_.hold_batch && f.active_batch() != state.batch_index) {
    // The held batch differs from the one the gradient came from.
    auto e = f.compute(state.x);
    if (e.grad.dot(direction) < 0) {
      value0 = e.value;
      slope0 = e.grad.dot(direction);
    } else {
      // No descent on the held batch: search on the gradient's own batch.
      f.hold_batch_at(state.batch_index);
    }
  }
  const Scalar t0 = initial_trial_step(state, direction);
  if (cfg_.line_search == LineSearchKind::StrongWolfe) {
    return strong_wolfe_search(f, state.x, direction, value0, slope0, t0, cfg_.wolfe).step;
  }
  return backtracking_search(f, state.x, direction, value0, slope0, t0, cfg_.backtracking).step;
}

History Lbfgs::update_history(const DistVector& x_new, const ObjectiveValue& objective, DiffFunction&,
                              const MinimizerState& state) {
  auto history = std::get<LbfgsHistory>(state.history);
  if (reset_history_) {
    history.clear();
    reset_history_ = false;
  }
  history.push(x_new - state.x, objective.smooth_grad - state.smooth_grad);
  return history;
}

}  // namespace distmin::opt
