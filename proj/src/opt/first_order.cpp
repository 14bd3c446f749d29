#include "distmin/opt/first_order.hpp"

#include <cmath>

#include "distmin/opt/owlqn.hpp"

namespace distmin::opt {

Scalar sgd_learning_rate(Scalar eta0, Scalar decay_power, std::size_t t) {
  if (decay_power == 0) return eta0;
  return eta0 * std::pow(static_cast<Scalar>(t), -decay_power);
}

DistVector Sgd::choose_descent_direction(const MinimizerState& state, DiffFunction&) { return -state.grad; }

Scalar Sgd::determine_step_size(const MinimizerState& state, DiffFunction&, const DistVector&) {
  return sgd_learning_rate(cfg_.learning_rate, cfg_.decay_power, state.iter + 1);
}

DistVector adagrad_step(const DistVector& x, const DistVector& g, const DistVector& h, const AdagradParams& p) {
  const DistVector sigma = ((h + g * g) + p.delta).map([](Scalar v) { return std::sqrt(v); });
  const DistVector tentative = (sigma * x - g * p.eta) / (sigma + p.eta * p.l2);
  const Scalar eta_l1 = p.eta * p.l1;
  return tentative.keyed_pair_wise(sigma, [eta_l1](std::int64_t, Scalar v, Scalar s) -> Scalar {
    const Scalar threshold = eta_l1 / s;
    if (std::abs(v) < threshold) return 0;
    return v - threshold * (v > 0 ? Scalar(1) : v < 0 ? Scalar(-1) : Scalar(0));
  });
}

DistVector adagrad_history(const DistVector& h, const DistVector& g_prev, const DistVector& g_new, std::size_t t,
                           std::size_t m) {
  if (t <= m) {
    if (t <= 1) return DistVector::zeros(h.layout());
    return h + g_prev * g_prev;
  }
  const Scalar keep = 1 - Scalar(1) / static_cast<Scalar>(m);
  return h * keep + (g_new * g_new) * (Scalar(1) / static_cast<Scalar>(m));
}

std::unique_ptr<DiffFunction> Adagrad::adjust_function(DiffFunction& f) { return std::make_unique<FunctionRef>(f); }

History Adagrad::initial_history(DiffFunction&, const DistVector& x) {
  return AdagradHistory{DistVector::zeros(x.layout()), 0};
}

ObjectiveValue Adagrad::calculate_objective(DiffFunction& f, const DistVector& x, const History&) {
  auto e = f.compute(x);
  if (cfg_.l1 == 0 && cfg_.l2 == 0) return ObjectiveValue{e.value, e.grad, e.grad};
  const Scalar value = e.value + cfg_.l1 * x.norm(1) + cfg_.l2 / 2 * x.dot(x);
  DistVector full = cfg_.l2 != 0 ? e.grad.add_scaled(x, cfg_.l2) : e.grad;
  DistVector pg = cfg_.l1 != 0 ? pseudo_gradient(x, full, cfg_.l1) : full;
  return ObjectiveValue{value, std::move(pg), std::move(e.grad)};
}

DistVector Adagrad::choose_descent_direction(const MinimizerState& state, DiffFunction&) {
  return -state.smooth_grad;
}

Scalar Adagrad::determine_step_size(const MinimizerState&, DiffFunction&, const DistVector&) {
  return cfg_.learning_rate;
}

DistVector Adagrad::take_step(const MinimizerState& state, const DistVector&, Scalar step) {
  const auto& history = std::get<AdagradHistory>(state.history);
  return adagrad_step(state.x, state.smooth_grad, history.h, AdagradParams{step, cfg_.l1, cfg_.l2, cfg_.adagrad_delta});
}

History Adagrad::update_history(const DistVector&, const ObjectiveValue& objective, DiffFunction&,
                                const MinimizerState& state) {
  const auto& old = std::get<AdagradHistory>(state.history);
  const std::size_t t = old.step + 1;
  return AdagradHistory{adagrad_history(old.h, state.smooth_grad, objective.smooth_grad, t, cfg_.adagrad_memory), t};
}

}  // namespace distmin::opt
