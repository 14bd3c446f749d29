#include "distmin/opt/minimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "distmin/error.hpp"
#include "distmin/opt/first_order.hpp"
#include "distmin/opt/lbfgs.hpp"
#include "distmin/opt/owlqn.hpp"

namespace distmin::opt {

bool LbfgsHistory::push(DistVector s, DistVector y) {
  const Scalar sy = s.dot(y);
  if (!(sy > Scalar(1e-10) * s.norm(2) * y.norm(2))) return false;
  pairs.push_back(LbfgsPair{std::move(s), std::move(y), 1 / sy});
  while (pairs.size() > memory) pairs.pop_front();
  return true;
}

std::string ConvergenceReason::describe() const {
  switch (kind) {
    case Kind::MaxIterations: return "max iterations reached";
    case Kind::GradNormBelow: return "gradient norm below " + std::to_string(tolerance);
    case Kind::RelativeImprovementBelow: return "relative improvement below " + std::to_string(tolerance);
    case Kind::LineSearchFailed: return "line search failed: " + detail;
  }
  return "?";
}

Scalar relative_improvement(Scalar old_value, Scalar new_value) {
  return std::abs(old_value - new_value) / std::max<Scalar>(std::abs(old_value), Scalar(1e-6));
}

FirstOrderMinimizer::FirstOrderMinimizer(MinimizerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::unique_ptr<DiffFunction> FirstOrderMinimizer::adjust_function(DiffFunction& f) {
  if (cfg_.l2 > 0) return std::make_unique<L2Regularized>(f, cfg_.l2);
  return std::make_unique<FunctionRef>(f);
}

History FirstOrderMinimizer::initial_history(DiffFunction&, const DistVector&) { return std::monostate{}; }

ObjectiveValue FirstOrderMinimizer::calculate_objective(DiffFunction& f, const DistVector& x, const History&) {
  auto e = f.compute(x);
  return ObjectiveValue{e.value, e.grad, e.grad};
}

DistVector FirstOrderMinimizer::take_step(const MinimizerState& state, const DistVector& direction, Scalar step) {
  return state.x.add_scaled(direction, step);
}

History FirstOrderMinimizer::update_history(const DistVector&, const ObjectiveValue&, DiffFunction&,
                                            const MinimizerState& state) {
  return state.history;
}

std::optional<ConvergenceReason> FirstOrderMinimizer::convergence_check(const MinimizerState& state) const {
  using Kind = ConvergenceReason::Kind;
  if (state.iter >= cfg_.max_iterations) {
    return ConvergenceReason{Kind::MaxIterations, static_cast<Scalar>(cfg_.max_iterations), {}};
  }
  if (state.grad.norm(2) < cfg_.grad_tolerance) return ConvergenceReason{Kind::GradNormBelow, cfg_.grad_tolerance, {}};
  if (cfg_.improvement_tolerance > 0 && state.stalled >= cfg_.improvement_patience) {
    return ConvergenceReason{Kind::RelativeImprovementBelow, cfg_.improvement_tolerance, {}};
  }
  return std::nullopt;
}

MinimizerState FirstOrderMinimizer::minimize(DiffFunction& objective, const DistVector& init,
                                             const IterationObserver& observer) {
  if (!init.valid()) throw InvalidArgument("minimize: initial point has no blocks");
  const auto start = std::chrono::steady_clock::now();
  auto emit = [&](const MinimizerState& s) {
    if (!observer) return;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    observer(IterationRecord{s.iter, s.value, s.grad.norm(2), s.rel_improvement, s.batch_index, seconds});
  };

  auto f = adjust_function(objective);
  std::size_t num_steps = 0;

  MinimizerState state;
  state.x = init;
  state.history = initial_history(*f, init);
  {
    auto obj = calculate_objective(*f, init, state.history);
    obj.grad.require_same_layout(init, "initial gradient");
    state.value = obj.value;
    state.grad = std::move(obj.grad);
    state.smooth_grad = std::move(obj.smooth_grad);
    state.batch_index = f->last_batch();
  }
  state.convergence = convergence_check(state);
  emit(state);

  while (!state.convergence) {
    const bool cut = num_steps > 0 && num_steps % cfg_.checkpoint_period == 0;

    DistVector w = choose_descent_direction(state, *f);
    w.persist();
    if (cut) w = w.interrupt_lineage();
    w.count();

    Scalar eta = 0;
    try {
      BatchHold hold(*f, cfg_.hold_batch);
      eta = determine_step_size(state, *f, w);
    } catch (const LineSearchFailed& e) {
      w.unpersist();
      state.convergence = ConvergenceReason{ConvergenceReason::Kind::LineSearchFailed, 0, e.what()};
      break;
    }

    DistVector x = take_step(state, w, eta);
    x.persist();
    if (cut) x = x.interrupt_lineage();
    x.count();

    w.unpersist();

    auto obj = calculate_objective(*f, x, state.history);
    obj.grad.persist();
    if (cut) obj.grad = obj.grad.interrupt_lineage();
    obj.grad.count();

    const Scalar impr = relative_improvement(state.value, obj.value);

    MinimizerState next;
    next.history = update_history(x, obj, *f, state);
    next.x = std::move(x);
    next.value = obj.value;
    next.grad = std::move(obj.grad);
    next.smooth_grad = std::move(obj.smooth_grad);
    next.iter = state.iter + 1;
    next.rel_improvement = impr;
    next.stalled = cfg_.improvement_tolerance > 0 && impr < cfg_.improvement_tolerance ? state.stalled + 1 : 0;
    next.batch_index = f->last_batch();
    next.convergence = convergence_check(next);
    state = std::move(next);
    ++num_steps;
    emit(state);
  }
  return state;
}

std::unique_ptr<FirstOrderMinimizer> make_minimizer(const MinimizerConfig& cfg) {
  switch (cfg.optimizer) {
    case OptimizerKind::Sgd: return std::make_unique<Sgd>(cfg);
    case OptimizerKind::Adagrad: return std::make_unique<Adagrad>(cfg);
    case OptimizerKind::Lbfgs: return std::make_unique<Lbfgs>(cfg);
    case OptimizerKind::Owlqn: return std::make_unique<Owlqn>(cfg);
  }
  throw InvalidArgument("unknown optimizer kind");
}

MinimizerState minimize(DiffFunction& f, const DistVector& init, const MinimizerConfig& cfg,
                        const IterationObserver& observer) {
  return make_minimizer(cfg)->minimize(f, init, observer);
}

}  // namespace distmin::opt
