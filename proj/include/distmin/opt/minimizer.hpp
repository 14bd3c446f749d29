#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "distmin/opt/config.hpp"
#include "distmin/opt/diff_function.hpp"

namespace distmin::opt {

struct LbfgsPair {
  DistVector s;
  DistVector y;
  Scalar rho = 0;  // 1 / (s . y)
};

// Ring buffer of the most recent curvature pairs, oldest first.
struct LbfgsHistory {
  std::size_t memory = 10;
  std::deque<LbfgsPair> pairs;

  // Stores (s, y) unless s . y <= 1e-10 |s| |y|; returns whether it was kept.
  bool push(DistVector s, DistVector y);
  void clear() { pairs.clear(); }
  std::size_t size() const { return pairs.size(); }
};

struct AdagradHistory {
  DistVector h;
  std::size_t step = 0;  // index t of the history h_t
};

using History = std::variant<std::monostate, LbfgsHistory, AdagradHistory>;

struct ConvergenceReason {
  enum class Kind { MaxIterations, GradNormBelow, RelativeImprovementBelow, LineSearchFailed };
  Kind kind = Kind::MaxIterations;
  Scalar tolerance = 0;
  std::string detail;

  std::string describe() const;
};

// Objective as seen by the loop. `grad` drives convergence (for l1 methods
// the pseudo-gradient); `smooth_grad` is the gradient of the differentiable
// part and feeds curvature and adaptive histories.
struct ObjectiveValue {
  Scalar value = 0;
  DistVector grad;
  DistVector smooth_grad;
};

struct MinimizerState {
  DistVector x;
  Scalar value = 0;
  DistVector grad;
  DistVector smooth_grad;
  History history;
  std::size_t iter = 0;
  std::optional<ConvergenceReason> convergence;
  Scalar rel_improvement = 0;
  std::size_t stalled = 0;
  std::size_t batch_index = 0;
};

struct IterationRecord {
  std::size_t iter = 0;
  Scalar value = 0;
  Scalar grad_norm = 0;
  Scalar rel_improvement = 0;
  std::size_t batch_index = 0;
  double seconds = 0;
  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

// |f_old - f_new| / max(|f_old|, 1e-6)
Scalar relative_improvement(Scalar old_value, Scalar new_value);

// Shared iteration loop; concrete methods supply the hooks.
class FirstOrderMinimizer {
 public:
  explicit FirstOrderMinimizer(MinimizerConfig cfg);
  virtual ~FirstOrderMinimizer() = default;

  const MinimizerConfig& config() const { return cfg_; }

  MinimizerState minimize(DiffFunction& f, const DistVector& init, const IterationObserver& observer = {});

  virtual std::unique_ptr<DiffFunction> adjust_function(DiffFunction& f);
  virtual History initial_history(DiffFunction& f, const DistVector& x);
  virtual ObjectiveValue calculate_objective(DiffFunction& f, const DistVector& x, const History& history);
  virtual DistVector choose_descent_direction(const MinimizerState& state, DiffFunction& f) = 0;
  virtual Scalar determine_step_size(const MinimizerState& state, DiffFunction& f, const DistVector& direction) = 0;
  virtual DistVector take_step(const MinimizerState& state, const DistVector& direction, Scalar step);
  virtual History update_history(const DistVector& x_new, const ObjectiveValue& objective, DiffFunction& f,
                                 const MinimizerState& state);

  std::optional<ConvergenceReason> convergence_check(const MinimizerState& state) const;

 protected:
  MinimizerConfig cfg_;
};

std::unique_ptr<FirstOrderMinimizer> make_minimizer(const MinimizerConfig& cfg);

MinimizerState minimize(DiffFunction& f, const DistVector& init, const MinimizerConfig& cfg,
                        const IterationObserver& observer = {});

}  // namespace distmin::opt
