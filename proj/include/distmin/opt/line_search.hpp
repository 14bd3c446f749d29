#pragma once

#include <cstddef>

#include "distmin/opt/diff_function.hpp"

namespace distmin::opt {

struct WolfeConfig {
  Scalar c1 = 1e-4;
  Scalar c2 = 0.9;
  std::size_t max_evals = 25;
};

struct BacktrackingConfig {
  Scalar shrink = 0.5;
  Scalar c1 = 1e-4;
  std::size_t max_evals = 30;
};

struct LineSearchResult {
  Scalar step = 0;
  Scalar value = 0;
  std::size_t evaluations = 0;
};

// phi(t) = f(x + t d). Both searches need phi(0) = value0 and
// phi'(0) = slope0 < 0 from the caller; a non-negative slope throws
// InvalidArgument. Running out of evaluations throws LineSearchFailed.

// Bracket-and-zoom search for a step satisfying the strong Wolfe
// conditions, with cubic interpolation inside the bracket.
LineSearchResult strong_wolfe_search(DiffFunction& f, const DistVector& x, const DistVector& d, Scalar value0,
                                     Scalar slope0, Scalar initial_step, const WolfeConfig& cfg = {});

// Largest t in {initial_step * shrink^k} satisfying the Armijo condition.
LineSearchResult backtracking_search(DiffFunction& f, const DistVector& x, const DistVector& d, Scalar value0,
                                     Scalar slope0, Scalar initial_step, const BacktrackingConfig& cfg = {});

}  // namespace distmin::opt
