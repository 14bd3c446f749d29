#pragma once

#include <cstdint>

#include "distmin/opt/diff_function.hpp"
#include "distmin/ot/cost_grid.hpp"

namespace distmin::ot {

struct OtConfig {
  Scalar epsilon = 0.1;
  // Exponent arguments a above the cap use exp(cap) (1 + a - cap).
  Scalar exponent_cap = 30;

  void validate() const;
};

struct OtEvaluation {
  Scalar value = 0;        // -L
  vec::DistVector grad;    // -grad L, invalid when not requested
  std::uint64_t saturated = 0;
};

// Dual objective
//   L(u, v) = mean_i u_i + mean_j v_j - eps/(n_x n_y) sum_ij exp((u_i + v_j - c_ij)/eps)
// evaluated cell by cell over the cost grid; returns -L and -grad L.
OtEvaluation ot_evaluate(const vec::DistVector& potentials, const CostGrid& grid, const OtConfig& cfg,
                         bool with_grad = true);

// Plan pi_ij = exp((u_i + v_j - c_ij)/eps) / (n_x n_y), row and column sums.
struct Marginals {
  std::vector<double> rows;
  std::vector<double> cols;
};
Marginals plan_marginals(const vec::DistVector& potentials, const CostGrid& grid, const OtConfig& cfg);

class OtObjective final : public opt::DiffFunction {
 public:
  OtObjective(CostGrid grid, OtConfig cfg);

  opt::Evaluation compute(const vec::DistVector& x) override;
  Scalar compute_value(const vec::DistVector& x) override;

  const CostGrid& grid() const { return grid_; }
  const OtConfig& config() const { return cfg_; }
  vec::VectorLayout layout() const { return grid_.layout().vector_layout(); }
  std::uint64_t saturated_total() const { return saturated_; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  CostGrid grid_;
  OtConfig cfg_;
  std::uint64_t saturated_ = 0;
  std::size_t evaluations_ = 0;
};

}  // namespace distmin::ot
