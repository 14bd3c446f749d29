#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "distmin/opt/line_search.hpp"

namespace distmin::opt {

enum class OptimizerKind { Sgd, Adagrad, Lbfgs, Owlqn };
enum class LineSearchKind { StrongWolfe, Backtracking };

struct MinimizerConfig {
  OptimizerKind optimizer = OptimizerKind::Lbfgs;
  LineSearchKind line_search = LineSearchKind::StrongWolfe;

  std::size_t max_iterations = 100;
  Scalar grad_tolerance = 1e-6;
  // 0 disables the relative-improvement test.
  Scalar improvement_tolerance = 0;
  std::size_t improvement_patience = 1;

  std::size_t memory = 10;
  Scalar l1 = 0;
  Scalar l2 = 0;

  bool hold_batch = false;
  std::size_t checkpoint_period = 5;

  // SGD: eta_t = learning_rate * t^(-decay_power). Adagrad: constant eta.
  Scalar learning_rate = 1;
  Scalar decay_power = 0;
  Scalar adagrad_delta = 1e-8;
  std::size_t adagrad_memory = 10;

  WolfeConfig wolfe;
  BacktrackingConfig backtracking;
  Scalar initial_step = 1;

  void validate() const;
};

std::string to_string(OptimizerKind kind);
std::string to_string(LineSearchKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);
LineSearchKind parse_line_search_kind(const std::string& name);

// Unknown keys are rejected; missing keys keep their defaults.
MinimizerConfig minimizer_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MinimizerConfig& cfg);
MinimizerConfig load_minimizer_config(const std::filesystem::path& path);

}  // namespace distmin::opt
