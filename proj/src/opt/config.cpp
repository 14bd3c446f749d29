#include "distmin/opt/config.hpp"

#include <fstream>
#include <set>

#include "distmin/error.hpp"

namespace distmin::opt {

using nlohmann::json;

void MinimizerConfig::validate() const {
  if (!(grad_tolerance > 0)) throw InvalidArgument("grad_tolerance must be positive");
  if (!(improvement_tolerance >= 0)) throw InvalidArgument("improvement_tolerance must be non-negative");
  if (improvement_patience == 0) throw InvalidArgument("improvement_patience must be at least 1");
  if (memory == 0) throw InvalidArgument("memory must be at least 1");
  if (!(l1 >= 0) || !(l2 >= 0)) throw InvalidArgument("regularization strengths must be non-negative");
  if (checkpoint_period == 0) throw InvalidArgument("checkpoint_period must be at least 1");
  if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");
  if (!(decay_power >= 0)) throw InvalidArgument("decay_power must be non-negative");
  if (!(adagrad_delta > 0)) throw InvalidArgument("adagrad_delta must be positive");
  if (adagrad_memory == 0) throw InvalidArgument("adagrad_memory must be at least 1");
  if (!(initial_step > 0)) throw InvalidArgument("initial_step must be positive");
  if (!(wolfe.c1 > 0 && wolfe.c1 < wolfe.c2 && wolfe.c2 < 1)) throw InvalidArgument("Wolfe constants need 0 < c1 < c2 < 1");
  if (!(backtracking.shrink > 0 && backtracking.shrink < 1)) throw InvalidArgument("backtracking shrink must lie in (0, 1)");
  if (!(backtracking.c1 > 0 && backtracking.c1 < 1)) throw InvalidArgument("backtracking c1 must lie in (0, 1)");
  if (wolfe.max_evals == 0 || backtracking.max_evals == 0) throw InvalidArgument("line searches need max_evals >= 1");
  if (l1 > 0 && (optimizer == OptimizerKind::Lbfgs || optimizer == OptimizerKind::Sgd)) {
    throw InvalidArgument("l1 regularization requires owlqn or adagrad");
  }
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adagrad: return "adagrad";
    case OptimizerKind::Lbfgs: return "lbfgs";
    case OptimizerKind::Owlqn: return "owlqn";
  }
  return "?";
}

std::string to_string(LineSearchKind kind) {
  return kind == LineSearchKind::StrongWolfe ? "strong_wolfe" : "backtracking";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  for (auto k : {OptimizerKind::Sgd, OptimizerKind::Adagrad, OptimizerKind::Lbfgs, OptimizerKind::Owlqn}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown optimizer '" + name + "'");
}

LineSearchKind parse_line_search_kind(const std::string& name) {
  for (auto k : {LineSearchKind::StrongWolfe, LineSearchKind::Backtracking}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown line search '" + name + "'");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

MinimizerConfig minimizer_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("minimizer config must be a JSON object");
  reject_unknown(j,
                 {"optimizer", "line_search", "max_iterations", "grad_tolerance", "improvement_tolerance",
                  "improvement_patience", "memory", "l1", "l2", "hold_batch", "checkpoint_period", "learning_rate",
                  "decay_power", "adagrad_delta", "adagrad_memory", "wolfe", "backtracking", "initial_step"},
                 "minimizer config");
  MinimizerConfig cfg;
  try {
    if (j.contains("optimizer")) cfg.optimizer = parse_optimizer_kind(j.at("optimizer").get<std::string>());
    if (j.contains("line_search")) cfg.line_search = parse_line_search_kind(j.at("line_search").get<std::string>());
    read(j, "max_iterations", cfg.max_iterations);
    read(j, "grad_tolerance", cfg.grad_tolerance);
    read(j, "improvement_tolerance", cfg.improvement_tolerance);
    read(j, "improvement_patience", cfg.improvement_patience);
    read(j, "memory", cfg.memory);
    read(j, "l1", cfg.l1);
    read(j, "l2", cfg.l2);
    read(j, "hold_batch", cfg.hold_batch);
    read(j, "checkpoint_period", cfg.checkpoint_period);
    read(j, "learning_rate", cfg.learning_rate);
    read(j, "decay_power", cfg.decay_power);
    read(j, "adagrad_delta", cfg.adagrad_delta);
    read(j, "adagrad_memory", cfg.adagrad_memory);
    read(j, "initial_step", cfg.initial_step);
    if (j.contains("wolfe")) {
      const auto& w = j.at("wolfe");
      reject_unknown(w, {"c1", "c2", "max_evals"}, "wolfe config");
      read(w, "c1", cfg.wolfe.c1);
      read(w, "c2", cfg.wolfe.c2);
      read(w, "max_evals", cfg.wolfe.max_evals);
    }
    if (j.contains("backtracking")) {
      const auto& b = j.at("backtracking");
      reject_unknown(b, {"shrink", "c1", "max_evals"}, "backtracking config");
      read(b, "shrink", cfg.backtracking.shrink);
      read(b, "c1", cfg.backtracking.c1);
      read(b, "max_evals", cfg.backtracking.max_evals);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("minimizer config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const MinimizerConfig& cfg) {
  return json{{"optimizer", to_string(cfg.optimizer)},
              {"line_search", to_string(cfg.line_search)},
              {"max_iterations", cfg.max_iterations},
              {"grad_tolerance", cfg.grad_tolerance},
              {"improvement_tolerance", cfg.improvement_tolerance},
              {"improvement_patience", cfg.improvement_patience},
              {"memory", cfg.memory},
              {"l1", cfg.l1},
              {"l2", cfg.l2},
              {"hold_batch", cfg.hold_batch},
              {"checkpoint_period", cfg.checkpoint_period},
              {"learning_rate", cfg.learning_rate},
              {"decay_power", cfg.decay_power},
              {"adagrad_delta", cfg.adagrad_delta},
              {"adagrad_memory", cfg.adagrad_memory},
              {"initial_step", cfg.initial_step},
              {"wolfe", {{"c1", cfg.wolfe.c1}, {"c2", cfg.wolfe.c2}, {"max_evals", cfg.wolfe.max_evals}}},
              {"backtracking",
               {{"shrink", cfg.backtracking.shrink},
                {"c1", cfg.backtracking.c1},
                {"max_evals", cfg.backtracking.max_evals}}}};
}

MinimizerConfig load_minimizer_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open minimizer config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("minimizer config " + path.string() + ": " + e.what());
  }
  return minimizer_config_from_json(j);
}

}  // namespace distmin::opt
