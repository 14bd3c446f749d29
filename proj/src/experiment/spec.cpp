#include "distmin/experiment/spec.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "distmin/error.hpp"

namespace distmin::experiment {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::L2Regression: return "l2regression";
    case ExperimentKind::Multiclass: return "multiclass";
    case ExperimentKind::OptimalTransport: return "optimalTransport";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::L2Regression, ExperimentKind::Multiclass, ExperimentKind::OptimalTransport}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

void ExperimentSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("experiment spec: " + what);
  };
  require(std::isfinite(scale) && scale > 0, "scale must be positive");
  optimizer.validate();
  if (kind == ExperimentKind::OptimalTransport) {
    require(points > 0 && point_dimension > 0, "points and point_dimension must be positive");
    require(shifted_axes > 0 && shifted_axes <= point_dimension, "shifted_axes must lie in [1, point_dimension]");
    require(point_partitions > 0, "point_partitions must be positive");
    require(ot.epsilon > 0 && ot.exponent_cap > 0, "epsilon and exponent_cap must be positive");
    return;
  }
  require(dimension > 0 && examples_per_batch > 0 && num_batches > 0, "sizes must be positive");
  require(nnz > 0 && nnz <= scaled(dimension), "nnz must lie in [1, dimension]");
  require(data_partitions > 0 && feature_partitions > 0, "partition counts must be positive");
  if (kind == ExperimentKind::Multiclass) require(classes >= 2, "classes must be at least 2");
}

std::size_t ExperimentSpec::scaled(std::size_t n) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
}

std::size_t ExperimentSpec::feature_block_size() const {
  const std::size_t d = scaled(dimension);
  return (d + feature_partitions - 1) / feature_partitions;
}

std::size_t ExperimentSpec::point_block_size() const {
  const std::size_t n = scaled(points);
  std::size_t eb = (n + point_partitions - 1) / point_partitions;
  while (n % eb != 0) --eb;
  return eb;
}

SparseParams ExperimentSpec::sparse_params() const {
  return {scaled(dimension), nnz, scaled(examples_per_batch), num_batches, data_partitions, feature_block_size(), seed};
}

MulticlassParams ExperimentSpec::multiclass_params() const {
  return {sparse_params(), classes, holdout_examples == 0 ? 0 : scaled(holdout_examples)};
}

OtParams ExperimentSpec::ot_params() const { return {scaled(points), point_dimension, shifted_axes, seed}; }

ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.optimizer.hold_batch = true;
  switch (kind) {
    case ExperimentKind::L2Regression:
      s.optimizer.max_iterations = 15;
      s.optimizer.grad_tolerance = 1e-9;
      break;
    case ExperimentKind::Multiclass:
      s.nnz = 100;
      s.optimizer.max_iterations = 10;
      s.optimizer.grad_tolerance = 1e-8;
      break;
    case ExperimentKind::OptimalTransport:
      s.optimizer.max_iterations = 20;
      s.optimizer.grad_tolerance = 0.5e-4;
      break;
  }
  return s;
}

namespace {

const std::set<std::string> kKeys = {"kind", "seed", "scale", "dimension", "nnz", "examples_per_batch",
                                      "num_batches", "classes", "holdout_examples", "data_partitions",
                                      "feature_partitions", "points", "point_dimension", "shifted_axes",
                                      "point_partitions", "epsilon", "exponent_cap", "cost_cache",
                                      "step_size_batch_distinct", "optimizer"};

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment spec must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKeys.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in experiment spec");
  }
  if (!j.contains("kind")) throw InvalidArgument("experiment spec needs a 'kind'");
  ExperimentSpec s;
  try {
    s = default_spec(parse_experiment_kind(j.at("kind").get<std::string>()));
    read(j, "seed", s.seed);
    read(j, "scale", s.scale);
    read(j, "dimension", s.dimension);
    read(j, "nnz", s.nnz);
    read(j, "examples_per_batch", s.examples_per_batch);
    read(j, "num_batches", s.num_batches);
    read(j, "classes", s.classes);
    read(j, "holdout_examples", s.holdout_examples);
    read(j, "data_partitions", s.data_partitions);
    read(j, "feature_partitions", s.feature_partitions);
    read(j, "points", s.points);
    read(j, "point_dimension", s.point_dimension);
    read(j, "shifted_axes", s.shifted_axes);
    read(j, "point_partitions", s.point_partitions);
    read(j, "epsilon", s.ot.epsilon);
    read(j, "exponent_cap", s.ot.exponent_cap);
    read(j, "cost_cache", s.cost_cache);
    read(j, "step_size_batch_distinct", s.step_size_batch_distinct);
    if (j.contains("optimizer")) {
      if (!j.at("optimizer").is_object()) throw InvalidArgument("optimizer must be a JSON object");
      json merged = opt::to_json(s.optimizer);
      merged.merge_patch(j.at("optimizer"));
      s.optimizer = opt::minimizer_config_from_json(merged);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("experiment spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const ExperimentSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"seed", s.seed},
              {"scale", s.scale},
              {"dimension", s.dimension},
              {"nnz", s.nnz},
              {"examples_per_batch", s.examples_per_batch},
              {"num_batches", s.num_batches},
              {"classes", s.classes},
              {"holdout_examples", s.holdout_examples},
              {"data_partitions", s.data_partitions},
              {"feature_partitions", s.feature_partitions},
              {"points", s.points},
              {"point_dimension", s.point_dimension},
              {"shifted_axes", s.shifted_axes},
              {"point_partitions", s.point_partitions},
              {"epsilon", s.ot.epsilon},
              {"exponent_cap", s.ot.exponent_cap},
              {"cost_cache", s.cost_cache},
              {"step_size_batch_distinct", s.step_size_batch_distinct},
              {"optimizer", opt::to_json(s.optimizer)}};
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open experiment spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace distmin::experiment
