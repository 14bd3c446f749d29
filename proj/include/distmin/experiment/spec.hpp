#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "distmin/experiment/generators.hpp"
#include "distmin/opt/config.hpp"
#include "distmin/ot/ot_loss.hpp"

namespace distmin::experiment {

enum class ExperimentKind { L2Regression, Multiclass, OptimalTransport };

std::string to_string(ExperimentKind kind);  // l2regression, multiclass, optimalTransport
ExperimentKind parse_experiment_kind(const std::string& name);

// Declarative description of one run. Sizes are given at scale 1 and
// multiplied by `scale` (dimension, examples, holdout, points); partition
// counts and nnz are not scaled.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::L2Regression;
  std::uint64_t seed = 1;
  double scale = 1;

  std::size_t dimension = 10000;
  std::size_t nnz = 30;
  std::size_t examples_per_batch = 100000;
  std::size_t num_batches = 5;
  std::size_t classes = 10;
  std::size_t holdout_examples = 100000;
  std::size_t data_partitions = 8;
  std::size_t feature_partitions = 8;

  std::size_t points = 500;
  std::size_t point_dimension = 10;
  std::size_t shifted_axes = 4;
  std::size_t point_partitions = 5;
  ot::OtConfig ot;
  std::string cost_cache;  // empty: no on-disk cost cache

  // Line searches use the batch after the gradient's batch.
  bool step_size_batch_distinct = false;
  opt::MinimizerConfig optimizer;

  void validate() const;

  std::size_t scaled(std::size_t n) const;
  SparseParams sparse_params() const;
  MulticlassParams multiclass_params() const;
  OtParams ot_params() const;
  std::size_t feature_block_size() const;
  // Largest divisor of the scaled point count not above
  // ceil(points / point_partitions).
  std::size_t point_block_size() const;
};

// Defaults for each experiment: the desk-scale analogues of the three runs.
ExperimentSpec default_spec(ExperimentKind kind);

// `kind` is required; other keys override default_spec(kind). Unknown keys
// are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::filesystem::path& path);

}  // namespace distmin::experiment
