#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "distmin/experiment/report.hpp"
#include "distmin/experiment/spec.hpp"
#include "distmin/model/example.hpp"
#include "distmin/opt/minimizer.hpp"

namespace distmin::experiment {

// Generated (or loaded) inputs of one experiment.
struct Dataset {
  ExperimentKind kind = ExperimentKind::L2Regression;
  std::optional<vec::DistVector> truth;
  std::vector<model::ExampleBatch> batches;
  std::vector<model::Example> holdout;
  OtData points;
};

Dataset generate(const ExperimentSpec& spec);

// Batches as DEXB files with a manifest, the true model, the holdout set
// and point clouds as DPTS files, depending on the kind.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_dataset(const ExperimentSpec& spec, const std::filesystem::path& dir);

// Sorted by id.
std::vector<model::Example> batch_examples(const model::ExampleBatch& batch);

struct RunResult {
  RunReport report;
  vec::DistVector x;
};

// Minimizes the experiment's objective from zero. Line-search failures end
// the run and are recorded as its convergence reason.
RunResult run_experiment(const ExperimentSpec& spec, Dataset data, const opt::IterationObserver& observer = {});
inline RunResult run_experiment(const ExperimentSpec& spec, const opt::IterationObserver& observer = {}) {
  return run_experiment(spec, generate(spec), observer);
}

}  // namespace distmin::experiment
