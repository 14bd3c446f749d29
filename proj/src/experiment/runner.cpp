#include "distmin/experiment/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "distmin/error.hpp"
#include "distmin/model/example_io.hpp"
#include "distmin/model/objective.hpp"
#include "distmin/ot/ot_loss.hpp"
#include "distmin/ot/point_io.hpp"
#include "distmin/vec/vector_io.hpp"

namespace distmin::experiment {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "batches.manifest";
constexpr const char* kTruth = "truth.dvec";
constexpr const char* kHoldout = "holdout.dexb";
constexpr const char* kSource = "source.dpts";
constexpr const char* kTarget = "target.dpts";

bool sparse_kind(ExperimentKind k) { return k != ExperimentKind::OptimalTransport; }

std::int64_t holdout_first_id(const SparseParams& p) {
  return static_cast<std::int64_t>(p.num_batches * p.examples_per_batch);
}

double max_marginal_error(const ot::Marginals& m) {
  double err = 0;
  for (double r : m.rows) err = std::max(err, std::abs(r - 1.0 / static_cast<double>(m.rows.size())));
  for (double c : m.cols) err = std::max(err, std::abs(c - 1.0 / static_cast<double>(m.cols.size())));
  return err;
}

}  // namespace

Dataset generate(const ExperimentSpec& spec) {
  spec.validate();
  Dataset d;
  d.kind = spec.kind;
  switch (spec.kind) {
    case ExperimentKind::L2Regression: {
      auto g = generate_regression(spec.sparse_params());
      d.truth = std::move(g.truth);
      d.batches = std::move(g.batches);
      break;
    }
    case ExperimentKind::Multiclass: {
      const auto p = spec.multiclass_params();
      auto g = generate_multiclass(p);
      if (p.holdout_examples > 0) {
        const auto w = g.truth.to_dense();
        d.holdout = multiclass_examples(w, p.classes, p.sparse, Stream::Holdout, 0, holdout_first_id(p.sparse),
                                        p.holdout_examples);
      }
      d.truth = std::move(g.truth);
      d.batches = std::move(g.batches);
      break;
    }
    case ExperimentKind::OptimalTransport:
      d.points = generate_ot(spec.ot_params());
      break;
  }
  return d;
}

std::vector<model::Example> batch_examples(const model::ExampleBatch& batch) {
  std::vector<model::Example> out;
  out.reserve(batch.size());
  for (auto& [id, e] : batch.examples().collect()) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

void write_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  if (!sparse_kind(data.kind)) {
    ot::write_points(dir / kSource, data.points.source);
    ot::write_points(dir / kTarget, data.points.target);
    return;
  }
  std::vector<fs::path> files;
  for (std::size_t b = 0; b < data.batches.size(); ++b) {
    char name[32];
    std::snprintf(name, sizeof name, "batch_%03zu.dexb", b);
    model::write_examples(dir / name, batch_examples(data.batches[b]));
    files.push_back(dir / name);
  }
  model::write_manifest(dir / kManifest, files);
  if (data.truth) vec::save_vector(dir / kTruth, *data.truth);
  if (!data.holdout.empty()) model::write_examples(dir / kHoldout, data.holdout);
}

Dataset read_dataset(const ExperimentSpec& spec, const fs::path& dir) {
  spec.validate();
  Dataset d;
  d.kind = spec.kind;
  if (!sparse_kind(spec.kind)) {
    d.points.source = ot::read_points(dir / kSource);
    d.points.target = ot::read_points(dir / kTarget);
    return d;
  }
  d.batches = model::load_batches(dir / kManifest, spec.data_partitions);
  if (fs::exists(dir / kTruth)) d.truth = vec::load_vector(dir / kTruth);
  if (fs::exists(dir / kHoldout)) d.holdout = model::read_examples(dir / kHoldout);
  return d;
}

RunResult run_experiment(const ExperimentSpec& spec, Dataset data, const opt::IterationObserver& observer) {
  spec.validate();
  if (data.kind != spec.kind) throw InvalidArgument("dataset kind does not match the experiment spec");
  const auto start = std::chrono::steady_clock::now();

  RunResult result;
  auto& report = result.report;
  report.config = to_json(spec);
  const auto record = [&](const opt::IterationRecord& r) {
    report.records.push_back(r);
    if (observer) observer(r);
  };

  opt::MinimizerState state;
  if (sparse_kind(spec.kind)) {
    const bool multiclass = spec.kind == ExperimentKind::Multiclass;
    std::int64_t max_index = -1;
    for (const auto& b : data.batches) max_index = std::max(max_index, b.max_feature_index());
    const std::size_t dim = std::max(spec.scaled(spec.dimension), static_cast<std::size_t>(max_index + 1));
    const vec::VectorLayout layout{dim, (dim + spec.feature_partitions - 1) / spec.feature_partitions,
                                   multiclass ? spec.classes : 1};
    const model::LossSpec loss{multiclass ? model::LossKind::Softmax : model::LossKind::L2};
    const auto policy = spec.step_size_batch_distinct ? opt::HoldPolicy::NextBatch : opt::HoldPolicy::SameBatch;
    report.metrics["batches"] = static_cast<double>(data.batches.size());
    model::ModelObjective f(model::ModelKind::Linear, loss, layout, std::move(data.batches), policy);
    data.batches.clear();
    state = opt::minimize(f, vec::DistVector::zeros(layout), spec.optimizer, record);

    if (data.truth && data.truth->layout() == layout) {
      report.metrics["model_error"] = (state.x - *data.truth).norm() / data.truth->norm();
    }
    if (multiclass && !data.holdout.empty()) {
      report.metrics["holdout_logloss"] = mean_logloss(state.x.to_dense(), spec.classes, dim, data.holdout);
      if (data.truth && data.truth->layout() == layout) {
        report.metrics["bayes_logloss"] = mean_logloss(data.truth->to_dense(), spec.classes, dim, data.holdout);
      }
    }
  } else {
    const std::size_t eb = spec.point_block_size();
    auto grid = spec.cost_cache.empty()
                    ? ot::build_cost_grid(data.points.source, data.points.target, eb)
                    : ot::cached_cost_grid(data.points.source, data.points.target, eb, spec.cost_cache);
    ot::OtObjective f(std::move(grid), spec.ot);
    state = opt::minimize(f, vec::DistVector::zeros(f.layout()), spec.optimizer, record);
    report.metrics["saturated_exponentials"] = static_cast<double>(f.saturated_total());
    report.metrics["evaluations"] = static_cast<double>(f.evaluations());
    report.metrics["marginal_error"] = max_marginal_error(ot::plan_marginals(state.x, f.grid(), spec.ot));
  }

  report.reason = state.convergence.value_or(opt::ConvergenceReason{});
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.x = std::move(state.x);
  return result;
}

}  // namespace distmin::experiment
