#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "distmin/model/example.hpp"
#include "distmin/ot/point_io.hpp"
#include "distmin/vec/dist_vector.hpp"

namespace distmin::experiment {

// Independent random streams keyed by (seed, purpose, a, b).
enum class Stream : std::uint32_t { Model = 1, Examples = 2, Holdout = 3, Source = 4, Target = 5, Centers = 6 };
std::mt19937_64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0);

struct SparseParams {
  std::size_t dimension = 10000;
  std::size_t nnz = 30;
  std::size_t examples_per_batch = 100000;
  std::size_t num_batches = 5;
  std::size_t data_partitions = 8;
  std::size_t block_size = 1250;
  std::uint64_t seed = 1;
};

// nnz distinct indices drawn uniformly from [0, dimension), sorted, with
// values uniform in [-1, 1].
std::vector<model::Feature> random_features(std::mt19937_64& rng, std::size_t dimension, std::size_t nnz);

struct RegressionData {
  vec::DistVector truth;
  std::vector<model::ExampleBatch> batches;
};

// w_i ~ U[0, 1]; labels y(e) = sum_i f_i(e) w_i exactly.
RegressionData generate_regression(const SparseParams& p);

struct MulticlassParams {
  SparseParams sparse{10000, 100, 100000, 5, 8, 1250, 1};
  std::size_t classes = 10;
  std::size_t holdout_examples = 100000;
};

struct MulticlassData {
  vec::DistVector truth;  // one row per class
  std::vector<model::ExampleBatch> batches;
};

// w^k_i ~ U[0, 1]; the class is drawn with p_k(e) proportional to
// exp(sum_i w^k_i f_i(e)).
MulticlassData generate_multiclass(const MulticlassParams& p);

// Examples [first_id, first_id + count) drawn from `truth` with streams of
// the given purpose; used for training chunks and for the holdout set.
std::vector<model::Example> multiclass_examples(std::span<const Scalar> truth, std::size_t classes,
                                                const SparseParams& p, Stream purpose, std::uint64_t batch,
                                                std::int64_t first_id, std::size_t count);

// Mean of -log p_label(features) under `weights` (rows = classes). With the
// true model this is the Bayes logloss.
double mean_logloss(std::span<const Scalar> weights, std::size_t classes, std::size_t dimension,
                     const std::vector<model::Example>& examples);

struct OtParams {
  std::size_t points = 500;
  std::size_t dimension = 10;
  std::size_t shifted_axes = 4;
  std::uint64_t seed = 1;
};

struct OtData {
  ot::PointCloud source;
  ot::PointCloud target;
  std::vector<std::vector<double>> centers;
};

// Uniform in the ball: Gaussian direction times radius * U^(1/d).
void sample_ball(std::mt19937_64& rng, std::span<const double> center, double radius, std::span<double> out);

// Source uniform in the unit ball. Targets pick one of the 2k centers
// +-1/2 e_i (k axes drawn without replacement) uniformly, then a point
// uniform in the radius-1/2 ball around it.
OtData generate_ot(const OtParams& p);

}  // namespace distmin::experiment
