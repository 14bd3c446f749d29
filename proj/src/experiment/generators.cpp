#include "distmin/experiment/generators.hpp"

#include <algorithm>
#include <cmath>

#include "distmin/error.hpp"
#include "distmin/exec/engine.hpp"
#include "distmin/model/loss.hpp"

namespace distmin::experiment {

namespace {

constexpr std::size_t kChunk = 4096;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

void validate(const SparseParams& p) {
  require(p.dimension > 0, "dimension must be positive");
  require(p.nnz > 0 && p.nnz <= p.dimension, "nnz must lie in [1, dimension]");
  require(p.examples_per_batch > 0, "examples_per_batch must be positive");
  require(p.num_batches > 0, "num_batches must be positive");
  require(p.data_partitions > 0, "data_partitions must be positive");
  require(p.block_size > 0, "block_size must be positive");
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Generates `count` examples in parallel, chunk c drawing from its own
// stream so that the result does not depend on scheduling.
template <class F>
std::vector<model::Example> chunked(std::uint64_t seed, Stream purpose, std::uint64_t batch, std::int64_t first_id,
                                    std::size_t count, F&& make) {
  std::vector<model::Example> out(count);
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  exec::Engine::global().parallel_for(chunks, [&](std::size_t c) {
    auto rng = make_stream(seed, purpose, batch, c);
    const std::size_t end = std::min(count, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      out[i] = make(rng);
      out[i].id = first_id + static_cast<std::int64_t>(i);
    }
  });
  return out;
}

double dot(std::span<const Scalar> w, const std::vector<model::Feature>& f) {
  double s = 0;
  for (const auto& x : f) s += x.value * w[static_cast<std::size_t>(x.index)];
  return s;
}

void class_scores(std::span<const Scalar> truth, std::size_t classes, std::size_t dimension,
                  const std::vector<model::Feature>& f, std::vector<Scalar>& scores) {
  scores.assign(classes, 0);
  for (std::size_t k = 0; k < classes; ++k) scores[k] = dot(truth.subspan(k * dimension, dimension), f);
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, Stream purpose, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<model::Feature> random_features(std::mt19937_64& rng, std::size_t dimension, std::size_t nnz) {
  std::uniform_int_distribution<std::int64_t> pick(0, static_cast<std::int64_t>(dimension) - 1);
  std::vector<std::int64_t> idx;
  idx.reserve(nnz);
  while (idx.size() < nnz) {
    const auto i = pick(rng);
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<model::Feature> out;
  out.reserve(nnz);
  for (auto i : idx) {
    double v = 0;
    while (v == 0) v = uniform(rng, -1, 1);
    out.push_back({i, v});
  }
  return out;
}

RegressionData generate_regression(const SparseParams& p) {
  validate(p);
  std::vector<Scalar> w(p.dimension);
  auto rng = make_stream(p.seed, Stream::Model);
  for (auto& x : w) x = uniform(rng, 0, 1);

  RegressionData out;
  out.truth = vec::DistVector::from_dense(w, p.block_size);
  for (std::size_t b = 0; b < p.num_batches; ++b) {
    auto examples = chunked(p.seed, Stream::Examples, b, static_cast<std::int64_t>(b * p.examples_per_batch),
                            p.examples_per_batch, [&](std::mt19937_64& r) {
                              model::Example e;
                              e.features = random_features(r, p.dimension, p.nnz);
                              e.label = dot(w, e.features);
                              return e;
                            });
    out.batches.emplace_back(std::move(examples), p.data_partitions);
  }
  return out;
}

std::vector<model::Example> multiclass_examples(std::span<const Scalar> truth, std::size_t classes,
                                                const SparseParams& p, Stream purpose, std::uint64_t batch,
                                                std::int64_t first_id, std::size_t count) {
  validate(p);
  require(classes >= 2, "multiclass data needs at least two classes");
  require(truth.size() == classes * p.dimension, "true model size must be classes * dimension");
  return chunked(p.seed, purpose, batch, first_id, count, [&](std::mt19937_64& r) {
    model::Example e;
    e.features = random_features(r, p.dimension, p.nnz);
    std::vector<Scalar> s;
    class_scores(truth, classes, p.dimension, e.features, s);
    const auto prob = model::softmax(s);
    const double u = uniform(r, 0, 1);
    std::size_t k = 0;
    double acc = prob[0];
    while (k + 1 < classes && u >= acc) acc += prob[++k];
    e.label = model::class_label(static_cast<std::int64_t>(k));
    return e;
  });
}

MulticlassData generate_multiclass(const MulticlassParams& p) {
  const auto& sp = p.sparse;
  validate(sp);
  require(p.classes >= 2, "multiclass data needs at least two classes");
  std::vector<Scalar> w(p.classes * sp.dimension);
  auto rng = make_stream(sp.seed, Stream::Model);
  for (auto& x : w) x = uniform(rng, 0, 1);

  MulticlassData out;
  out.truth = vec::DistVector::from_stacked(w, p.classes, sp.block_size);
  for (std::size_t b = 0; b < sp.num_batches; ++b) {
    out.batches.emplace_back(multiclass_examples(w, p.classes, sp, Stream::Examples, b,
                                                 static_cast<std::int64_t>(b * sp.examples_per_batch),
                                                 sp.examples_per_batch),
                             sp.data_partitions);
  }
  return out;
}

double mean_logloss(std::span<const Scalar> weights, std::size_t classes, std::size_t dimension,
                     const std::vector<model::Example>& examples) {
  require(!examples.empty(), "mean_logloss needs examples");
  require(weights.size() == classes * dimension, "model size must be classes * dimension");
  double total = 0;
  std::vector<Scalar> s;
  for (const auto& e : examples) {
    class_scores(weights, classes, dimension, e.features, s);
    total += model::example_loss({model::LossKind::Softmax}, s, e.label).value;
  }
  return total / static_cast<double>(examples.size());
}

void sample_ball(std::mt19937_64& rng, std::span<const double> center, double radius, std::span<double> out) {
  std::normal_distribution<double> normal;
  const std::size_t d = out.size();
  double norm = 0;
  while (norm == 0) {
    norm = 0;
    for (auto& x : out) {
      x = normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  const double r = radius * std::pow(uniform(rng, 0, 1), 1.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) out[i] = center[i] + r * out[i] / norm;
}

OtData generate_ot(const OtParams& p) {
  require(p.points > 0, "points must be positive");
  require(p.dimension > 0, "point dimension must be positive");
  require(p.shifted_axes > 0 && p.shifted_axes <= p.dimension, "shifted_axes must lie in [1, dimension]");

  OtData out;
  auto crng = make_stream(p.seed, Stream::Centers);
  std::vector<std::size_t> axes(p.dimension);
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  for (std::size_t i = 0; i < p.shifted_axes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, p.dimension - 1);
    std::swap(axes[i], axes[pick(crng)]);
  }
  for (std::size_t i = 0; i < p.shifted_axes; ++i) {
    for (double sign : {0.5, -0.5}) {
      std::vector<double> c(p.dimension, 0.0);
      c[axes[i]] = sign;
      out.centers.push_back(std::move(c));
    }
  }

  const std::vector<double> origin(p.dimension, 0.0);
  out.source = {p.dimension, std::vector<double>(p.points * p.dimension)};
  out.target = {p.dimension, std::vector<double>(p.points * p.dimension)};
  auto srng = make_stream(p.seed, Stream::Source);
  auto trng = make_stream(p.seed, Stream::Target);
  std::uniform_int_distribution<std::size_t> which(0, out.centers.size() - 1);
  for (std::size_t i = 0; i < p.points; ++i) {
    sample_ball(srng, origin, 1.0, std::span<double>(out.source.coords).subspan(i * p.dimension, p.dimension));
    const auto& c = out.centers[which(trng)];
    sample_ball(trng, c, 0.5, std::span<double>(out.target.coords).subspan(i * p.dimension, p.dimension));
  }
  return out;
}

}  // namespace distmin::experiment
