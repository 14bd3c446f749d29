#pragma once

#include <string>
#include <vector>

#include "distmin/model/grid.hpp"

namespace distmin::model {

enum class ModelKind { Linear, FactorizationMachine };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

// Linear: one score per model row (1 for scalar tasks, m_C for
// multi-class). FM: a single score and cache = (t_l^k)_k.
struct ScoreEntry {
  std::vector<Scalar> scores;
  std::vector<Scalar> cache;
};

// One entry per example of the batch, keyed by id, partitioned like the
// batch.
using ScoreTable = exec::PartitionedCollection<std::int64_t, ScoreEntry>;

// s^r(e) = sum_i sum_{a in F_i(e)} f_a x^r_a, per row r of x.
ScoreTable linear_score(const vec::DistVector& x, const ComputationalGrid& grid);

// s(e) = 1/2 sum_k (t_l^k)^2 - t_q^k with t_l^k = sum_a f_a x^k_a and
// t_q^k = sum_a (f_a x^k_a)^2, i.e. the sum over unordered feature pairs.
ScoreTable fm_score(const vec::DistVector& x, const ComputationalGrid& grid);

ScoreTable score(ModelKind kind, const vec::DistVector& x, const ComputationalGrid& grid);

}  // namespace distmin::model
