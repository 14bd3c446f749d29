#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "distmin/exec/collection.hpp"
#include "distmin/scalar.hpp"

namespace distmin::model {

struct Feature {
  std::int64_t index = 0;
  Scalar value = 0;
  friend bool operator==(const Feature&, const Feature&) = default;
};

struct ClassTarget {
  std::int64_t cls = 0;
  Scalar weight = 1;
  friend bool operator==(const ClassTarget&, const ClassTarget&) = default;
};

// Scalar targets (regression, +-1 classification) or weighted class sets.
using Label = std::variant<Scalar, std::vector<ClassTarget>>;

struct Example {
  std::int64_t id = 0;
  Scalar weight = 1;
  Label label = Scalar{0};
  std::vector<Feature> features;  // sorted by index, values non-zero
  std::optional<std::int64_t> link;

  friend bool operator==(const Example&, const Example&) = default;
};

// Drops zero-valued features, sorts by index and validates: weight > 0,
// non-negative indices, no duplicate index, class weights > 0.
Example normalize(Example e);

Label class_label(std::int64_t cls);

// Examples hash-partitioned by id into data partitions D_0 .. D_{m_E - 1}.
class ExampleBatch {
 public:
  using Examples = exec::PartitionedCollection<std::int64_t, Example>;

  ExampleBatch() = default;
  // Normalizes every example; duplicate ids are rejected.
  ExampleBatch(std::vector<Example> examples, std::size_t num_partitions);

  const Examples& examples() const { return examples_; }
  std::size_t num_partitions() const { return examples_.num_partitions(); }
  std::size_t size() const { return examples_.count(); }
  std::int64_t max_feature_index() const { return max_feature_; }
  const exec::PartitionerPtr<std::int64_t>& partitioner() const { return examples_.partitioner_ptr(); }

 private:
  Examples examples_;
  std::int64_t max_feature_ = -1;
};

}  // namespace distmin::model
