#include "distmin/model/example.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "distmin/error.hpp"

namespace distmin::model {

Example normalize(Example e) {
  const std::string who = "example " + std::to_string(e.id);
  if (!(e.weight > 0)) throw InvalidArgument(who + ": weight must be positive");
  std::erase_if(e.features, [](const Feature& f) { return f.value == 0; });
  std::stable_sort(e.features.begin(), e.features.end(),
                   [](const Feature& a, const Feature& b) { return a.index < b.index; });
  for (std::size_t k = 0; k < e.features.size(); ++k) {
    if (e.features[k].index < 0) throw InvalidArgument(who + ": negative feature index");
    if (k > 0 && e.features[k].index == e.features[k - 1].index) {
      throw InvalidArgument(who + ": duplicate feature index " + std::to_string(e.features[k].index));
    }
  }
  if (auto* classes = std::get_if<std::vector<ClassTarget>>(&e.label)) {
    if (classes->empty()) throw InvalidArgument(who + ": empty class label");
    for (const auto& t : *classes) {
      if (t.cls < 0) throw InvalidArgument(who + ": negative class");
      if (!(t.weight > 0)) throw InvalidArgument(who + ": class weights must be positive");
    }
  }
  return e;
}

Label class_label(std::int64_t cls) { return std::vector<ClassTarget>{{cls, 1}}; }

ExampleBatch::ExampleBatch(std::vector<Example> examples, std::size_t num_partitions) {
  if (num_partitions == 0) throw InvalidArgument("an example batch needs at least one partition");
  std::unordered_set<std::int64_t> seen;
  seen.reserve(examples.size());
  std::vector<Examples::Element> elems;
  elems.reserve(examples.size());
  for (auto& e : examples) {
    if (!seen.insert(e.id).second) throw InvalidArgument("duplicate example id " + std::to_string(e.id));
    auto n = normalize(std::move(e));
    if (!n.features.empty()) max_feature_ = std::max(max_feature_, n.features.back().index);
    elems.emplace_back(n.id, std::move(n));
  }
  examples_ = Examples::from_elements(std::move(elems),
                                      std::make_shared<exec::HashPartitioner<std::int64_t>>(num_partitions));
}

}  // namespace distmin::model
