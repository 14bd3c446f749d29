#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distmin/error.hpp"
#include "distmin/exec/engine.hpp"
#include "distmin/exec/partitioner.hpp"

namespace distmin::exec {

// An immutable keyed dataset split into partitions. Every element sits in
// the partition its key maps to under the collection's partitioner. Copies
// share storage; persistence flags are shared between copies.
template <class K, class V>
class PartitionedCollection {
 public:
  using key_type = K;
  using mapped_type = V;
  using Element = std::pair<K, V>;
  using Partition = std::vector<Element>;

  PartitionedCollection() = default;

  PartitionedCollection(std::vector<Partition> partitions, PartitionerPtr<K> partitioner, std::size_t lineage_depth = 0)
      : PartitionedCollection(Trusted{}, std::move(partitions), std::move(partitioner), lineage_depth) {
    validate_placement();
  }

  // Routes each element to its partition; within a partition, input order
  // is kept.
  static PartitionedCollection from_elements(std::vector<Element> elements, PartitionerPtr<K> partitioner) {
    std::vector<Partition> parts(partitioner->num_partitions());
    for (auto& e : elements) parts[partitioner->partition(e.first)].push_back(std::move(e));
    return PartitionedCollection(Trusted{}, std::move(parts), std::move(partitioner), 0);
  }

  bool empty_layout() const { return storage_ == nullptr; }
  std::size_t num_partitions() const { return storage_ ? storage_->parts.size() : 0; }
  const Partition& partition(std::size_t i) const { return storage_->parts.at(i); }
  const std::vector<Partition>& partitions() const { return storage_->parts; }
  const Partitioner<K>& partitioner() const { return *partitioner_; }
  const PartitionerPtr<K>& partitioner_ptr() const { return partitioner_; }
  std::size_t lineage_depth() const { return lineage_depth_; }

  std::size_t count() const {
    std::size_t n = 0;
    if (storage_) {
      for (const auto& p : storage_->parts) n += p.size();
    }
    return n;
  }

  // All elements in (partition, within-partition) order.
  std::vector<Element> collect() const {
    std::vector<Element> out;
    out.reserve(count());
    if (storage_) {
      for (const auto& p : storage_->parts) out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  bool is_persisted() const { return storage_ && storage_->persisted.load(); }

  void persist() const {
    if (!storage_) return;
    storage_->persisted.store(true);
    Engine::global().note_persist();
  }

  void unpersist() const {
    if (!storage_) return;
    if (storage_->persisted.exchange(false)) Engine::global().note_unpersist();
  }

  // Materialized copy with the recomputation history truncated.
  PartitionedCollection checkpoint() const {
    Engine::global().note_checkpoint();
    PartitionedCollection out = *this;
    out.lineage_depth_ = 0;
    return out;
  }

  // Internal constructor for operations that already place elements
  // correctly.
  struct Trusted {};
  PartitionedCollection(Trusted, std::vector<Partition> partitions, PartitionerPtr<K> partitioner,
                        std::size_t lineage_depth)
      : storage_(std::make_shared<Storage>()), partitioner_(std::move(partitioner)), lineage_depth_(lineage_depth) {
    if (!partitioner_) throw InvalidArgument("collection requires a partitioner");
    if (partitions.size() != partitioner_->num_partitions()) {
      throw PartitionerMismatch("partition count " + std::to_string(partitions.size()) + " does not match " +
                                partitioner_->describe());
    }
    storage_->parts = std::move(partitions);
  }

 private:
  struct Storage {
    std::vector<Partition> parts;
    std::atomic<bool> persisted{false};
  };

  void validate_placement() const {
    for (std::size_t i = 0; i < storage_->parts.size(); ++i) {
      for (const auto& e : storage_->parts[i]) {
        if (partitioner_->partition(e.first) != i) {
          throw PartitionerMismatch("element placed in partition " + std::to_string(i) + " but " +
                                    partitioner_->describe() + " assigns it elsewhere");
        }
      }
    }
  }

  std::shared_ptr<Storage> storage_;
  PartitionerPtr<K> partitioner_;
  std::size_t lineage_depth_ = 0;
};

namespace detail {

template <class F, class Part>
using PartitionFnResult = std::invoke_result_t<F, std::size_t, const Part&>;

template <class Out>
using OutKey = typename Out::value_type::first_type;

template <class Out>
using OutValue = typename Out::value_type::second_type;

// Routes per-source outputs to target partitions, preserving
// (source partition, emission order).
template <class K, class V>
std::vector<std::vector<std::pair<K, V>>> shuffle(std::vector<std::vector<std::pair<K, V>>> sources,
                                                  const Partitioner<K>& target) {
  const std::size_t n_src = sources.size();
  const std::size_t n_dst = target.num_partitions();
  std::vector<std::vector<std::vector<std::pair<K, V>>>> buckets(n_src);
  Engine::global().parallel_for(n_src, [&](std::size_t s) {
    auto& b = buckets[s];
    b.resize(n_dst);
    for (auto& e : sources[s]) b[target.partition(e.first)].push_back(std::move(e));
    sources[s].clear();
  });
  std::vector<std::vector<std::pair<K, V>>> out(n_dst);
  Engine::global().parallel_for(n_dst, [&](std::size_t t) {
    std::size_t total = 0;
    for (std::size_t s = 0; s < n_src; ++s) total += buckets[s][t].size();
    out[t].reserve(total);
    for (std::size_t s = 0; s < n_src; ++s) {
      for (auto& e : buckets[s][t]) out[t].push_back(std::move(e));
    }
  });
  return out;
}

}  // namespace detail

// Partition i of the output is f(i, partition i of c). f must keep every key
// in its partition; the partitioner is carried over.
template <class K, class V, class F>
auto map_partitions(const PartitionedCollection<K, V>& c, F&& f) {
  using Out = detail::PartitionFnResult<F, typename PartitionedCollection<K, V>::Partition>;
  using V2 = detail::OutValue<Out>;
  static_assert(std::is_same_v<detail::OutKey<Out>, K>, "map_partitions must keep the key type");
  std::vector<typename PartitionedCollection<K, V2>::Partition> parts(c.num_partitions());
  Engine::global().parallel_for(c.num_partitions(), [&](std::size_t i) { parts[i] = f(i, c.partition(i)); });
  return PartitionedCollection<K, V2>(typename PartitionedCollection<K, V2>::Trusted{}, std::move(parts),
                                      c.partitioner_ptr(), c.lineage_depth() + 1);
}

// Element-wise value transform: f(key, value) -> new value.
template <class K, class V, class F>
auto map_values(const PartitionedCollection<K, V>& c, F&& f) {
  using V2 = std::decay_t<std::invoke_result_t<F, const K&, const V&>>;
  return map_partitions(c, [&](std::size_t, const typename PartitionedCollection<K, V>::Partition& part) {
    std::vector<std::pair<K, V2>> out;
    out.reserve(part.size());
    for (const auto& [k, v] : part) out.emplace_back(k, f(k, v));
    return out;
  });
}

// Runs f on each partition, then routes the emitted (key, value) pairs to
// the partitions chosen by `target`.
template <class K, class V, class F, class K2>
auto flat_map_to(const PartitionedCollection<K, V>& c, F&& f, PartitionerPtr<K2> target) {
  using Out = detail::PartitionFnResult<F, typename PartitionedCollection<K, V>::Partition>;
  using V2 = detail::OutValue<Out>;
  static_assert(std::is_same_v<detail::OutKey<Out>, K2>, "emitted key type must match the target partitioner");
  std::vector<std::vector<std::pair<K2, V2>>> sources(c.num_partitions());
  Engine::global().parallel_for(c.num_partitions(), [&](std::size_t i) { sources[i] = f(i, c.partition(i)); });
  auto parts = detail::shuffle(std::move(sources), *target);
  return PartitionedCollection<K2, V2>(typename PartitionedCollection<K2, V2>::Trusted{}, std::move(parts),
                                       std::move(target), c.lineage_depth() + 1);
}

// Moves elements under a new partitioner.
template <class K, class V>
PartitionedCollection<K, V> partition_by(const PartitionedCollection<K, V>& c, PartitionerPtr<K> target) {
  return flat_map_to(
      c, [](std::size_t, const typename PartitionedCollection<K, V>::Partition& p) { return p; }, std::move(target));
}

template <class K, class A, class B, class F>
auto zip_partitions(const PartitionedCollection<K, A>& a, const PartitionedCollection<K, B>& b, F&& f) {
  using PA = typename PartitionedCollection<K, A>::Partition;
  using PB = typename PartitionedCollection<K, B>::Partition;
  using Out = std::invoke_result_t<F, std::size_t, const PA&, const PB&>;
  using V2 = detail::OutValue<Out>;
  static_assert(std::is_same_v<detail::OutKey<Out>, K>, "zip_partitions must keep the key type");
  if (a.num_partitions() != b.num_partitions() || !a.partitioner().same_as(b.partitioner())) {
    throw PartitionerMismatch("zip of " + a.partitioner().describe() + " with " + b.partitioner().describe());
  }
  std::vector<std::vector<std::pair<K, V2>>> parts(a.num_partitions());
  Engine::global().parallel_for(a.num_partitions(),
                                [&](std::size_t i) { parts[i] = f(i, a.partition(i), b.partition(i)); });
  return PartitionedCollection<K, V2>(typename PartitionedCollection<K, V2>::Trusted{}, std::move(parts),
                                      a.partitioner_ptr(), std::max(a.lineage_depth(), b.lineage_depth()) + 1);
}

namespace detail {

template <class P, class... Ps>
void require_copartitioned(const char* op, const P& first, const Ps&... rest) {
  auto check = [&](const auto& other) {
    if (first.num_partitions() != other.num_partitions() || !first.partitioner().same_as(other.partitioner())) {
      throw PartitionerMismatch(std::string(op) + " of " + first.partitioner().describe() + " with " +
                                other.partitioner().describe());
    }
  };
  (check(rest), ...);
}

}  // namespace detail

// Runs f(i, a_i, b_i) on co-partitioned inputs and routes the emitted pairs
// to `target`.
template <class K, class A, class B, class F, class K2>
auto zip_flat_map_to(const PartitionedCollection<K, A>& a, const PartitionedCollection<K, B>& b, F&& f,
                     PartitionerPtr<K2> target) {
  using PA = typename PartitionedCollection<K, A>::Partition;
  using PB = typename PartitionedCollection<K, B>::Partition;
  using Out = std::invoke_result_t<F, std::size_t, const PA&, const PB&>;
  using V2 = detail::OutValue<Out>;
  detail::require_copartitioned("zip_flat_map_to", a, b);
  std::vector<std::vector<std::pair<K2, V2>>> sources(a.num_partitions());
  Engine::global().parallel_for(a.num_partitions(),
                                [&](std::size_t i) { sources[i] = f(i, a.partition(i), b.partition(i)); });
  auto parts = detail::shuffle(std::move(sources), *target);
  return PartitionedCollection<K2, V2>(typename PartitionedCollection<K2, V2>::Trusted{}, std::move(parts),
                                       std::move(target), std::max(a.lineage_depth(), b.lineage_depth()) + 1);
}

// Three-way variant of zip_flat_map_to.
template <class K, class A, class B, class C, class F, class K2>
auto zip3_flat_map_to(const PartitionedCollection<K, A>& a, const PartitionedCollection<K, B>& b,
                      const PartitionedCollection<K, C>& c, F&& f, PartitionerPtr<K2> target) {
  using PA = typename PartitionedCollection<K, A>::Partition;
  using PB = typename PartitionedCollection<K, B>::Partition;
  using PC = typename PartitionedCollection<K, C>::Partition;
  using Out = std::invoke_result_t<F, std::size_t, const PA&, const PB&, const PC&>;
  using V2 = detail::OutValue<Out>;
  detail::require_copartitioned("zip3_flat_map_to", a, b, c);
  std::vector<std::vector<std::pair<K2, V2>>> sources(a.num_partitions());
  Engine::global().parallel_for(a.num_partitions(), [&](std::size_t i) {
    sources[i] = f(i, a.partition(i), b.partition(i), c.partition(i));
  });
  auto parts = detail::shuffle(std::move(sources), *target);
  const std::size_t depth = std::max({a.lineage_depth(), b.lineage_depth(), c.lineage_depth()});
  return PartitionedCollection<K2, V2>(typename PartitionedCollection<K2, V2>::Trusted{}, std::move(parts),
                                       std::move(target), depth + 1);
}

// One element per distinct key. Values are folded in (source partition,
// insertion order); output keys appear in first-seen order.
template <class K, class V, class Combine>
PartitionedCollection<K, V> reduce_by_key(const PartitionedCollection<K, V>& c, Combine&& combine,
                                          PartitionerPtr<K> target = nullptr) {
  if (!target) target = c.partitioner_ptr();
  std::vector<std::vector<std::pair<K, V>>> sources(c.partitions().begin(), c.partitions().end());
  auto shuffled = detail::shuffle(std::move(sources), *target);
  std::vector<std::vector<std::pair<K, V>>> parts(shuffled.size());
  Engine::global().parallel_for(shuffled.size(), [&](std::size_t t) {
    std::unordered_map<K, std::size_t, KeyHash<K>> slot;
    auto& out = parts[t];
    for (auto& [k, v] : shuffled[t]) {
      auto [it, inserted] = slot.try_emplace(k, out.size());
      if (inserted) {
        out.emplace_back(k, std::move(v));
      } else {
        auto& acc = out[it->second].second;
        acc = combine(std::move(acc), v);
      }
    }
  });
  return PartitionedCollection<K, V>(typename PartitionedCollection<K, V>::Trusted{}, std::move(parts),
                                     std::move(target), c.lineage_depth() + 1);
}

// Inner join of co-partitioned collections; output order follows `a`.
template <class K, class A, class B>
PartitionedCollection<K, std::pair<A, B>> join(const PartitionedCollection<K, A>& a,
                                               const PartitionedCollection<K, B>& b) {
  using PA = typename PartitionedCollection<K, A>::Partition;
  using PB = typename PartitionedCollection<K, B>::Partition;
  return zip_partitions(a, b, [](std::size_t, const PA& pa, const PB& pb) {
    std::unordered_multimap<K, std::size_t, KeyHash<K>> index;
    index.reserve(pb.size());
    for (std::size_t i = 0; i < pb.size(); ++i) index.emplace(pb[i].first, i);
    std::vector<std::pair<K, std::pair<A, B>>> out;
    out.reserve(pa.size());
    for (const auto& [k, va] : pa) {
      auto [lo, hi] = index.equal_range(k);
      std::vector<std::size_t> hits;
      for (auto it = lo; it != hi; ++it) hits.push_back(it->second);
      std::sort(hits.begin(), hits.end());
      for (std::size_t h : hits) out.emplace_back(k, std::pair<A, B>(va, pb[h].second));
    }
    return out;
  });
}

// Fan-in of each combine level for `n` partials under the given depth.
inline std::size_t tree_fan_in(std::size_t n, std::size_t depth) {
  if (n <= 1 || depth <= 1) return std::max<std::size_t>(2, n);
  const double root = std::ceil(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(depth)));
  return std::max<std::size_t>(2, static_cast<std::size_t>(root));
}

// Folds every element. Partition partials come from seq_op; they are
// combined in a tree whose shape depends only on (partition count, depth).
template <class K, class V, class A, class SeqOp, class CombOp>
A tree_aggregate(const PartitionedCollection<K, V>& c, const A& zero, SeqOp&& seq_op, CombOp&& comb_op,
                 std::size_t depth = 0) {
  if (depth == 0) depth = Engine::global().config().tree_depth;
  const std::size_t n = c.num_partitions();
  std::vector<A> partials(n, zero);
  Engine::global().parallel_for(n, [&](std::size_t i) {
    A acc = zero;
    for (const auto& e : c.partition(i)) acc = seq_op(std::move(acc), e);
    partials[i] = std::move(acc);
  });
  const std::size_t fan_in = tree_fan_in(n, depth);
  for (std::size_t level = 1; level < depth && partials.size() > fan_in; ++level) {
    const std::size_t groups = (partials.size() + fan_in - 1) / fan_in;
    std::vector<A> next(groups, zero);
    Engine::global().parallel_for(groups, [&](std::size_t g) {
      const std::size_t lo = g * fan_in;
      const std::size_t hi = std::min(partials.size(), lo + fan_in);
      A acc = partials[lo];
      for (std::size_t i = lo + 1; i < hi; ++i) acc = comb_op(std::move(acc), partials[i]);
      next[g] = std::move(acc);
    });
    partials = std::move(next);
  }
  A acc = zero;
  for (auto& p : partials) acc = comb_op(std::move(acc), p);
  return acc;
}

}  // namespace distmin::exec
