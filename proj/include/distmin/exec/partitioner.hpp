#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <typeinfo>

#include "distmin/error.hpp"

namespace distmin::exec {

// Key of a cell (row, col) in a two-dimensional computational grid.
struct CellKey {
  std::int64_t row = 0;
  std::int64_t col = 0;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Platform-independent key hash used by hash partitioning and per-partition
// grouping. std::hash is not used because its values are unspecified.
template <class K>
struct KeyHash;

template <>
struct KeyHash<std::int64_t> {
  std::size_t operator()(std::int64_t k) const { return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(k))); }
};

template <>
struct KeyHash<CellKey> {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(mix64(mix64(static_cast<std::uint64_t>(k.row)) ^ static_cast<std::uint64_t>(k.col)));
  }
};

template <class K>
class Partitioner {
 public:
  virtual ~Partitioner() = default;
  virtual std::size_t num_partitions() const = 0;
  virtual std::size_t partition(const K& key) const = 0;
  virtual bool same_as(const Partitioner& other) const = 0;
  virtual std::string describe() const = 0;
};

template <class K>
using PartitionerPtr = std::shared_ptr<const Partitioner<K>>;

// Vector blocks: block key i lives in partition i.
class BlockPartitioner final : public Partitioner<std::int64_t> {
 public:
  BlockPartitioner(std::size_t num_partitions, std::size_t elements_per_block)
      : num_partitions_(num_partitions), elements_per_block_(elements_per_block) {
    if (num_partitions == 0 || elements_per_block == 0) {
      throw InvalidArgument("BlockPartitioner needs positive partition count and block size");
    }
  }

  std::size_t num_partitions() const override { return num_partitions_; }
  std::size_t elements_per_block() const { return elements_per_block_; }

  std::size_t partition(const std::int64_t& key) const override {
    if (key < 0 || static_cast<std::size_t>(key) >= num_partitions_) {
      throw IndexOutOfRange("block key " + std::to_string(key) + " outside [0, " +
                            std::to_string(num_partitions_) + ")");
    }
    return static_cast<std::size_t>(key);
  }

  bool same_as(const Partitioner<std::int64_t>& other) const override {
    auto* o = dynamic_cast<const BlockPartitioner*>(&other);
    return o != nullptr && o->num_partitions_ == num_partitions_ && o->elements_per_block_ == elements_per_block_;
  }

  std::string describe() const override {
    return "BlockPartitioner(" + std::to_string(num_partitions_) + ", eb=" + std::to_string(elements_per_block_) + ")";
  }

 private:
  std::size_t num_partitions_;
  std::size_t elements_per_block_;
};

// Row-major grid: cell (j, i) lives in partition j * cols + i.
class GridPartitioner final : public Partitioner<CellKey> {
 public:
  GridPartitioner(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw InvalidArgument("GridPartitioner needs positive dimensions");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t num_partitions() const override { return rows_ * cols_; }

  std::size_t partition(const CellKey& key) const override {
    if (key.row < 0 || key.col < 0 || static_cast<std::size_t>(key.row) >= rows_ ||
        static_cast<std::size_t>(key.col) >= cols_) {
      throw IndexOutOfRange("grid cell (" + std::to_string(key.row) + ", " + std::to_string(key.col) +
                            ") outside " + describe());
    }
    return static_cast<std::size_t>(key.row) * cols_ + static_cast<std::size_t>(key.col);
  }

  bool same_as(const Partitioner<CellKey>& other) const override {
    auto* o = dynamic_cast<const GridPartitioner*>(&other);
    return o != nullptr && o->rows_ == rows_ && o->cols_ == cols_;
  }

  std::string describe() const override {
    return "GridPartitioner(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
};

template <class K>
class HashPartitioner final : public Partitioner<K> {
 public:
  explicit HashPartitioner(std::size_t num_partitions) : num_partitions_(num_partitions) {
    if (num_partitions == 0) throw InvalidArgument("HashPartitioner needs at least one partition");
  }

  std::size_t num_partitions() const override { return num_partitions_; }
  std::size_t partition(const K& key) const override { return KeyHash<K>{}(key) % num_partitions_; }

  bool same_as(const Partitioner<K>& other) const override {
    auto* o = dynamic_cast<const HashPartitioner*>(&other);
    return o != nullptr && o->num_partitions_ == num_partitions_;
  }

  std::string describe() const override { return "HashPartitioner(" + std::to_string(num_partitions_) + ")"; }

 private:
  std::size_t num_partitions_;
};

}  // namespace distmin::exec
