#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "distmin/error.hpp"
#include "distmin/exec/collection.hpp"
#include "distmin/scalar.hpp"

namespace distmin::vec {

// Dense rows x cols block, row-major.
struct Block {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Scalar> values;

  Block() = default;
  Block(std::size_t r, std::size_t c, Scalar fill = Scalar{0}) : rows(r), cols(c), values(r * c, fill) {}

  Scalar& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  Scalar operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<Scalar> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const Scalar> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  friend bool operator==(const Block&, const Block&) = default;
};

// Shape of a distributed vector: `rows` stacked vectors of `length`
// elements, split column-wise into blocks of `block_size` (the last block
// may be short). Global element (r, i*block_size + j) lives in block i at
// (r, j).
struct VectorLayout {
  std::size_t length = 0;
  std::size_t block_size = 1;
  std::size_t rows = 1;

  std::size_t num_blocks() const { return (length + block_size - 1) / block_size; }
  std::size_t block_begin(std::size_t b) const { return b * block_size; }
  std::size_t block_length(std::size_t b) const {
    const std::size_t begin = block_begin(b);
    return begin + block_size <= length ? block_size : length - begin;
  }
  std::size_t size() const { return length * rows; }

  void validate() const;
  std::string describe() const;
  friend bool operator==(const VectorLayout&, const VectorLayout&) = default;
};

// Block-partitioned vector with one block per partition. With rows() == 1
// this is the plain distributed dense vector; with rows() > 1 it holds
// stacked vectors sharing the column partitioning. Values are immutable;
// every operation returns a new vector with the same layout.
class DistVector {
 public:
  using Blocks = exec::PartitionedCollection<std::int64_t, Block>;

  DistVector() = default;
  DistVector(VectorLayout layout, Blocks blocks);

  static std::shared_ptr<const exec::BlockPartitioner> partitioner_for(const VectorLayout& layout);

  static DistVector zeros(const VectorLayout& layout) { return filled(layout, Scalar{0}); }
  static DistVector filled(const VectorLayout& layout, Scalar value);
  static DistVector from_dense(std::span<const Scalar> values, std::size_t block_size);
  static DistVector from_dense(std::span<const Scalar> values, std::size_t block_size, std::size_t num_partitions);
  // `values` holds `rows` consecutive vectors of equal length.
  static DistVector from_stacked(std::span<const Scalar> values, std::size_t rows, std::size_t block_size);

  // Element (r, i) = f(r, i), built block-parallel.
  template <class F>
  static DistVector generate(const VectorLayout& layout, F&& f);

  // Row-major rows() x length() copy of all values.
  std::vector<Scalar> to_dense() const;

  const VectorLayout& layout() const { return layout_; }
  std::size_t length() const { return layout_.length; }
  std::size_t rows() const { return layout_.rows; }
  std::size_t block_size() const { return layout_.block_size; }
  std::size_t num_blocks() const { return layout_.num_blocks(); }
  bool is_stacked() const { return layout_.rows > 1; }
  bool valid() const { return !blocks_.empty_layout(); }
  const Blocks& blocks() const { return blocks_; }
  const Block& block(std::size_t b) const { return blocks_.partition(b).front().second; }

  Scalar dot(const DistVector& other) const;
  // (sum |x|^p)^(1/p); p >= 1.
  Scalar norm(Scalar p = 2) const;
  Scalar sum() const;

  // Component k of the result is f(k, this[k], other[k]) where k is the
  // flattened index row * length() + column.
  template <class F>
  DistVector keyed_pair_wise(const DistVector& other, F&& f) const;

  template <class F>
  DistVector map(F&& f) const;

  // Block-level zip: f(block index, this block, other block) -> block.
  template <class F>
  DistVector zip_blocks(const DistVector& other, F&& f) const;

  DistVector operator+(const DistVector& other) const;
  DistVector operator-(const DistVector& other) const;
  DistVector operator*(const DistVector& other) const;
  DistVector operator/(const DistVector& other) const;
  DistVector operator-() const;
  DistVector operator*(Scalar s) const;
  friend DistVector operator*(Scalar s, const DistVector& v) { return v * s; }
  DistVector operator+(Scalar s) const;

  // this + s * direction, in one pass.
  DistVector add_scaled(const DistVector& direction, Scalar s) const;

  void persist() const { blocks_.persist(); }
  void unpersist() const { blocks_.unpersist(); }
  bool is_persisted() const { return blocks_.is_persisted(); }
  DistVector interrupt_lineage() const { return DistVector(layout_, blocks_.checkpoint(), Unchecked{}); }
  std::size_t lineage_depth() const { return blocks_.lineage_depth(); }
  std::size_t count() const { return blocks_.count(); }

  void require_same_layout(const DistVector& other, const char* op) const;

 private:
  struct Unchecked {};
  DistVector(VectorLayout layout, Blocks blocks, Unchecked) : layout_(layout), blocks_(std::move(blocks)) {}

  template <class Op>
  DistVector elementwise(const DistVector& other, const char* name, Op op) const;

  VectorLayout layout_;
  Blocks blocks_;
};

template <class F>
DistVector DistVector::generate(const VectorLayout& layout, F&& f) {
  layout.validate();
  const std::size_t nb = layout.num_blocks();
  std::vector<Blocks::Partition> parts(nb);
  exec::Engine::global().parallel_for(nb, [&](std::size_t b) {
    const std::size_t len = layout.block_length(b);
    const std::size_t begin = layout.block_begin(b);
    Block blk(layout.rows, len);
    for (std::size_t r = 0; r < layout.rows; ++r) {
      for (std::size_t j = 0; j < len; ++j) blk(r, j) = f(r, begin + j);
    }
    parts[b].emplace_back(static_cast<std::int64_t>(b), std::move(blk));
  });
  return DistVector(layout, Blocks(Blocks::Trusted{}, std::move(parts), partitioner_for(layout), 0), Unchecked{});
}

template <class F>
DistVector DistVector::zip_blocks(const DistVector& other, F&& f) const {
  require_same_layout(other, "zip_blocks");
  using Part = Blocks::Partition;
  auto out = exec::zip_partitions(blocks_, other.blocks_, [&](std::size_t, const Part& a, const Part& b) {
    Part res;
    res.emplace_back(a.front().first, f(static_cast<std::size_t>(a.front().first), a.front().second, b.front().second));
    return res;
  });
  return DistVector(layout_, std::move(out), Unchecked{});
}

template <class F>
DistVector DistVector::keyed_pair_wise(const DistVector& other, F&& f) const {
  const std::size_t length = layout_.length;
  const std::size_t eb = layout_.block_size;
  return zip_blocks(other, [&](std::size_t b, const Block& x, const Block& y) {
    Block out(x.rows, x.cols);
    for (std::size_t r = 0; r < x.rows; ++r) {
      const std::int64_t base = static_cast<std::int64_t>(r * length + b * eb);
      for (std::size_t j = 0; j < x.cols; ++j) {
        out(r, j) = f(base + static_cast<std::int64_t>(j), x(r, j), y(r, j));
      }
    }
    return out;
  });
}

template <class F>
DistVector DistVector::map(F&& f) const {
  using Part = Blocks::Partition;
  auto out = exec::map_partitions(blocks_, [&](std::size_t, const Part& p) {
    Part res;
    Block blk = p.front().second;
    for (auto& v : blk.values) v = f(v);
    res.emplace_back(p.front().first, std::move(blk));
    return res;
  });
  return DistVector(layout_, std::move(out), Unchecked{});
}

template <class Op>
DistVector DistVector::elementwise(const DistVector& other, const char* name, Op op) const {
  require_same_layout(other, name);
  return zip_blocks(other, [&](std::size_t, const Block& x, const Block& y) {
    Block out(x.rows, x.cols);
    for (std::size_t k = 0; k < x.values.size(); ++k) out.values[k] = op(x.values[k], y.values[k]);
    return out;
  });
}

}  // namespace distmin::vec
