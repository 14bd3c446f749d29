#include "distmin/vec/dist_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace distmin::vec {

using Part = DistVector::Blocks::Partition;

void VectorLayout::validate() const {
  if (length == 0) throw InvalidArgument("vector length must be positive");
  if (block_size == 0) throw InvalidArgument("elements per block must be positive");
  if (rows == 0) throw InvalidArgument("row count must be positive");
}

std::string VectorLayout::describe() const {
  return "(e=" + std::to_string(length) + ", eb=" + std::to_string(block_size) + ", m=" + std::to_string(rows) + ")";
}

std::shared_ptr<const exec::BlockPartitioner> DistVector::partitioner_for(const VectorLayout& layout) {
  return std::make_shared<const exec::BlockPartitioner>(layout.num_blocks(), layout.block_size);
}

DistVector::DistVector(VectorLayout layout, Blocks blocks) : layout_(layout), blocks_(std::move(blocks)) {
  layout_.validate();
  if (blocks_.num_partitions() != layout_.num_blocks()) {
    throw MetadataMismatch("expected " + std::to_string(layout_.num_blocks()) + " partitions for layout " +
                           layout_.describe());
  }
  if (!blocks_.partitioner().same_as(*partitioner_for(layout_))) {
    throw PartitionerMismatch("vector blocks must use " + partitioner_for(layout_)->describe());
  }
  for (std::size_t b = 0; b < layout_.num_blocks(); ++b) {
    const auto& p = blocks_.partition(b);
    if (p.size() != 1 || p.front().first != static_cast<std::int64_t>(b)) {
      throw MetadataMismatch("partition " + std::to_string(b) + " must hold exactly block " + std::to_string(b));
    }
    const Block& blk = p.front().second;
    if (blk.rows != layout_.rows || blk.cols != layout_.block_length(b) || blk.values.size() != blk.rows * blk.cols) {
      throw MetadataMismatch("block " + std::to_string(b) + " has the wrong shape for layout " + layout_.describe());
    }
  }
}

DistVector DistVector::filled(const VectorLayout& layout, Scalar value) {
  return generate(layout, [value](std::size_t, std::size_t) { return value; });
}

DistVector DistVector::from_dense(std::span<const Scalar> values, std::size_t block_size) {
  return from_stacked(values, 1, block_size);
}

DistVector DistVector::from_dense(std::span<const Scalar> values, std::size_t block_size, std::size_t num_partitions) {
  VectorLayout layout{values.size(), block_size, 1};
  layout.validate();
  if (layout.num_blocks() != num_partitions) {
    throw InvalidArgument("a vector of length " + std::to_string(values.size()) + " with eb=" +
                          std::to_string(block_size) + " needs " + std::to_string(layout.num_blocks()) +
                          " partitions, got " + std::to_string(num_partitions));
  }
  return from_dense(values, block_size);
}

DistVector DistVector::from_stacked(std::span<const Scalar> values, std::size_t rows, std::size_t block_size) {
  if (rows == 0 || values.size() % rows != 0) {
    throw InvalidArgument("stacked input size must be a multiple of the row count");
  }
  const std::size_t length = values.size() / rows;
  return generate(VectorLayout{length, block_size, rows},
                  [&](std::size_t r, std::size_t i) { return values[r * length + i]; });
}

std::vector<Scalar> DistVector::to_dense() const {
  std::vector<Scalar> out(layout_.size());
  for (std::size_t b = 0; b < layout_.num_blocks(); ++b) {
    const Block& blk = block(b);
    const std::size_t begin = layout_.block_begin(b);
    for (std::size_t r = 0; r < blk.rows; ++r) {
      std::copy(blk.row(r).begin(), blk.row(r).end(), out.begin() + static_cast<std::ptrdiff_t>(r * layout_.length + begin));
    }
  }
  return out;
}

void DistVector::require_same_layout(const DistVector& other, const char* op) const {
  if (!(layout_ == other.layout_)) {
    throw MetadataMismatch(std::string(op) + ": layout " + layout_.describe() + " vs " + other.layout_.describe());
  }
}

Scalar DistVector::dot(const DistVector& other) const {
  require_same_layout(other, "dot");
  // Per-block partial products, then a tree reduction over blocks.
  auto partial = exec::zip_partitions(blocks_, other.blocks_, [](std::size_t, const Part& a, const Part& b) {
    const auto& x = a.front().second.values;
    const auto& y = b.front().second.values;
    Scalar s = 0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    std::vector<std::pair<std::int64_t, Scalar>> out;
    out.emplace_back(a.front().first, s);
    return out;
  });
  return exec::tree_aggregate(
      partial, Scalar{0}, [](Scalar acc, const auto& e) { return acc + e.second; },
      [](Scalar a, Scalar b) { return a + b; });
}

Scalar DistVector::norm(Scalar p) const {
  if (!(p >= 1)) throw InvalidArgument("norm requires p >= 1, got " + std::to_string(p));
  const Scalar total = exec::tree_aggregate(
      blocks_, Scalar{0},
      [p](Scalar acc, const auto& e) {
        Scalar s = 0;
        if (p == 1) {
          for (Scalar v : e.second.values) s += std::abs(v);
        } else if (p == 2) {
          for (Scalar v : e.second.values) s += v * v;
        } else {
          for (Scalar v : e.second.values) s += std::pow(std::abs(v), p);
        }
        return acc + s;
      },
      [](Scalar a, Scalar b) { return a + b; });
  if (p == 1) return total;
  if (p == 2) return std::sqrt(total);
  return std::pow(total, Scalar{1} / p);
}

Scalar DistVector::sum() const {
  return exec::tree_aggregate(
      blocks_, Scalar{0},
      [](Scalar acc, const auto& e) {
        Scalar s = 0;
        for (Scalar v : e.second.values) s += v;
        return acc + s;
      },
      [](Scalar a, Scalar b) { return a + b; });
}

DistVector DistVector::operator+(const DistVector& other) const {
  return elementwise(other, "+", [](Scalar a, Scalar b) { return a + b; });
}
DistVector DistVector::operator-(const DistVector& other) const {
  return elementwise(other, "-", [](Scalar a, Scalar b) { return a - b; });
}
DistVector DistVector::operator*(const DistVector& other) const {
  return elementwise(other, "*", [](Scalar a, Scalar b) { return a * b; });
}
DistVector DistVector::operator/(const DistVector& other) const {
  return elementwise(other, "/", [](Scalar a, Scalar b) { return a / b; });
}

DistVector DistVector::operator-() const {
  return map([](Scalar a) { return -a; });
}

DistVector DistVector::operator*(Scalar s) const {
  return map([s](Scalar a) { return a * s; });
}

DistVector DistVector::operator+(Scalar s) const {
  return map([s](Scalar a) { return a + s; });
}

DistVector DistVector::add_scaled(const DistVector& direction, Scalar s) const {
  return elementwise(direction, "add_scaled", [s](Scalar a, Scalar d) { return a + s * d; });
}

}  // namespace distmin::vec
