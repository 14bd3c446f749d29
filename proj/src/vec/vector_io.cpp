#include "distmin/vec/vector_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "distmin/binary_io.hpp"

namespace distmin::vec {

void write_vector(std::ostream& out, const DistVector& v) {
  out.write(kVectorMagic, 4);
  binary::write<std::uint32_t>(out, kVectorFormatVersion);
  binary::write<std::uint32_t>(out, kScalarWidth);
  binary::write<std::uint64_t>(out, v.length());
  binary::write<std::uint64_t>(out, v.block_size());
  binary::write<std::uint64_t>(out, v.rows());
  for (std::size_t b = 0; b < v.num_blocks(); ++b) {
    for (Scalar x : v.block(b).values) binary::write<Scalar>(out, x);
  }
  if (!out) throw FormatError("failed writing vector dump");
}

DistVector read_vector(std::istream& in) {
  binary::expect_magic(in, kVectorMagic, "vector dump");
  const auto version = binary::read<std::uint32_t>(in, "version");
  if (version != kVectorFormatVersion) throw FormatError("unsupported vector dump version " + std::to_string(version));
  const auto width = binary::read<std::uint32_t>(in, "scalar width");
  if (width != 4 && width != 8) throw FormatError("unsupported scalar width " + std::to_string(width));
  VectorLayout layout;
  layout.length = binary::read<std::uint64_t>(in, "length");
  layout.block_size = binary::read<std::uint64_t>(in, "block size");
  layout.rows = binary::read<std::uint64_t>(in, "rows");
  try {
    layout.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("vector dump header: ") + e.what());
  }
  std::vector<DistVector::Blocks::Partition> parts(layout.num_blocks());
  for (std::size_t b = 0; b < layout.num_blocks(); ++b) {
    Block blk(layout.rows, layout.block_length(b));
    for (auto& x : blk.values) {
      x = width == 8 ? static_cast<Scalar>(binary::read<double>(in, "block value"))
                     : static_cast<Scalar>(binary::read<float>(in, "block value"));
    }
    parts[b].emplace_back(static_cast<std::int64_t>(b), std::move(blk));
  }
  return DistVector(layout, DistVector::Blocks(std::move(parts), DistVector::partitioner_for(layout)));
}

void save_vector(const std::filesystem::path& path, const DistVector& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_vector(out, v);
}

DistVector load_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_vector(in);
}

}  // namespace distmin::vec
