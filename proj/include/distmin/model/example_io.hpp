#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "distmin/model/example.hpp"

namespace distmin::model {

// Text records, one per line:
//   id,weight,label[,link=ID][,index:value]...
// label is a number, a class "k3", or weighted classes "k1=0.5|k4=0.5".
// Blank lines and lines starting with '#' are skipped.
Example parse_example(std::string_view line);
std::string format_example(const Example& e);

std::vector<Example> read_text_examples(std::istream& in);
void write_text_examples(std::ostream& out, const std::vector<Example>& examples);

// Binary variant with the same fields, little-endian, "DEXB" magic.
inline constexpr char kExampleMagic[4] = {'D', 'E', 'X', 'B'};
inline constexpr std::uint32_t kExampleFormatVersion = 1;

std::vector<Example> read_binary_examples(std::istream& in);
void write_binary_examples(std::ostream& out, const std::vector<Example>& examples);

// Picks the format from the file's leading bytes.
std::vector<Example> read_examples(const std::filesystem::path& path);
// Binary when the extension is ".dexb", text otherwise.
void write_examples(const std::filesystem::path& path, const std::vector<Example>& examples);

// Manifest: one batch file per line, in rotation order, relative paths
// resolved against the manifest's directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<std::filesystem::path>& batches);

std::vector<ExampleBatch> load_batches(const std::filesystem::path& manifest, std::size_t num_partitions);

}  // namespace distmin::model
