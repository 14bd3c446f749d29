#include "distmin/model/example_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "distmin/binary_io.hpp"
#include "distmin/error.hpp"

namespace distmin::model {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(trim(s.substr(start, at - start)));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

template <class T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw FormatError(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return value;
}

Scalar parse_scalar(std::string_view s, const char* what) {
  return static_cast<Scalar>(parse_number<double>(s, what));
}

Label parse_label(std::string_view s) {
  if (s.empty() || s.front() != 'k') return parse_scalar(s, "label");
  std::vector<ClassTarget> targets;
  for (auto part : split(s, '|')) {
    if (part.size() < 2 || part.front() != 'k') throw FormatError("bad class label '" + std::string(s) + "'");
    part.remove_prefix(1);
    const std::size_t eq = part.find('=');
    ClassTarget t;
    t.cls = parse_number<std::int64_t>(part.substr(0, eq), "class");
    if (eq != std::string_view::npos) t.weight = parse_scalar(part.substr(eq + 1), "class weight");
    targets.push_back(t);
  }
  return targets;
}

std::string format_scalar(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Example parse_example(std::string_view line) {
  const auto fields = split(line, ',');
  if (fields.size() < 3) throw FormatError("example record needs id, weight and label: '" + std::string(line) + "'");
  Example e;
  e.id = parse_number<std::int64_t>(fields[0], "example id");
  e.weight = parse_scalar(fields[1], "weight");
  e.label = parse_label(fields[2]);
  for (std::size_t k = 3; k < fields.size(); ++k) {
    const auto f = fields[k];
    if (f.empty()) continue;
    if (f.starts_with("link=")) {
      e.link = parse_number<std::int64_t>(f.substr(5), "link");
      continue;
    }
    const std::size_t colon = f.find(':');
    if (colon == std::string_view::npos) throw FormatError("bad feature '" + std::string(f) + "'");
    e.features.push_back(
        {parse_number<std::int64_t>(f.substr(0, colon), "feature index"), parse_scalar(f.substr(colon + 1), "value")});
  }
  try {
    return normalize(std::move(e));
  } catch (const InvalidArgument& err) {
    throw FormatError(err.what());
  }
}

std::string format_example(const Example& e) {
  std::string out = std::to_string(e.id) + "," + format_scalar(e.weight) + ",";
  if (const auto* y = std::get_if<Scalar>(&e.label)) {
    out += format_scalar(*y);
  } else {
    const auto& targets = std::get<std::vector<ClassTarget>>(e.label);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (k > 0) out += "|";
      out += "k" + std::to_string(targets[k].cls);
      if (targets.size() > 1 || targets[k].weight != 1) out += "=" + format_scalar(targets[k].weight);
    }
  }
  if (e.link) out += ",link=" + std::to_string(*e.link);
  for (const auto& f : e.features) out += "," + std::to_string(f.index) + ":" + format_scalar(f.value);
  return out;
}

std::vector<Example> read_text_examples(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(parse_example(t));
    } catch (const FormatError& err) {
      throw FormatError("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return out;
}

void write_text_examples(std::ostream& out, const std::vector<Example>& examples) {
  for (const auto& e : examples) out << format_example(e) << '\n';
  if (!out) throw FormatError("failed writing examples");
}

void write_binary_examples(std::ostream& out, const std::vector<Example>& examples) {
  out.write(kExampleMagic, 4);
  binary::write<std::uint32_t>(out, kExampleFormatVersion);
  binary::write<std::uint32_t>(out, sizeof(double));
  binary::write<std::uint64_t>(out, examples.size());
  for (const auto& e : examples) {
    binary::write<std::int64_t>(out, e.id);
    binary::write<double>(out, e.weight);
    if (const auto* y = std::get_if<Scalar>(&e.label)) {
      binary::write<std::uint8_t>(out, 0);
      binary::write<double>(out, *y);
    } else {
      const auto& targets = std::get<std::vector<ClassTarget>>(e.label);
      binary::write<std::uint8_t>(out, 1);
      binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(targets.size()));
      for (const auto& t : targets) {
        binary::write<std::int64_t>(out, t.cls);
        binary::write<double>(out, t.weight);
      }
    }
    binary::write<std::uint8_t>(out, e.link ? 1 : 0);
    if (e.link) binary::write<std::int64_t>(out, *e.link);
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(e.features.size()));
    for (const auto& f : e.features) {
      binary::write<std::int64_t>(out, f.index);
      binary::write<double>(out, f.value);
    }
  }
  if (!out) throw FormatError("failed writing examples");
}

std::vector<Example> read_binary_examples(std::istream& in) {
  binary::expect_magic(in, kExampleMagic, "example file");
  const auto version = binary::read<std::uint32_t>(in, "version");
  if (version != kExampleFormatVersion) throw FormatError("unsupported example file version " + std::to_string(version));
  if (binary::read<std::uint32_t>(in, "scalar width") != sizeof(double)) throw FormatError("unsupported scalar width");
  const auto count = binary::read<std::uint64_t>(in, "count");
  std::vector<Example> out;
  for (std::uint64_t n = 0; n < count; ++n) {
    Example e;
    e.id = binary::read<std::int64_t>(in, "id");
    e.weight = static_cast<Scalar>(binary::read<double>(in, "weight"));
    const auto tag = binary::read<std::uint8_t>(in, "label tag");
    if (tag == 0) {
      e.label = static_cast<Scalar>(binary::read<double>(in, "label"));
    } else if (tag == 1) {
      std::vector<ClassTarget> targets(binary::read<std::uint32_t>(in, "class count"));
      for (auto& t : targets) {
        t.cls = binary::read<std::int64_t>(in, "class");
        t.weight = static_cast<Scalar>(binary::read<double>(in, "class weight"));
      }
      e.label = std::move(targets);
    } else {
      throw FormatError("bad label tag " + std::to_string(tag));
    }
    const auto has_link = binary::read<std::uint8_t>(in, "link flag");
    if (has_link > 1) throw FormatError("bad link flag");
    if (has_link) e.link = binary::read<std::int64_t>(in, "link");
    e.features.resize(binary::read<std::uint32_t>(in, "feature count"));
    for (auto& f : e.features) {
      f.index = binary::read<std::int64_t>(in, "feature index");
      f.value = static_cast<Scalar>(binary::read<double>(in, "feature value"));
    }
    try {
      out.push_back(normalize(std::move(e)));
    } catch (const InvalidArgument& err) {
      throw FormatError(err.what());
    }
  }
  return out;
}

std::vector<Example> read_examples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char head[4] = {};
  in.read(head, 4);
  const bool binary_file = in.gcount() == 4 && std::equal(head, head + 4, kExampleMagic);
  in.clear();
  in.seekg(0);
  try {
    return binary_file ? read_binary_examples(in) : read_text_examples(in);
  } catch (const FormatError& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

void write_examples(const std::filesystem::path& path, const std::vector<Example>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  if (path.extension() == ".dexb") {
    write_binary_examples(out, examples);
  } else {
    write_text_examples(out, examples);
  }
}

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::filesystem::path p(t);
    out.push_back(p.is_absolute() ? p : path.parent_path() / p);
  }
  if (out.empty()) throw FormatError("manifest " + path.string() + " lists no batches");
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<std::filesystem::path>& batches) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest " + path.string());
  for (const auto& b : batches) out << b.string() << '\n';
}

std::vector<ExampleBatch> load_batches(const std::filesystem::path& manifest, std::size_t num_partitions) {
  std::vector<ExampleBatch> out;
  for (const auto& p : read_manifest(manifest)) out.emplace_back(read_examples(p), num_partitions);
  return out;
}

}  // namespace distmin::model
