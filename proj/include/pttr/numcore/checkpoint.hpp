#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pttr/numcore/tensor.hpp"

namespace pttr {

/// Checkpoint layout: `<stem>.manifest` holds one `name RxC offset` line per
/// parameter (offset in bytes into the blob), `<stem>.bin` holds the values as
/// little-endian 32-bit floats in manifest order.
struct CheckpointPaths {
  std::filesystem::path manifest;
  std::filesystem::path blob;

  static CheckpointPaths from_stem(const std::filesystem::path& stem) {
    return {std::filesystem::path(stem.string() + ".manifest"),
            std::filesystem::path(stem.string() + ".bin")};
  }
};

template <typename Scalar>
void save_checkpoint(const ParameterList<Scalar>& params, const std::filesystem::path& stem) {
  const auto paths = CheckpointPaths::from_stem(stem);
  std::ofstream manifest(paths.manifest);
  std::ofstream blob(paths.blob, std::ios::binary);
  if (!manifest || !blob) throw StateError("cannot open checkpoint for writing: " + stem.string());
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    const auto& v = p.tensor().value();
    manifest << p.name() << ' ' << v.rows() << 'x' << v.cols() << ' ' << offset << '\n';
    for (Index i = 0; i < v.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v.data()[i]));
      const char bytes[4] = {static_cast<char>(bits & 0xffU), static_cast<char>((bits >> 8) & 0xffU),
                             static_cast<char>((bits >> 16) & 0xffU),
                             static_cast<char>((bits >> 24) & 0xffU)};
      blob.write(bytes, 4);
    }
    offset += static_cast<std::uint64_t>(v.size()) * 4;
  }
  if (!manifest || !blob) throw StateError("failed writing checkpoint: " + stem.string());
}

/// Loads values into `params` by name. Every parameter must be present with
/// a matching shape.
template <typename Scalar>
void load_checkpoint(ParameterList<Scalar>& params, const std::filesystem::path& stem) {
  const auto paths = CheckpointPaths::from_stem(stem);
  std::ifstream manifest(paths.manifest);
  std::ifstream blob(paths.blob, std::ios::binary);
  if (!manifest || !blob) throw StateError("cannot open checkpoint: " + stem.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  struct Record {
    Index rows, cols;
    std::uint64_t offset;
  };
  std::vector<std::pair<std::string, Record>> records;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string name, shape;
    std::uint64_t offset = 0;
    if (!(in >> name >> shape >> offset)) throw StateError("malformed manifest line: " + line);
    const auto x = shape.find('x');
    if (x == std::string::npos) throw StateError("malformed shape in manifest: " + shape);
    records.push_back({name, Record{std::stoll(shape.substr(0, x)), std::stoll(shape.substr(x + 1)), offset}});
  }

  for (auto& p : params) {
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const auto& r) { return r.first == p.name(); });
    if (it == records.end()) throw StateError("checkpoint lacks parameter '" + p.name() + "'");
    const Record& r = it->second;
    auto& v = p.tensor().mutable_value();
    if (r.rows != v.rows() || r.cols != v.cols()) {
      throw StateError("checkpoint shape mismatch for '" + p.name() + "'");
    }
    if (r.offset + static_cast<std::uint64_t>(v.size()) * 4 > bytes.size()) {
      throw StateError("checkpoint blob truncated at '" + p.name() + "'");
    }
    for (Index i = 0; i < v.size(); ++i) {
      const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + r.offset + static_cast<std::uint64_t>(i) * 4);
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      v.data()[i] = static_cast<Scalar>(std::bit_cast<float>(bits));
    }
  }
}

}  // namespace pttr
