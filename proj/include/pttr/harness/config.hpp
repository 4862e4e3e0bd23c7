#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pttr/harness/synth.hpp"
#include "pttr/harness/train.hpp"
#include "pttr/model.hpp"

namespace pttr {

/// Every knob of a run. Serialized as flat `key=value` lines; `#` starts a
/// comment. Lists are comma-separated.
struct RunConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  DataConfig data;
  TrainConfig train;
  TrackConfig track;

  /// Assigns one field from text. Throws ConfigError on unknown keys or
  /// malformed values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static std::vector<std::string> keys();

  /// Resolves a BEV range / cell pair set in either order and validates the
  /// model configuration.
  void finalize();

  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::optional<std::pair<std::array<double, 6>, double>> pending_bev_;
};

}  // namespace pttr
