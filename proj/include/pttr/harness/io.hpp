#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pttr/harness/metrics.hpp"
#include "pttr/harness/synth.hpp"

namespace pttr {

/// Text cloud: `PCD <n> <c>` then n lines `x y z [f1..fc]`, 9 significant digits.
void write_pcd(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_pcd(const std::filesystem::path& path);

/// One manifest line: `frame_idx pcd_path cx cy cz w l h yaw`.
struct ManifestRecord {
  int frame_idx = 0;
  std::string pcd_path;
  Box3D box;
};

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Writes `<dir>/<object_id>/frame_XXXX.pcd` plus a manifest per tracklet and
/// `<dir>/index.txt` with one `object_id class_tag manifest` line each.
void save_dataset(const std::vector<TrackletSequence>& seqs, const std::filesystem::path& dir);
std::vector<TrackletSequence> load_dataset(const std::filesystem::path& dir);

struct ResultRow {
  std::string variant;
  std::string class_tag;
  double success = 0.0;
  double precision = 0.0;
  std::size_t frames = 0;
};

/// CSV with header `variant,class,success,precision,frames`.
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Two-column `threshold fraction` file.
void write_curve(const Curve& curve, const std::filesystem::path& path);

}  // namespace pttr
