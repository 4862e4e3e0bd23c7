#include "pttr/harness/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "pttr/errors.hpp"

namespace pttr {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw StateError("cannot write " + path.string());
  out << std::setprecision(9);
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot read " + path.string());
  return in;
}

[[noreturn]] void parse_error(const fs::path& path, std::size_t line, const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void write_pcd(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out = open_out(path);
  const Index c = cloud.features.cols();
  out << "PCD " << cloud.size() << ' ' << c << '\n';
  for (Index i = 0; i < cloud.size(); ++i) {
    out << cloud.points(i, 0) << ' ' << cloud.points(i, 1) << ' ' << cloud.points(i, 2);
    for (Index j = 0; j < c; ++j) out << ' ' << cloud.features(i, j);
    out << '\n';
  }
}

PointCloud read_pcd(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string tag;
  long n = -1, c = -1;
  if (!(in >> tag >> n >> c) || tag != "PCD" || n < 0 || c < 0) parse_error(path, 1, "expected 'PCD <n> <c>'");
  Points pts(n, 3);
  FeatureRows feats(n, c);
  for (long i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      if (!(in >> pts(i, a))) parse_error(path, static_cast<std::size_t>(i) + 2, "truncated point row");
    }
    for (long j = 0; j < c; ++j) {
      if (!(in >> feats(i, j))) parse_error(path, static_cast<std::size_t>(i) + 2, "truncated feature row");
    }
  }
  return PointCloud(std::move(pts), std::move(feats));
}

void write_manifest(const std::vector<ManifestRecord>& records, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& r : records) {
    const auto& c = r.box.center();
    const auto& s = r.box.size();
    out << r.frame_idx << ' ' << r.pcd_path << ' ' << c.x() << ' ' << c.y() << ' ' << c.z() << ' ' << s.x() << ' '
        << s.y() << ' ' << s.z() << ' ' << r.box.yaw() << '\n';
  }
}

std::vector<ManifestRecord> read_manifest(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<ManifestRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestRecord r;
    Eigen::Vector3d c, s;
    double yaw = 0.0;
    if (!(ss >> r.frame_idx >> r.pcd_path >> c.x() >> c.y() >> c.z() >> s.x() >> s.y() >> s.z() >> yaw)) {
      parse_error(path, lineno, "expected 'frame_idx pcd_path cx cy cz w l h yaw'");
    }
    r.box = Box3D(c, s, yaw);
    out.push_back(std::move(r));
  }
  return out;
}

void save_dataset(const std::vector<TrackletSequence>& seqs, const fs::path& dir) {
  std::ofstream index = open_out(dir / "index.txt");
  for (const auto& seq : seqs) {
    const fs::path sub = dir / seq.object_id;
    fs::create_directories(sub);
    std::vector<ManifestRecord> records;
    for (const auto& f : seq.frames) {
      std::ostringstream name;
      name << "frame_" << std::setw(4) << std::setfill('0') << f.index << ".pcd";
      write_pcd(f.scene, sub / name.str());
      records.push_back({f.index, name.str(), f.gt});
    }
    write_manifest(records, sub / "manifest.txt");
    index << seq.object_id << ' ' << seq.class_tag << ' ' << (fs::path(seq.object_id) / "manifest.txt").string()
          << '\n';
  }
}

std::vector<TrackletSequence> load_dataset(const fs::path& dir) {
  std::ifstream in = open_in(dir / "index.txt");
  std::vector<TrackletSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    TrackletSequence seq;
    std::string manifest;
    if (!(ss >> seq.object_id >> seq.class_tag >> manifest)) {
      parse_error(dir / "index.txt", lineno, "expected 'object_id class_tag manifest'");
    }
    const fs::path mpath = dir / manifest;
    for (const auto& r : read_manifest(mpath)) {
      seq.frames.push_back({r.frame_idx, read_pcd(mpath.parent_path() / r.pcd_path), r.box});
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "variant,class,success,precision,frames\n" << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << r.variant << ',' << r.class_tag << ',' << r.success << ',' << r.precision << ',' << r.frames << '\n';
  }
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "variant,class,success,precision,frames") {
    parse_error(path, 1, "unexpected results header");
  }
  std::vector<ResultRow> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) parse_error(path, lineno, "expected 5 columns");
    try {
      out.push_back({cells[0], cells[1], std::stod(cells[2]), std::stod(cells[3]), std::stoul(cells[4])});
    } catch (const std::exception&) {
      parse_error(path, lineno, "malformed number");
    }
  }
  return out;
}

void write_curve(const Curve& curve, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& [t, frac] : curve) out << t << ' ' << frac << '\n';
}

}  // namespace pttr
