#include "pttr/harness/train.hpp"

#include <fstream>
#include <iomanip>

#include "pttr/harness/io.hpp"

namespace pttr {

std::optional<TrainingSample> make_training_pair(const TrackletSequence& seq, std::size_t t, const TrackConfig& track,
                                                 double distort_range, RandomState& rng) {
  if (t == 0 || t >= seq.frames.size()) throw ValidationError("make_training_pair: frame index out of range");
  const Frame& prev = seq.frames[t - 1];
  const Frame& cur = seq.frames[t];
  const Box3D ref = distort_box(prev.gt, rng, distort_range);
  const PointCloud templ = crop_to_box(prev.scene, ref, track.extend_ratio);
  const PointCloud search = make_search_region(cur.scene, ref, track.search_margin);
  if (templ.empty() || search.empty()) return std::nullopt;
  TrainingSample s;
  s.input = TrackInput{ref.to_local(templ.points), ref.to_local(search.points), ref.size()};
  s.gt = box_in_frame(cur.gt, ref);
  s.ref = Box3D(Eigen::Vector3d::Zero(), ref.size(), 0.0);
  s.frame = t;
  return s;
}

void dump_batch(const std::vector<TrainingSample>& batch, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "batch.txt");
  summary << std::setprecision(9);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = batch[i];
    const std::string stem = "sample_" + std::to_string(i);
    write_pcd(PointCloud(s.input.templ), dir / (stem + "_template.pcd"));
    write_pcd(PointCloud(s.input.search), dir / (stem + "_search.pcd"));
    const auto& c = s.gt.center();
    summary << stem << " sequence=" << s.sequence << " frame=" << s.frame << " gt=" << c.x() << ',' << c.y() << ','
            << c.z() << ',' << s.gt.yaw() << '\n';
  }
}

}  // namespace pttr
