#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pttr/geom/cloud.hpp"

namespace pttr {

/// Raised when a synthetic tracklet cannot satisfy the frame filter.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synthetic object shapes standing in for car / pedestrian / cyclist.
enum class ShapeKind { BoxCar, LPed, Cross };

std::string class_tag(ShapeKind shape);
ShapeKind shape_from_class_tag(const std::string& tag);
/// Box size (w, l, h) of a shape.
Eigen::Vector3d shape_size(ShapeKind shape);
/// Default surface point count (fewer for smaller objects).
int shape_point_count(ShapeKind shape);
/// Per-class speed multiplier applied to dataset speed ranges.
double shape_speed_scale(ShapeKind shape);

/// `n` surface points of the shape in its object frame (x along length).
Points shape_surface(ShapeKind shape, int n, RandomState& rng);

struct Frame {
  int index = 0;  // position in the unfiltered sequence
  PointCloud scene;
  Box3D gt;
};

struct TrackletSequence {
  std::vector<Frame> frames;
  std::string object_id;
  std::string class_tag;

  std::size_t size() const { return frames.size(); }
};

/// Per-frame motion in the object frame: the center moves by R(yaw) *
/// velocity, then the yaw advances by yaw_rate.
struct Motion {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
};

struct NoiseConfig {
  double jitter_sd = 0.0;
  double dropout_p = 0.0;
  double clutter_rate = 0.0;  // points per cubic meter
};

struct TrackletSpec {
  ShapeKind shape = ShapeKind::BoxCar;
  int n_frames = 20;
  Motion motion;
  NoiseConfig noise;
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  double start_yaw = 0.0;
  int object_points = 0;  // 0 selects the shape default
  double scene_margin = 4.0;
  std::string object_id = "object";
};

inline constexpr int kMinFramePoints = 10;
inline constexpr std::size_t kMinFrames = 3;

/// Rigid object moved by the motion model, with per-frame jitter and dropout
/// plus static uniform clutter inside the scene bounds (clutter falling in
/// the current gt box is removed). The result is filtered.
TrackletSequence generate_tracklet(const TrackletSpec& spec, RandomState& rng);

/// Drops frames with fewer than kMinFramePoints scene points inside the gt
/// box; throws GenerationError if fewer than kMinFrames remain.
TrackletSequence filter_tracklet(TrackletSequence seq);

/// Dataset-level knobs; per-tracklet motion is drawn from these ranges.
struct DataConfig {
  int train_tracklets = 8;
  int test_tracklets = 40;
  int frames = 20;
  std::vector<ShapeKind> classes{ShapeKind::BoxCar};
  double jitter_sd = 0.01;
  double dropout_p = 0.05;
  double clutter_rate = 0.2;
  double speed_min = 0.2;
  double speed_max = 0.8;
  double yaw_rate_max = 0.05;
  double scene_margin = 4.0;
};

/// `count` tracklets, classes cycling through `cfg.classes`; tracklet i uses
/// rng.fork(i). Tracklets that fail the filter are redrawn on the next
/// stream.
std::vector<TrackletSequence> generate_dataset(const DataConfig& cfg, int count, const RandomState& rng,
                                               const std::string& prefix);

}  // namespace pttr
