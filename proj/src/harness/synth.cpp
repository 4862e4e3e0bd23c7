#include "pttr/harness/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "pttr/errors.hpp"

namespace pttr {

namespace {

// Axis-aligned part of a shape in the object frame.
struct Part {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;

  bool strictly_inside(const Eigen::Vector3d& p) const {
    return (p.array() > lo.array() + 1e-9).all() && (p.array() < hi.array() - 1e-9).all();
  }
};

// Parts use (x: length, y: width, z: height) and stay within the shape box.
std::vector<Part> shape_parts(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::BoxCar:
      // Body plus a cabin set toward the rear.
      return {{{-2.0, -0.9, -0.75}, {2.0, 0.9, 0.15}}, {{-1.6, -0.8, 0.15}, {0.5, 0.8, 0.75}}};
    case ShapeKind::LPed:
      return {{{-0.45, -0.3, -0.85}, {-0.05, 0.3, 0.85}}, {{-0.05, -0.2, -0.85}, {0.45, 0.2, -0.55}}};
    case ShapeKind::Cross:
      return {{{-0.9, -0.1, -0.8}, {0.9, 0.1, -0.2}}, {{-0.3, -0.3, -0.2}, {0.2, 0.3, 0.8}}};
  }
  throw ValidationError("unknown shape");
}

}  // namespace

std::string class_tag(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::BoxCar: return "car";
    case ShapeKind::LPed: return "pedestrian";
    case ShapeKind::Cross: return "cyclist";
  }
  return "?";
}

ShapeKind shape_from_class_tag(const std::string& tag) {
  if (tag == "car") return ShapeKind::BoxCar;
  if (tag == "pedestrian") return ShapeKind::LPed;
  if (tag == "cyclist") return ShapeKind::Cross;
  throw ConfigError("unknown class '" + tag + "'");
}

Eigen::Vector3d shape_size(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::BoxCar: return {1.8, 4.0, 1.5};
    case ShapeKind::LPed: return {0.6, 0.9, 1.7};
    case ShapeKind::Cross: return {0.6, 1.8, 1.6};
  }
  throw ValidationError("unknown shape");
}

int shape_point_count(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::BoxCar: return 320;
    case ShapeKind::LPed: return 120;
    case ShapeKind::Cross: return 180;
  }
  return 120;
}

double shape_speed_scale(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::BoxCar: return 1.0;
    case ShapeKind::LPed: return 0.3;
    case ShapeKind::Cross: return 0.6;
  }
  return 1.0;
}

Points shape_surface(ShapeKind shape, int n, RandomState& rng) {
  if (n < 1) throw ValidationError("shape_surface: point count must be positive");
  const auto parts = shape_parts(shape);
  // Faces of every part except the bottom, weighted by area.
  struct Face {
    std::size_t part;
    int axis;
    bool upper;
    double area;
  };
  std::vector<Face> faces;
  double total = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Eigen::Vector3d d = parts[i].hi - parts[i].lo;
    for (int axis = 0; axis < 3; ++axis) {
      const double area = d[(axis + 1) % 3] * d[(axis + 2) % 3];
      for (bool upper : {false, true}) {
        if (axis == 2 && !upper) continue;
        faces.push_back({i, axis, upper, area});
        total += area;
      }
    }
  }
  Points out(n, 3);
  int filled = 0;
  while (filled < n) {
    double pick = rng.uniform(0.0, total);
    std::size_t f = 0;
    while (f + 1 < faces.size() && pick > faces[f].area) pick -= faces[f++].area;
    const Face& face = faces[f];
    const Part& part = parts[face.part];
    Eigen::Vector3d p;
    for (int a = 0; a < 3; ++a) p[a] = rng.uniform(part.lo[a], part.hi[a]);
    p[face.axis] = face.upper ? part.hi[face.axis] : part.lo[face.axis];
    bool hidden = false;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (j != face.part && parts[j].strictly_inside(p)) hidden = true;
    }
    if (hidden) continue;
    out.row(filled++) = p.transpose();
  }
  return out;
}

TrackletSequence filter_tracklet(TrackletSequence seq) {
  std::vector<Frame> kept;
  for (auto& f : seq.frames) {
    if (static_cast<int>(points_in_box(f.scene.points, f.gt).size()) >= kMinFramePoints) kept.push_back(std::move(f));
  }
  if (kept.size() < kMinFrames) {
    throw GenerationError("tracklet '" + seq.object_id + "' keeps " + std::to_string(kept.size()) +
                          " frames after filtering (need " + std::to_string(kMinFrames) +
                          "); lower dropout or raise the object point count");
  }
  seq.frames = std::move(kept);
  return seq;
}

TrackletSequence generate_tracklet(const TrackletSpec& spec, RandomState& rng) {
  if (spec.n_frames < static_cast<int>(kMinFrames)) throw ValidationError("generate_tracklet: n_frames must be >= 3");
  if (spec.noise.dropout_p < 0.0 || spec.noise.dropout_p > 1.0) throw ValidationError("dropout_p must be in [0, 1]");
  if (spec.noise.jitter_sd < 0.0 || spec.noise.clutter_rate < 0.0) throw ValidationError("noise must be non-negative");
  const Eigen::Vector3d size = shape_size(spec.shape);
  const int n_obj = spec.object_points > 0 ? spec.object_points : shape_point_count(spec.shape);
  const Points body = shape_surface(spec.shape, n_obj, rng);

  std::vector<Box3D> boxes;
  Eigen::Vector3d center = spec.start;
  double yaw = spec.start_yaw;
  for (int t = 0; t < spec.n_frames; ++t) {
    boxes.emplace_back(center, size, yaw);
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Eigen::Vector3d& v = spec.motion.velocity;
    center += Eigen::Vector3d(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
    yaw = wrap_angle(yaw + spec.motion.yaw_rate);
  }

  // Static clutter over the trajectory's bounds.
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  const double reach = 0.5 * size.head<2>().norm();
  for (const auto& b : boxes) {
    lo = lo.cwiseMin(b.center() - Eigen::Vector3d(reach, reach, 0.5 * size.z()));
    hi = hi.cwiseMax(b.center() + Eigen::Vector3d(reach, reach, 0.5 * size.z()));
  }
  lo -= Eigen::Vector3d(spec.scene_margin, spec.scene_margin, 0.5);
  hi += Eigen::Vector3d(spec.scene_margin, spec.scene_margin, 1.0);
  const double volume = (hi - lo).prod();
  const int n_clutter = spec.noise.clutter_rate > 0.0 ? rng.poisson(spec.noise.clutter_rate * volume) : 0;
  Points clutter(n_clutter, 3);
  for (int i = 0; i < n_clutter; ++i) {
    for (int a = 0; a < 3; ++a) clutter(i, a) = rng.uniform(lo[a], hi[a]);
  }

  TrackletSequence seq;
  seq.object_id = spec.object_id;
  seq.class_tag = class_tag(spec.shape);
  for (int t = 0; t < spec.n_frames; ++t) {
    const Box3D& box = boxes[static_cast<std::size_t>(t)];
    std::vector<Eigen::Vector3d> pts;
    for (Index i = 0; i < body.rows(); ++i) {
      if (spec.noise.dropout_p > 0.0 && rng.bernoulli(spec.noise.dropout_p)) continue;
      Eigen::Vector3d p = box.to_world(Eigen::Vector3d(body.row(i)));
      if (spec.noise.jitter_sd > 0.0) {
        for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, spec.noise.jitter_sd);
      }
      pts.push_back(p);
    }
    for (Index i = 0; i < clutter.rows(); ++i) {
      const Eigen::Vector3d p(clutter.row(i));
      if (!box.contains(p)) pts.push_back(p);
    }
    Points scene(static_cast<Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) scene.row(static_cast<Index>(i)) = pts[i].transpose();
    seq.frames.push_back({t, PointCloud(std::move(scene)), box});
  }
  return filter_tracklet(std::move(seq));
}

std::vector<TrackletSequence> generate_dataset(const DataConfig& cfg, int count, const RandomState& rng,
                                               const std::string& prefix) {
  if (cfg.classes.empty()) throw ConfigError("data.classes must not be empty");
  if (cfg.speed_max < cfg.speed_min) throw ConfigError("data.speed_max must be >= data.speed_min");
  std::vector<TrackletSequence> out;
  constexpr int kAttempts = 16;
  for (int i = 0; i < count; ++i) {
    const ShapeKind shape = cfg.classes[static_cast<std::size_t>(i) % cfg.classes.size()];
    for (int attempt = 0;; ++attempt) {
      RandomState r = rng.fork(static_cast<std::uint64_t>(i) * kAttempts + static_cast<std::uint64_t>(attempt));
      TrackletSpec spec;
      spec.shape = shape;
      spec.n_frames = cfg.frames;
      const double k = shape_speed_scale(shape);
      spec.motion.velocity = {r.uniform(cfg.speed_min, cfg.speed_max) * k, 0.0, 0.0};
      spec.motion.yaw_rate = r.uniform(-cfg.yaw_rate_max, cfg.yaw_rate_max);
      spec.noise = {cfg.jitter_sd, cfg.dropout_p, cfg.clutter_rate};
      spec.start_yaw = r.uniform(-std::numbers::pi, std::numbers::pi);
      spec.start = {r.uniform(-20.0, 20.0), r.uniform(-20.0, 20.0), 0.5 * shape_size(shape).z()};
      spec.scene_margin = cfg.scene_margin;
      spec.object_id = prefix + "-" + std::to_string(i);
      try {
        out.push_back(generate_tracklet(spec, r));
        break;
      } catch (const GenerationError&) {
        if (attempt + 1 == kAttempts) throw;
      }
    }
  }
  return out;
}

}  // namespace pttr
