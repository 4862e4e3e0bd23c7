#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pttr/numcore/random.hpp"

namespace pttr {

using Index = Eigen::Index;

/// n x 3 coordinates, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// n x c per-point attributes.
using FeatureRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

/// Oriented box. The heading axis (local x) carries the length l, local y the
/// width w and local z the height h; yaw rotates local x toward world y.
class Box3D {
 public:
  Box3D() : Box3D(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones(), 0.0) {}
  Box3D(const Eigen::Vector3d& center, const Eigen::Vector3d& size, double yaw);

  const Eigen::Vector3d& center() const { return center_; }
  /// (w, l, h)
  const Eigen::Vector3d& size() const { return size_; }
  double yaw() const { return yaw_; }
  double width() const { return size_.x(); }
  double length() const { return size_.y(); }
  double height() const { return size_.z(); }
  double volume() const { return size_.prod(); }

  /// Same pose, each size component scaled by `factor`.
  Box3D scaled(double factor) const { return Box3D(center_, size_ * factor, yaw_); }
  /// Same pose, each size component grown by `delta`.
  Box3D grown(double delta) const {
    return Box3D(center_, size_ + Eigen::Vector3d::Constant(delta), yaw_);
  }

  /// Closed-interval containment.
  bool contains(const Eigen::Vector3d& p) const;

  /// World point to the box frame (translate by -center, rotate by -yaw).
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const;
  Eigen::Vector3d to_world(const Eigen::Vector3d& p) const;
  Points to_local(const Points& pts) const;
  Points to_world(const Points& pts) const;

  /// BEV footprint corners, counter-clockwise.
  std::array<Eigen::Vector2d, 4> corners_bev() const;

  bool operator==(const Box3D& other) const {
    return center_ == other.center_ && size_ == other.size_ && yaw_ == other.yaw_;
  }

 private:
  Eigen::Vector3d center_;
  Eigen::Vector3d size_;
  double yaw_;
};

/// (dx, dy, dz, dtheta)
using BoxOffsets = Eigen::Vector4d;

/// Translates the center and increments the yaw.
Box3D apply_offsets(const Box3D& box, const BoxOffsets& offsets);

/// Center perturbed by independent uniform draws in [-range_m, range_m].
Box3D distort_box(const Box3D& box, RandomState& rng, double range_m = 0.3);

double center_distance(const Box3D& a, const Box3D& b);

/// Expresses `box` in the frame of `frame` (frame becomes centered, yaw 0).
Box3D box_in_frame(const Box3D& box, const Box3D& frame);
/// Inverse of box_in_frame.
Box3D box_from_frame(const Box3D& local, const Box3D& frame);

}  // namespace pttr
