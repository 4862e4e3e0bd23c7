#include "pttr/geom/box.hpp"

#include <string>

#include "pttr/errors.hpp"

namespace pttr {

Box3D::Box3D(const Eigen::Vector3d& center, const Eigen::Vector3d& size, double yaw)
    : center_(center), size_(size), yaw_(wrap_angle(yaw)) {
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0)) {
    throw ValidationError("box size components must be positive");
  }
  if (!center.allFinite() || !std::isfinite(yaw)) throw ValidationError("box pose must be finite");
}

Eigen::Vector3d Box3D::to_local(const Eigen::Vector3d& p) const {
  const double c = std::cos(yaw_);
  const double s = std::sin(yaw_);
  const Eigen::Vector3d d = p - center_;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Eigen::Vector3d Box3D::to_world(const Eigen::Vector3d& p) const {
  const double c = std::cos(yaw_);
  const double s = std::sin(yaw_);
  return {c * p.x() - s * p.y() + center_.x(), s * p.x() + c * p.y() + center_.y(), p.z() + center_.z()};
}

Points Box3D::to_local(const Points& pts) const {
  Points out(pts.rows(), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) out.row(i) = to_local(Eigen::Vector3d(pts.row(i))).transpose();
  return out;
}

Points Box3D::to_world(const Points& pts) const {
  Points out(pts.rows(), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) out.row(i) = to_world(Eigen::Vector3d(pts.row(i))).transpose();
  return out;
}

bool Box3D::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d q = to_local(p);
  return std::abs(q.x()) <= 0.5 * length() && std::abs(q.y()) <= 0.5 * width() &&
         std::abs(q.z()) <= 0.5 * height();
}

std::array<Eigen::Vector2d, 4> Box3D::corners_bev() const {
  const double hl = 0.5 * length();
  const double hw = 0.5 * width();
  const std::array<Eigen::Vector2d, 4> local = {Eigen::Vector2d(hl, hw), Eigen::Vector2d(-hl, hw),
                                                Eigen::Vector2d(-hl, -hw), Eigen::Vector2d(hl, -hw)};
  const double c = std::cos(yaw_);
  const double s = std::sin(yaw_);
  std::array<Eigen::Vector2d, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = Eigen::Vector2d(c * local[i].x() - s * local[i].y() + center_.x(),
                             s * local[i].x() + c * local[i].y() + center_.y());
  }
  return out;
}

Box3D apply_offsets(const Box3D& box, const BoxOffsets& offsets) {
  return Box3D(box.center() + offsets.head<3>(), box.size(), box.yaw() + offsets(3));
}

Box3D distort_box(const Box3D& box, RandomState& rng, double range_m) {
  if (range_m < 0.0) throw ValidationError("distort_box: range must be non-negative");
  if (range_m == 0.0) return box;
  Eigen::Vector3d c = box.center();
  for (int k = 0; k < 3; ++k) c(k) += rng.uniform(-range_m, range_m);
  return Box3D(c, box.size(), box.yaw());
}

double center_distance(const Box3D& a, const Box3D& b) { return (a.center() - b.center()).norm(); }

Box3D box_in_frame(const Box3D& box, const Box3D& frame) {
  return Box3D(frame.to_local(box.center()), box.size(), box.yaw() - frame.yaw());
}

Box3D box_from_frame(const Box3D& local, const Box3D& frame) {
  return Box3D(frame.to_world(local.center()), local.size(), local.yaw() + frame.yaw());
}

}  // namespace pttr
