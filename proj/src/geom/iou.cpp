#include "pttr/geom/iou.hpp"

#include <algorithm>

namespace pttr {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

// > 0 when p is left of the directed edge a -> b.
double side(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return cross2(b - a, p - a);
}

Eigen::Vector2d segment_line_hit(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& a,
                                 const Eigen::Vector2d& b) {
  const double sp = side(a, b, p);
  const double sq = side(a, b, q);
  const double t = sp / (sp - sq);
  return p + t * (q - p);
}

}  // namespace

double polygon_area(const Polygon2& poly) {
  if (poly.size() < 3) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) area += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * area;
}

Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 output = subject;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Eigen::Vector2d& a = clip[e];
    const Eigen::Vector2d& b = clip[(e + 1) % clip.size()];
    Polygon2 input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Eigen::Vector2d& cur = input[i];
      const Eigen::Vector2d& prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = side(a, b, cur) >= 0.0;
      const bool prev_in = side(a, b, prev) >= 0.0;
      if (cur_in) {
        if (!prev_in) output.push_back(segment_line_hit(prev, cur, a, b));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(segment_line_hit(prev, cur, a, b));
      }
    }
  }
  return output;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const auto ca = a.corners_bev();
  const auto cb = b.corners_bev();
  const Polygon2 pa(ca.begin(), ca.end());
  const Polygon2 pb(cb.begin(), cb.end());
  return std::max(0.0, polygon_area(clip_convex(pa, pb)));
}

double box_iou_3d(const Box3D& a, const Box3D& b) {
  if (a == b) return 1.0;
  const double za0 = a.center().z() - 0.5 * a.height();
  const double za1 = a.center().z() + 0.5 * a.height();
  const double zb0 = b.center().z() - 0.5 * b.height();
  const double zb1 = b.center().z() + 0.5 * b.height();
  const double dz = std::min(za1, zb1) - std::max(za0, zb0);
  if (dz <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * dz;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace pttr
