#pragma once

#include <vector>

#include "pttr/geom/box.hpp"

namespace pttr {

using Polygon2 = std::vector<Eigen::Vector2d>;

/// Signed shoelace area; positive for counter-clockwise vertex order.
double polygon_area(const Polygon2& poly);

/// Sutherland-Hodgman clip of `subject` against the convex, counter-clockwise
/// polygon `clip`.
Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip);

/// Area of the intersection of two boxes' BEV footprints.
double bev_intersection_area(const Box3D& a, const Box3D& b);

/// Exact 3D IoU of two yawed boxes: footprint intersection times z-overlap
/// over the union volume. Result in [0, 1].
double box_iou_3d(const Box3D& a, const Box3D& b);

}  // namespace pttr
