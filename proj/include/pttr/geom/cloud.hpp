#pragma once

#include <vector>

#include "pttr/geom/box.hpp"

namespace pttr {

/// Points with optional row-aligned features. Empty clouds are valid.
struct PointCloud {
  Points points;
  FeatureRows features;  // 0 columns when absent

  PointCloud() : points(0, 3), features(0, 0) {}
  explicit PointCloud(Points pts) : points(std::move(pts)), features(points.rows(), 0) {}
  PointCloud(Points pts, FeatureRows feats);

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  bool has_features() const { return features.cols() > 0; }

  /// Rows `index` in order.
  PointCloud select(const std::vector<int>& index) const;
};

/// Rows of `cloud` inside `box` after scaling each size component by
/// (1 + extend_ratio). The test runs in the box frame with closed intervals.
PointCloud crop_to_box(const PointCloud& cloud, const Box3D& box, double extend_ratio);

/// Indices of the points of `pts` that lie inside `box` (closed).
std::vector<int> points_in_box(const Points& pts, const Box3D& box);

/// Crop with every size component increased by 2 * margin_m.
PointCloud make_search_region(const PointCloud& cloud, const Box3D& prev_box, double margin_m = 2.0);

/// Cloud coordinates expressed in the box frame; features carried along.
PointCloud cloud_to_frame(const PointCloud& cloud, const Box3D& frame);

}  // namespace pttr
