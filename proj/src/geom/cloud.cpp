#include "pttr/geom/cloud.hpp"

#include "pttr/errors.hpp"

namespace pttr {

PointCloud::PointCloud(Points pts, FeatureRows feats) : points(std::move(pts)), features(std::move(feats)) {
  if (features.cols() > 0 && features.rows() != points.rows()) {
    throw DimensionError("point cloud feature rows must match point count");
  }
  if (features.cols() == 0) features.resize(points.rows(), 0);
}

PointCloud PointCloud::select(const std::vector<int>& index) const {
  Points pts(static_cast<Eigen::Index>(index.size()), 3);
  FeatureRows feats(static_cast<Eigen::Index>(index.size()), features.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = points.row(index[i]);
    if (features.cols() > 0) feats.row(static_cast<Eigen::Index>(i)) = features.row(index[i]);
  }
  return PointCloud(std::move(pts), std::move(feats));
}

std::vector<int> points_in_box(const Points& pts, const Box3D& box) {
  std::vector<int> inside;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (box.contains(Eigen::Vector3d(pts.row(i)))) inside.push_back(static_cast<int>(i));
  }
  return inside;
}

PointCloud crop_to_box(const PointCloud& cloud, const Box3D& box, double extend_ratio) {
  if (extend_ratio < 0.0) throw ValidationError("crop_to_box: extend ratio must be non-negative");
  return cloud.select(points_in_box(cloud.points, box.scaled(1.0 + extend_ratio)));
}

PointCloud make_search_region(const PointCloud& cloud, const Box3D& prev_box, double margin_m) {
  if (margin_m < 0.0) throw ValidationError("make_search_region: margin must be non-negative");
  return crop_to_box(cloud, prev_box.grown(2.0 * margin_m), 0.0);
}

PointCloud cloud_to_frame(const PointCloud& cloud, const Box3D& frame) {
  return PointCloud(frame.to_local(cloud.points), cloud.features);
}

}  // namespace pttr
