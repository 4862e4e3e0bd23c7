#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pttr/errors.hpp"
#include "pttr/numcore/ops.hpp"

namespace pttr {

/// m x max_neighbors neighbor table. `isolated[i]` marks centers with no cloud
/// point within the radius; their row holds the nearest point instead.
struct NeighborIndices {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> index;
  std::vector<bool> isolated;

  Eigen::Index centers() const { return index.rows(); }
  Eigen::Index group_size() const { return index.cols(); }

  /// Row-major flattening, the order used to gather grouped features.
  std::vector<int> flat() const {
    return std::vector<int>(index.data(), index.data() + index.size());
  }
};

/// Closed-ball neighborhood query. Hits are listed in ascending cloud index;
/// short rows repeat their first hit.
template <typename DerivedC, typename DerivedP>
NeighborIndices ball_query(const Eigen::MatrixBase<DerivedC>& centers, const Eigen::MatrixBase<DerivedP>& cloud,
                           double radius, int max_neighbors) {
  if (cloud.rows() == 0) throw EmptyInputError("ball_query: empty cloud");
  if (!(radius > 0.0)) throw ValidationError("ball_query: radius must be positive");
  if (max_neighbors < 1) throw ValidationError("ball_query: max_neighbors must be >= 1");
  const double r2 = radius * radius;
  NeighborIndices out;
  out.index.resize(centers.rows(), max_neighbors);
  out.isolated.assign(static_cast<std::size_t>(centers.rows()), false);
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    int count = 0;
    int nearest = 0;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cloud.rows() && count < max_neighbors; ++j) {
      const double d2 = (cloud.row(j).template cast<double>() - centers.row(i).template cast<double>()).squaredNorm();
      if (d2 <= r2) out.index(i, count++) = static_cast<int>(j);
      if (d2 < nearest_d2) {
        nearest_d2 = d2;
        nearest = static_cast<int>(j);
      }
    }
    if (count == 0) {
      // The loop above stopped early only after hits, so the full scan ran.
      out.isolated[static_cast<std::size_t>(i)] = true;
      out.index.row(i).setConstant(nearest);
      continue;
    }
    for (int c = count; c < max_neighbors; ++c) out.index(i, c) = out.index(i, 0);
  }
  return out;
}

/// Channel-wise max of the features of each center's neighbors.
template <typename Scalar, typename DerivedC, typename DerivedP>
Tensor<Scalar> local_pool(const Eigen::MatrixBase<DerivedC>& centers, const Eigen::MatrixBase<DerivedP>& cloud,
                          const Tensor<Scalar>& feats, double radius, int max_neighbors) {
  if (feats.rows() != cloud.rows()) {
    throw DimensionError("local_pool: feature rows (" + std::to_string(feats.rows()) + ") differ from cloud size (" +
                         std::to_string(cloud.rows()) + ")");
  }
  const NeighborIndices nb = ball_query(centers, cloud, radius, max_neighbors);
  return group_max_rows(gather_rows(feats, nb.flat()), nb.group_size());
}

}  // namespace pttr
