#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pttr/geom/box.hpp"
#include "pttr/numcore/ops.hpp"

namespace pttr {

/// Metric layout of a bird's-eye-view grid. Rows follow y, columns follow x;
/// cells are half-open [origin + i * cell, origin + (i + 1) * cell).
struct BevGeometry {
  double x_min = -4.8;
  double y_min = -4.8;
  double z_min = -1.5;
  double z_max = 1.5;
  double cell = 0.3;
  Index h = 32;
  Index w = 32;

  /// Validates that both planar extents are positive multiples of `cell`.
  static BevGeometry from_range(double x0, double x1, double y0, double y1, double z0, double z1, double cell) {
    if (!(cell > 0.0)) throw ConfigError("bev cell size must be positive");
    if (!(x1 > x0) || !(y1 > y0) || !(z1 > z0)) throw ConfigError("bev range must have positive extents");
    auto count = [cell](double lo, double hi, const char* axis) {
      const double n = (hi - lo) / cell;
      const double r = std::round(n);
      if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
        throw ConfigError(std::string("bev range along ") + axis + " is not a multiple of the cell size");
      }
      return static_cast<Index>(r);
    };
    BevGeometry g;
    g.x_min = x0;
    g.y_min = y0;
    g.z_min = z0;
    g.z_max = z1;
    g.cell = cell;
    g.w = count(x0, x1, "x");
    g.h = count(y0, y1, "y");
    return g;
  }

  Index cells() const { return h * w; }
  double x_max() const { return x_min + cell * static_cast<double>(w); }
  double y_max() const { return y_min + cell * static_cast<double>(h); }

  /// Row-major cell index of (x, y, z), or nothing outside the range.
  std::optional<Index> cell_of(double x, double y, double z) const {
    if (!(z >= z_min && z <= z_max)) return std::nullopt;
    const double fx = std::floor((x - x_min) / cell);
    const double fy = std::floor((y - y_min) / cell);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < static_cast<double>(w) && fy < static_cast<double>(h))) return std::nullopt;
    return static_cast<Index>(fy) * w + static_cast<Index>(fx);
  }

  Eigen::Vector2d cell_center(Index index) const {
    const Index r = index / w;
    const Index c = index % w;
    return {x_min + (static_cast<double>(c) + 0.5) * cell, y_min + (static_cast<double>(r) + 0.5) * cell};
  }

  /// Cell centers lifted to 3D at height `z`, one row per cell.
  Points cell_centers(double z = 0.0) const {
    Points p(cells(), 3);
    for (Index i = 0; i < cells(); ++i) {
      const Eigen::Vector2d c = cell_center(i);
      p.row(i) << c.x(), c.y(), z;
    }
    return p;
  }

  /// Same metric extent with `factor` times coarser cells.
  BevGeometry downsampled(Index factor) const {
    if (factor < 1 || h % factor != 0 || w % factor != 0) {
      throw ConfigError("bev grid " + std::to_string(h) + "x" + std::to_string(w) + " not divisible by " +
                        std::to_string(factor));
    }
    BevGeometry g = *this;
    g.cell = cell * static_cast<double>(factor);
    g.h = h / factor;
    g.w = w / factor;
    return g;
  }

  bool operator==(const BevGeometry&) const = default;
};

/// h x w x C feature map stored as (h * w) x C tokens, row-major over cells.
template <typename Scalar>
struct BevGrid {
  BevGeometry geometry;
  Tensor<Scalar> features;

  Index channels() const { return features.cols(); }
};

/// Non-empty pillars of a cloud. Row j of `rows` is the 11-dim augmented point
/// (x, y, z, x_c, y_c, z_c, x_p, y_p, w, h, l); pillar s owns rows
/// [offsets[s], offsets[s + 1]) and sits at cell `cells[s]`. Pillars are in
/// ascending cell order, points within a pillar in input order.
struct PillarPoints {
  BevGeometry geometry;
  Eigen::Matrix<double, Eigen::Dynamic, 11, Eigen::RowMajor> rows;
  std::vector<Index> offsets{0};
  std::vector<Index> cells;
  std::vector<Index> source;

  std::size_t pillar_count() const { return cells.size(); }
};

inline constexpr Index kPillarFeatures = 11;

/// Buckets points by planar cell and augments them. `box_size` is (w, l, h).
inline PillarPoints pillarize(const Points& cloud, const BevGeometry& geometry, const Eigen::Vector3d& box_size) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(geometry.cells()));
  for (Index i = 0; i < cloud.rows(); ++i) {
    if (auto c = geometry.cell_of(cloud(i, 0), cloud(i, 1), cloud(i, 2))) members[static_cast<std::size_t>(*c)].push_back(i);
  }
  PillarPoints out;
  out.geometry = geometry;
  Index total = 0;
  for (const auto& m : members) total += static_cast<Index>(m.size());
  out.rows.resize(total, kPillarFeatures);
  Index r = 0;
  for (Index cell = 0; cell < geometry.cells(); ++cell) {
    const auto& m = members[static_cast<std::size_t>(cell)];
    if (m.empty()) continue;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (Index i : m) mean += cloud.row(i).transpose();
    mean /= static_cast<double>(m.size());
    const Eigen::Vector2d center = geometry.cell_center(cell);
    for (Index i : m) {
      out.rows.row(r) << cloud(i, 0), cloud(i, 1), cloud(i, 2), mean.x(), mean.y(), mean.z(), cloud(i, 0) - center.x(),
          cloud(i, 1) - center.y(), box_size.x(), box_size.z(), box_size.y();
      out.source.push_back(i);
      ++r;
    }
    out.cells.push_back(cell);
    out.offsets.push_back(r);
  }
  return out;
}

/// Per-point linear encoding (no bias), channel max per pillar, scattered
/// into a zero grid. `enc` is 11 x C.
template <typename Scalar>
BevGrid<Scalar> encode_pillars(const PillarPoints& pillars, const Tensor<Scalar>& enc) {
  if (enc.rows() != kPillarFeatures) {
    throw DimensionError("encode_pillars: encoder must have 11 rows, got " + enc.shape_string());
  }
  const BevGeometry& g = pillars.geometry;
  RowMixer scatter{g.cells(), 0, {}};
  Tensor<Scalar> pooled;
  if (pillars.pillar_count() == 0) {
    // Keep the encoder on the graph so it still receives a (zero) gradient.
    pooled = matmul(Tensor<Scalar>(Matrix<Scalar>::Zero(1, kPillarFeatures)), enc);
  } else {
    Tensor<Scalar> encoded = matmul(Tensor<Scalar>(Matrix<Scalar>(pillars.rows.template cast<Scalar>())), enc);
    pooled = segment_max(encoded, pillars.offsets);
    for (std::size_t s = 0; s < pillars.pillar_count(); ++s) {
      scatter.entries.push_back({pillars.cells[s], static_cast<Index>(s), 1.0});
    }
  }
  scatter.in_rows = pooled.rows();
  return {g, row_mix(pooled, scatter)};
}

/// Grid-average pooling of point features into `geometry`; empty cells are 0
/// and points outside the range are dropped.
template <typename Scalar>
BevGrid<Scalar> point_to_bev(const Tensor<Scalar>& feats, const Points& xyz, const BevGeometry& geometry) {
  if (feats.rows() != xyz.rows()) {
    throw DimensionError("point_to_bev: " + std::to_string(feats.rows()) + " feature rows for " +
                         std::to_string(xyz.rows()) + " points");
  }
  std::vector<Index> cell(static_cast<std::size_t>(xyz.rows()), -1);
  std::vector<Index> count(static_cast<std::size_t>(geometry.cells()), 0);
  for (Index i = 0; i < xyz.rows(); ++i) {
    if (auto c = geometry.cell_of(xyz(i, 0), xyz(i, 1), xyz(i, 2))) {
      cell[static_cast<std::size_t>(i)] = *c;
      ++count[static_cast<std::size_t>(*c)];
    }
  }
  RowMixer mix{geometry.cells(), feats.rows(), {}};
  for (Index i = 0; i < xyz.rows(); ++i) {
    const Index c = cell[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    mix.entries.push_back({c, i, 1.0 / static_cast<double>(count[static_cast<std::size_t>(c)])});
  }
  return {geometry, row_mix(feats, mix)};
}

/// Bilinear resampling of a grid at planar point positions, with samples at
/// cell centers and queries outside the center hull clamped to the border.
template <typename Scalar>
Tensor<Scalar> bev_to_point(const BevGrid<Scalar>& grid, const Points& xyz) {
  const BevGeometry& g = grid.geometry;
  RowMixer mix{xyz.rows(), g.cells(), {}};
  auto axis = [](double p, double origin, double cell, Index n) {
    const double u = std::clamp((p - origin) / cell - 0.5, 0.0, static_cast<double>(n - 1));
    // Snap to the nearest center when rounding leaves a sliver of weight.
    const double near = std::round(u);
    const double v = std::abs(u - near) < 1e-9 ? near : u;
    const Index i0 = std::min(static_cast<Index>(std::floor(v)), std::max<Index>(n - 2, 0));
    return std::pair<Index, double>{i0, v - static_cast<double>(i0)};
  };
  for (Index k = 0; k < xyz.rows(); ++k) {
    const auto [cx, fx] = axis(xyz(k, 0), g.x_min, g.cell, g.w);
    const auto [ry, fy] = axis(xyz(k, 1), g.y_min, g.cell, g.h);
    const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
    const Index rows[4] = {ry, ry, ry + 1, ry + 1};
    const Index cols[4] = {cx, cx + 1, cx, cx + 1};
    for (int j = 0; j < 4; ++j) {
      if (wts[j] == 0.0) continue;
      mix.entries.push_back({k, rows[j] * g.w + cols[j], wts[j]});
    }
  }
  return row_mix(grid.features, mix);
}

}  // namespace pttr
