#pragma once

#include <string>
#include <vector>

#include "pttr/attention/positional.hpp"
#include "pttr/attention/prt.hpp"
#include "pttr/bev/grid.hpp"
#include "pttr/heads/heads.hpp"

namespace pttr {

/// Token matching on BEV grids: sinusoidal position embedding, then the
/// relation transformer with the search grid as query. Output keeps the
/// search grid's layout.
template <typename Scalar>
BevGrid<Scalar> bev_match(const BevGrid<Scalar>& search, const BevGrid<Scalar>& templ, const PrtWeights<Scalar>& w) {
  if (search.channels() != templ.channels()) {
    throw DimensionError("bev_match: grids have " + std::to_string(search.channels()) + " and " +
                         std::to_string(templ.channels()) + " channels");
  }
  const Index c = search.channels();
  Tensor<Scalar> s = add(search.features,
                         Tensor<Scalar>(sinusoidal_pe_2d<Scalar>(search.geometry.h, search.geometry.w, c)));
  Tensor<Scalar> t = add(templ.features, Tensor<Scalar>(sinusoidal_pe_2d<Scalar>(templ.geometry.h, templ.geometry.w, c)));
  return {search.geometry, prt_forward(s, t, w).matched};
}

/// Downsampling conv stack. Each block is a stride-2 3x3 conv followed by a
/// stride-1 3x3 conv, both zero-padded with ReLU.
template <typename Scalar>
class BevBackbone {
 public:
  BevBackbone() = default;
  BevBackbone(const std::string& name, Index in_channels, std::vector<int> widths, RandomState& rng)
      : widths_(std::move(widths)) {
    if (widths_.empty()) throw ConfigError("bev backbone needs at least one block");
    Index in = in_channels;
    for (std::size_t b = 0; b < widths_.size(); ++b) {
      const Index out = widths_[b];
      const std::string stem = name + ".b" + std::to_string(b);
      convs_.emplace_back(stem + ".0", 9 * in, out, true, rng);
      convs_.emplace_back(stem + ".1", 9 * out, out, true, rng);
      in = out;
    }
  }

  Index factor() const { return Index(1) << widths_.size(); }
  Index out_channels() const { return widths_.back(); }

  /// Throws ConfigError unless both grid extents divide by 2^blocks.
  BevGeometry output_geometry(const BevGeometry& in) const { return in.downsampled(factor()); }

  BevGrid<Scalar> operator()(const BevGrid<Scalar>& grid) const {
    const BevGeometry out_geometry = output_geometry(grid.geometry);
    Tensor<Scalar> x = grid.features;
    Index h = grid.geometry.h;
    Index w = grid.geometry.w;
    for (std::size_t b = 0; b < widths_.size(); ++b) {
      x = relu(convs_[2 * b](im2col3x3(x, h, w, 2)));
      h /= 2;
      w /= 2;
      x = relu(convs_[2 * b + 1](im2col3x3(x, h, w, 1)));
    }
    return {out_geometry, x};
  }

  std::vector<Linear<Scalar>>& convs() { return convs_; }

  void collect(ParameterList<Scalar>& params) const {
    for (const auto& c : convs_) c.collect(params);
  }

 private:
  std::vector<int> widths_;
  std::vector<Linear<Scalar>> convs_;
};

enum class FusionMode { Addition, Global, PointWise };

inline std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::Addition: return "addition";
    case FusionMode::Global: return "global";
    case FusionMode::PointWise: return "pointwise";
  }
  return "?";
}

inline FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "addition") return FusionMode::Addition;
  if (s == "global") return FusionMode::Global;
  if (s == "pointwise") return FusionMode::PointWise;
  throw ConfigError("unknown fusion mode '" + s + "'");
}

/// Squeeze-excitation bottleneck C -> C/r -> C.
template <typename Scalar>
struct SeWeights {
  Linear<Scalar> down;
  Linear<Scalar> up;

  SeWeights() = default;
  SeWeights(const std::string& name, Index channels, Index reduction, RandomState& rng) {
    if (reduction < 1 || channels % reduction != 0) {
      throw ConfigError("fusion width " + std::to_string(channels) + " not divisible by reduction " +
                        std::to_string(reduction));
    }
    down = Linear<Scalar>(name + ".down", channels, channels / reduction, true, rng);
    up = Linear<Scalar>(name + ".up", channels / reduction, channels, true, rng);
  }

  Index channels() const { return down.in_features(); }

  void collect(ParameterList<Scalar>& params) const {
    down.collect(params);
    up.collect(params);
  }
};

/// Gate weights in (0, 1) for fusing `a` (weight w) with `b` (weight 1 - w).
template <typename Scalar>
Tensor<Scalar> fusion_gate(const Tensor<Scalar>& a, const Tensor<Scalar>& b, FusionMode mode, const SeWeights<Scalar>& se) {
  Tensor<Scalar> s = add(a, b);
  if (mode == FusionMode::Global) s = mean_over_axis(s, 0);
  return sigmoid(se.up(relu(se.down(s))));
}

/// Addition: a + b. Global / PointWise: w * a + (1 - w) * b with the gate
/// pooled over rows or computed per row.
template <typename Scalar>
Tensor<Scalar> selective_fuse(const Tensor<Scalar>& a, const Tensor<Scalar>& b, FusionMode mode,
                              const SeWeights<Scalar>& se) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("selective_fuse: " + a.shape_string() + " vs " + b.shape_string());
  }
  if (mode == FusionMode::Addition) return add(a, b);
  if (se.channels() != a.cols()) {
    throw DimensionError("selective_fuse: gate width " + std::to_string(se.channels()) + " for " + a.shape_string());
  }
  Tensor<Scalar> w = fusion_gate(a, b, mode, se);
  return add(mul(w, a), mul(affine(w, Scalar(-1), Scalar(1)), b));
}

/// BCE(point) + alpha * MSE(point) + BCE(bev) + beta * MSE(bev).
template <typename Scalar>
Tensor<Scalar> dual_loss(const TrackPrediction<Scalar>& point_pred, const TrackPrediction<Scalar>& bev_pred,
                         const TargetAssignment<Scalar>& tgt_point, const TargetAssignment<Scalar>& tgt_bev,
                         Scalar alpha = Scalar(100), Scalar beta = Scalar(2)) {
  return add(prediction_loss(point_pred, tgt_point, alpha), prediction_loss(bev_pred, tgt_bev, beta));
}

}  // namespace pttr
