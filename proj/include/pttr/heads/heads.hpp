#pragma once

#include <limits>
#include <optional>
#include <string>

#include "pttr/geom/box.hpp"
#include "pttr/numcore/layers.hpp"
#include "pttr/numcore/loss.hpp"
#include "pttr/sampling/grouping.hpp"

namespace pttr {

/// Per-point objectness logits (N x 1) and offsets (N x 4: dx, dy, dz, dtheta)
/// relative to the reference box, row-aligned with the sampled search points.
template <typename Scalar>
struct TrackPrediction {
  Tensor<Scalar> cls;
  Tensor<Scalar> reg;
};

/// Classification and regression MLPs, each C -> C -> C/2 -> {1, 4}.
template <typename Scalar>
class CoarseHead {
 public:
  CoarseHead() = default;
  CoarseHead(const std::string& name, Index channels, RandomState& rng)
      : cls_(name + ".cls", {channels, channels, channels / 2, 1}, false, rng),
        reg_(name + ".reg", {channels, channels, channels / 2, 4}, false, rng) {}

  TrackPrediction<Scalar> operator()(const Tensor<Scalar>& matched) const { return {cls_(matched), reg_(matched)}; }

  Mlp<Scalar>& cls() { return cls_; }
  Mlp<Scalar>& reg() { return reg_; }

  void collect(ParameterList<Scalar>& params) const {
    cls_.collect(params);
    reg_.collect(params);
  }

 private:
  Mlp<Scalar> cls_;
  Mlp<Scalar> reg_;
};

/// Where the template-side pooling centers come from.
enum class RefineQuery {
  /// seed - predicted (dx, dy, dz)
  SubtractOffset,
  /// seed - (seed + predicted offset): the seed relative to its predicted
  /// object center, i.e. the seed moved back by the estimated motion when the
  /// template is expressed in its own box frame.
  MotionCompensated,
};

struct RefineConfig {
  double radius = 1.0;
  int max_neighbors = 16;
  RefineQuery query = RefineQuery::SubtractOffset;
};

/// Second-stage head: pools search and template features around the seeds and
/// their template correspondences, concatenates them with the matched
/// features and maps them through a 5-layer MLP to (cls, reg).
template <typename Scalar>
class RefineHead {
 public:
  RefineHead() = default;
  RefineHead(const std::string& name, Index channels, RefineConfig config, RandomState& rng)
      : config_(config),
        mlp_(name + ".mlp", {3 * channels, channels, channels, channels / 2, channels / 2, 5}, false, rng) {}

  /// Template-side query points for the given seeds and coarse offsets.
  Points template_queries(const Points& seeds, const Matrix<Scalar>& coarse_reg) const {
    Points q(seeds.rows(), 3);
    for (Index i = 0; i < seeds.rows(); ++i) {
      const Eigen::RowVector3d off = coarse_reg.row(i).head(3).template cast<double>();
      if (config_.query == RefineQuery::SubtractOffset) {
        q.row(i) = seeds.row(i) - off;
      } else {
        q.row(i) = -off;
      }
    }
    return q;
  }

  /// `seeds` are the sampled search points (the rows of `matched`); the
  /// search and template clouds carry the features that get pooled.
  TrackPrediction<Scalar> operator()(const TrackPrediction<Scalar>& coarse, const Points& seeds,
                                     const Points& search_xyz, const Tensor<Scalar>& search_feat,
                                     const Points& template_xyz, const Tensor<Scalar>& template_feat,
                                     const Tensor<Scalar>& matched) const {
    const Points queries = template_queries(seeds, coarse.reg.value());
    Tensor<Scalar> fs = local_pool(seeds, search_xyz, search_feat, config_.radius, config_.max_neighbors);
    Tensor<Scalar> ft = local_pool(queries, template_xyz, template_feat, config_.radius, config_.max_neighbors);
    Tensor<Scalar> y = mlp_(concat_cols<Scalar>({fs, ft, matched}));
    return {slice_cols(y, 0, 1), slice_cols(y, 1, 4)};
  }

  const RefineConfig& config() const { return config_; }
  Mlp<Scalar>& mlp() { return mlp_; }

  void collect(ParameterList<Scalar>& params) const { mlp_.collect(params); }

 private:
  RefineConfig config_;
  Mlp<Scalar> mlp_;
};

/// Training targets for one set of sampled points.
template <typename Scalar>
struct TargetAssignment {
  Matrix<Scalar> cls_target;  // N x 1 in {0, 1}
  Matrix<Scalar> reg_target;  // N x 4
  Matrix<Scalar> reg_mask;    // N x 1 in {0, 1}
};

/// Points inside the ground-truth box are positive and regress
/// (gt.center - point, wrap(gt.yaw - ref.yaw)). Without any inside point, the
/// point nearest to the ground-truth center is promoted.
template <typename Scalar>
TargetAssignment<Scalar> assign_targets(const Points& xyz, const Box3D& gt, const Box3D& ref) {
  const Index n = xyz.rows();
  TargetAssignment<Scalar> t{Matrix<Scalar>::Zero(n, 1), Matrix<Scalar>::Zero(n, 4), Matrix<Scalar>::Zero(n, 1)};
  const double dtheta = wrap_angle(gt.yaw() - ref.yaw());
  auto set_positive = [&](Index i) {
    t.cls_target(i, 0) = 1;
    t.reg_mask(i, 0) = 1;
    const Eigen::Vector3d d = gt.center() - Eigen::Vector3d(xyz.row(i));
    t.reg_target.row(i) << static_cast<Scalar>(d.x()), static_cast<Scalar>(d.y()), static_cast<Scalar>(d.z()),
        static_cast<Scalar>(dtheta);
  };
  bool any = false;
  for (Index i = 0; i < n; ++i) {
    if (gt.contains(Eigen::Vector3d(xyz.row(i)))) {
      set_positive(i);
      any = true;
    }
  }
  if (!any && n > 0) {
    Index nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double d = (Eigen::Vector3d(xyz.row(i)) - gt.center()).squaredNorm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    set_positive(nearest);
  }
  return t;
}

enum class DecodeMode {
  /// Highest-scoring point plus its offsets.
  Argmax,
  /// Mean of the top-k point predictions weighted by a softmax of their logits.
  TopKMean,
};

struct DecodeConfig {
  DecodeMode mode = DecodeMode::Argmax;
  int top_k = 4;
};

/// Turns per-point predictions into one box. Size is copied from `ref`.
template <typename Scalar>
Box3D decode_box(const Matrix<Scalar>& cls, const Matrix<Scalar>& reg, const Points& xyz, const Box3D& ref,
                 const DecodeConfig& config = {}) {
  const Index n = xyz.rows();
  if (n < 1) throw EmptyInputError("decode_box: no points");
  if (cls.rows() != n || reg.rows() != n || reg.cols() != 4) {
    throw DimensionError("decode_box: prediction rows do not match point count");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return cls(a, 0) > cls(b, 0); });
  if (config.mode == DecodeMode::Argmax) {
    const Index i = order.front();
    const Eigen::Vector3d c = Eigen::Vector3d(xyz.row(i)) + reg.row(i).head(3).transpose().template cast<double>();
    return Box3D(c, ref.size(), ref.yaw() + static_cast<double>(reg(i, 3)));
  }
  const auto k = static_cast<std::size_t>(std::min<Index>(std::max(config.top_k, 1), n));
  // Softmax over the top-k logits relative to the best one.
  const double top = static_cast<double>(cls(order.front(), 0));
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double s = 0.0, c_yaw = 0.0, weight = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const Index i = order[j];
    const double w = std::exp(static_cast<double>(cls(i, 0)) - top);
    c += w * (Eigen::Vector3d(xyz.row(i)) + reg.row(i).head(3).transpose().template cast<double>());
    s += w * std::sin(static_cast<double>(reg(i, 3)));
    c_yaw += w * std::cos(static_cast<double>(reg(i, 3)));
    weight += w;
  }
  return Box3D(c / weight, ref.size(), ref.yaw() + std::atan2(s, c_yaw));
}

template <typename Scalar>
Box3D decode_box(const TrackPrediction<Scalar>& pred, const Points& xyz, const Box3D& ref,
                 const DecodeConfig& config = {}) {
  return decode_box(pred.cls.value(), pred.reg.value(), xyz, ref, config);
}

/// BCE(cls) + reg_weight * masked MSE(reg) for one prediction.
template <typename Scalar>
Tensor<Scalar> prediction_loss(const TrackPrediction<Scalar>& pred, const TargetAssignment<Scalar>& tgt,
                               Scalar reg_weight = Scalar(1)) {
  Tensor<Scalar> cls = bce_loss(pred.cls, tgt.cls_target);
  Tensor<Scalar> reg = mse_loss(pred.reg, tgt.reg_target, std::optional<Matrix<Scalar>>(tgt.reg_mask));
  return add(cls, reg_weight == Scalar(1) ? reg : scale(reg, reg_weight));
}

/// Two-stage loss: coarse terms plus lambda times the refined terms.
template <typename Scalar>
Tensor<Scalar> total_loss(const TrackPrediction<Scalar>& coarse, const std::optional<TrackPrediction<Scalar>>& fine,
                          const TargetAssignment<Scalar>& tgt, Scalar lambda_w = Scalar(1)) {
  Tensor<Scalar> loss = prediction_loss(coarse, tgt);
  if (fine) loss = add(loss, scale(prediction_loss(*fine, tgt), lambda_w));
  return loss;
}

}  // namespace pttr
