#pragma once

#include <string>
#include <vector>

#include "pttr/geom/box.hpp"
#include "pttr/numcore/layers.hpp"
#include "pttr/sampling/grouping.hpp"
#include "pttr/sampling/samplers.hpp"

namespace pttr {

/// Set-abstraction stack. Level l samples `sample_counts[l]` centers, groups
/// neighbors within `radii[l]` and maps [relative xyz, features] through an
/// MLP of `mlp_depth` layers of width `widths[l]` before a channel max.
struct BackboneConfig {
  std::vector<int> sample_counts{128, 64, 32};
  std::vector<double> radii{0.3, 0.5, 0.7};
  std::vector<int> widths{32, 64, 128};
  int max_neighbors = 16;
  int mlp_depth = 2;
  /// Levels of the search branch that use the relation-aware sampler; the
  /// others fall back to random sampling. Empty means every level.
  std::vector<bool> relation_levels;

  void validate() const {
    if (sample_counts.empty()) throw ConfigError("backbone needs at least one level");
    if (radii.size() != sample_counts.size() || widths.size() != sample_counts.size()) {
      throw ConfigError("backbone sample_counts, radii and widths must have equal length");
    }
    if (!relation_levels.empty() && relation_levels.size() != sample_counts.size()) {
      throw ConfigError("backbone relation_levels must be empty or match the level count");
    }
    if (max_neighbors < 1 || mlp_depth < 1) throw ConfigError("backbone max_neighbors and mlp_depth must be >= 1");
  }
  bool relation_at(std::size_t level) const { return relation_levels.empty() || relation_levels[level]; }
};

template <typename Scalar>
struct BackboneLevel {
  Points input_xyz;
  Matrix<Scalar> input_features;  // values only; sampling is not differentiated
  SampleIndices sampled;
  NeighborIndices groups;
  Points xyz;
  Tensor<Scalar> features;
};

template <typename Scalar>
struct BackboneOutput {
  Points xyz;
  Tensor<Scalar> features;
  std::vector<BackboneLevel<Scalar>> levels;
};

template <typename Scalar>
Matrix<Scalar> points_as(const Points& pts) {
  return pts.template cast<Scalar>();
}

/// PointNet++-style backbone shared by the template and search branches.
template <typename Scalar>
class PointBackbone {
 public:
  PointBackbone() = default;
  PointBackbone(const std::string& name, BackboneConfig config, RandomState& rng) : config_(std::move(config)) {
    config_.validate();
    Index in = 3;  // level 0 features are the coordinates themselves
    for (std::size_t l = 0; l < config_.widths.size(); ++l) {
      std::vector<Index> widths{in + 3};
      for (int d = 0; d < config_.mlp_depth; ++d) widths.push_back(config_.widths[l]);
      mlps_.emplace_back(name + ".sa" + std::to_string(l), widths, true, rng);
      in = config_.widths[l];
    }
  }

  /// A view sharing these weights with different per-level sample counts.
  PointBackbone with_sample_counts(std::vector<int> counts) const {
    PointBackbone view = *this;
    view.config_.sample_counts = std::move(counts);
    view.config_.validate();
    return view;
  }

  const BackboneConfig& config() const { return config_; }
  Index out_features() const { return config_.widths.back(); }

  /// Template branch (relation == nullptr): D-FPS at every level. Search
  /// branch: `strategy` at every level, with the relation-aware samplers
  /// reading the template's same-level input features from `relation`.
  BackboneOutput<Scalar> forward(const Points& cloud, SamplingStrategy strategy,
                                 const BackboneOutput<Scalar>* relation, RandomState& rng) const {
    if (cloud.rows() == 0) throw EmptyInputError("backbone_forward: empty cloud");
    BackboneOutput<Scalar> out;
    Points xyz = cloud;
    Tensor<Scalar> feats(points_as<Scalar>(cloud));
    for (std::size_t l = 0; l < mlps_.size(); ++l) {
      BackboneLevel<Scalar> level;
      level.input_xyz = xyz;
      level.input_features = feats.value();
      level.sampled = sample_level(l, level, strategy, relation, rng);

      Points centers(static_cast<Index>(level.sampled.indices.size()), 3);
      for (std::size_t i = 0; i < level.sampled.indices.size(); ++i) {
        centers.row(static_cast<Index>(i)) = xyz.row(level.sampled.indices[i]);
      }
      level.groups = ball_query(centers, xyz, config_.radii[l], config_.max_neighbors);
      const std::vector<int> flat = level.groups.flat();
      const Index k = level.groups.group_size();
      Matrix<Scalar> rel(static_cast<Index>(flat.size()), 3);
      for (std::size_t r = 0; r < flat.size(); ++r) {
        const Index c = static_cast<Index>(r) / k;
        rel.row(static_cast<Index>(r)) = (xyz.row(flat[r]) - centers.row(c)).template cast<Scalar>();
      }
      Tensor<Scalar> grouped = concat_cols<Scalar>({Tensor<Scalar>(std::move(rel)), gather_rows(feats, flat)});
      feats = group_max_rows(mlps_[l](grouped), k);
      xyz = centers;
      level.xyz = centers;
      level.features = feats;
      out.levels.push_back(std::move(level));
    }
    out.xyz = xyz;
    out.features = feats;
    return out;
  }

  void collect(ParameterList<Scalar>& out) const {
    for (const auto& m : mlps_) m.collect(out);
  }

 private:
  SampleIndices sample_level(std::size_t l, const BackboneLevel<Scalar>& level, SamplingStrategy strategy,
                             const BackboneOutput<Scalar>* relation, RandomState& rng) const {
    const int k = config_.sample_counts[l];
    const auto n = static_cast<int>(level.input_xyz.rows());
    if (relation == nullptr) return sample_dfps(level.input_xyz, k);
    const bool relation_level = config_.relation_at(l);
    switch (strategy) {
      case SamplingStrategy::Random: return sample_random(n, k, rng);
      case SamplingStrategy::DFPS: return sample_dfps(level.input_xyz, k);
      case SamplingStrategy::FFPS: return sample_ffps(level.input_features, k);
      case SamplingStrategy::RAS:
        if (!relation_level) return sample_random(n, k, rng);
        return sample_ras(level.input_features, relation->levels.at(l).input_features, k);
      case SamplingStrategy::RASHybrid:
        if (!relation_level) return sample_random(n, k, rng);
        return sample_ras_hybrid(level.input_features, relation->levels.at(l).input_features, k, rng);
    }
    throw ConfigError("unhandled sampling strategy");
  }

  BackboneConfig config_;
  std::vector<Mlp<Scalar>> mlps_;
};

}  // namespace pttr
