#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pttr/attention/prt.hpp"
#include "pttr/bev/fusion.hpp"
#include "pttr/heads/heads.hpp"
#include "pttr/sampling/backbone.hpp"

namespace pttr {

enum class ModelKind { Pttr, PttrPlusPlus };
enum class Matcher { Prt, Cosine };
/// Which view receives the other's features during fusion.
enum class FusionBranch { Point, Bev };
/// Which branches run in a PTTR++ model.
enum class BranchMode { Fused, PointOnly, BevOnly };

inline std::string to_string(ModelKind k) { return k == ModelKind::Pttr ? "pttr" : "pttr++"; }
inline std::string to_string(Matcher m) { return m == Matcher::Prt ? "prt" : "cosine"; }
inline std::string to_string(FusionBranch b) { return b == FusionBranch::Point ? "point" : "bev"; }
inline std::string to_string(BranchMode b) {
  switch (b) {
    case BranchMode::Fused: return "fused";
    case BranchMode::PointOnly: return "point";
    case BranchMode::BevOnly: return "bev";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "pttr") return ModelKind::Pttr;
  if (s == "pttr++") return ModelKind::PttrPlusPlus;
  throw ConfigError("unknown model '" + s + "'");
}
inline Matcher matcher_from_string(const std::string& s) {
  if (s == "prt") return Matcher::Prt;
  if (s == "cosine") return Matcher::Cosine;
  throw ConfigError("unknown matcher '" + s + "'");
}
inline FusionBranch fusion_branch_from_string(const std::string& s) {
  if (s == "point") return FusionBranch::Point;
  if (s == "bev") return FusionBranch::Bev;
  throw ConfigError("unknown fusion branch '" + s + "'");
}
inline BranchMode branch_mode_from_string(const std::string& s) {
  if (s == "fused") return BranchMode::Fused;
  if (s == "point") return BranchMode::PointOnly;
  if (s == "bev") return BranchMode::BevOnly;
  throw ConfigError("unknown branch mode '" + s + "'");
}

struct ModelConfig {
  ModelKind kind = ModelKind::Pttr;
  int search_points = 256;
  int template_points = 128;
  BackboneConfig backbone;  // search branch; the template branch uses template_counts
  std::vector<int> template_counts{64, 32, 16};
  SamplingStrategy sampling = SamplingStrategy::RASHybrid;
  Matcher matcher = Matcher::Prt;
  int prt_depth = 1;
  RamOptions ram;
  bool use_prm = true;
  RefineConfig refine;
  double lambda = 1.0;
  DecodeConfig decode;

  BevGeometry bev;
  int bev_channels = 32;
  std::vector<int> bev_widths{32, 32, 64};
  int se_reduction = 16;
  FusionMode fusion = FusionMode::PointWise;
  FusionBranch fusion_branch = FusionBranch::Point;
  BranchMode branches = BranchMode::Fused;
  double alpha = 100.0;
  double beta = 2.0;

  bool uses_points() const { return kind == ModelKind::Pttr || branches != BranchMode::BevOnly; }
  bool uses_bev() const { return kind == ModelKind::PttrPlusPlus && branches != BranchMode::PointOnly; }
  bool fuses() const { return kind == ModelKind::PttrPlusPlus && branches == BranchMode::Fused; }

  void validate() const {
    backbone.validate();
    if (template_counts.size() != backbone.sample_counts.size()) {
      throw ConfigError("template_counts must have one entry per backbone level");
    }
    if (search_points < 1 || template_points < 1) throw ConfigError("input point counts must be positive");
    if (prt_depth < 1) throw ConfigError("prt_depth must be >= 1");
    if (uses_bev()) {
      if (bev_widths.empty()) throw ConfigError("bev_widths must not be empty");
      (void)bev.downsampled(Index(1) << bev_widths.size());
      if (bev_channels % 4 != 0) throw ConfigError("bev_channels must be a multiple of 4");
    }
    if (fuses() && fusion != FusionMode::Addition) {
      const int c = fusion_branch == FusionBranch::Point ? backbone.widths.back() : bev_widths.back();
      if (se_reduction < 1 || c % se_reduction != 0) {
        throw ConfigError("fusion width " + std::to_string(c) + " not divisible by se_reduction " +
                          std::to_string(se_reduction));
      }
    }
  }
};

/// Template and search clouds in their canonical frames. `box_size` is the
/// (w, l, h) of the tracked object.
struct TrackInput {
  Points templ;
  Points search;
  Eigen::Vector3d box_size;
};

template <typename Scalar>
struct ModelOutput {
  Points seeds;
  std::optional<TrackPrediction<Scalar>> coarse;
  std::optional<TrackPrediction<Scalar>> fine;
  Points bev_cells;
  std::optional<TrackPrediction<Scalar>> bev;
  bool decode_bev = false;

  const TrackPrediction<Scalar>& point_final() const { return fine ? *fine : *coarse; }
};

/// The full tracker network. Parameters are created for every configured
/// component; `parameters()` lists only those the forward pass uses.
template <typename Scalar>
class TrackerNet {
 public:
  TrackerNet(ModelConfig config, RandomState& rng) : config_(std::move(config)) {
    config_.validate();
    const Index cp = config_.backbone.widths.back();
    if (config_.uses_points()) {
      search_backbone_ = PointBackbone<Scalar>("backbone", config_.backbone, rng);
      template_backbone_ = search_backbone_.with_sample_counts(config_.template_counts);
      if (config_.matcher == Matcher::Prt) prt_ = PrtWeights<Scalar>("prt", cp, config_.prt_depth, config_.ram, rng);
      head_ = CoarseHead<Scalar>("head", cp, rng);
      if (config_.use_prm) refine_ = RefineHead<Scalar>("refine", cp, config_.refine, rng);
    }
    if (config_.uses_bev()) {
      const Index cb = config_.bev_channels;
      bev_enc_ = Parameter<Scalar>("bev.enc", uniform_init<Scalar>(kPillarFeatures, cb, 1.0 / std::sqrt(11.0), rng));
      bev_prt_ = PrtWeights<Scalar>("bev.prt", cb, config_.prt_depth, config_.ram, rng);
      bev_backbone_ = BevBackbone<Scalar>("bev.backbone", cb, config_.bev_widths, rng);
      bev_head_ = CoarseHead<Scalar>("bev.head", bev_backbone_.out_channels(), rng);
    }
    if (config_.fuses()) {
      const Index co = bev_backbone_.out_channels();
      const bool to_point = config_.fusion_branch == FusionBranch::Point;
      const Index target = to_point ? cp : co;
      const Index source = to_point ? co : cp;
      if (source != target) {
        proj_ = Linear<Scalar>("fuse.proj", source, target, true, rng);
        has_proj_ = true;
      }
      if (config_.fusion != FusionMode::Addition) se_ = SeWeights<Scalar>("fuse.se", target, config_.se_reduction, rng);
    }
  }

  const ModelConfig& config() const { return config_; }

  ParameterList<Scalar> parameters() const {
    ParameterList<Scalar> p;
    if (config_.uses_points()) {
      search_backbone_.collect(p);
      if (config_.matcher == Matcher::Prt) prt_.collect(p);
      head_.collect(p);
      if (config_.use_prm) refine_.collect(p);
    }
    if (config_.uses_bev()) {
      p.add(bev_enc_);
      bev_prt_.collect(p);
      bev_backbone_.collect(p);
      bev_head_.collect(p);
    }
    if (config_.fuses()) {
      if (has_proj_) proj_.collect(p);
      if (config_.fusion != FusionMode::Addition) se_.collect(p);
    }
    return p;
  }

  SeWeights<Scalar>& fusion_weights() { return se_; }

  ModelOutput<Scalar> forward(const TrackInput& in, RandomState& rng) const {
    if (in.templ.rows() == 0) throw EmptyInputError("tracker forward: empty template");
    if (in.search.rows() == 0) throw EmptyInputError("tracker forward: empty search region");
    const Points templ = subsample(in.templ, config_.template_points, rng);
    const Points search = subsample(in.search, config_.search_points, rng);

    ModelOutput<Scalar> out;
    Tensor<Scalar> matched;
    BackboneOutput<Scalar> t_out, s_out;
    if (config_.uses_points()) {
      t_out = template_backbone_.forward(templ, SamplingStrategy::DFPS, nullptr, rng);
      s_out = search_backbone_.forward(search, config_.sampling, &t_out, rng);
      matched = config_.matcher == Matcher::Prt ? prt_forward(s_out.features, t_out.features, prt_).matched
                                                : cosine_match(s_out.features, t_out.features);
      out.seeds = s_out.xyz;
    }

    std::optional<BevGrid<Scalar>> bev_feat;
    if (config_.uses_bev()) {
      BevGrid<Scalar> sg = encode_pillars(pillarize(search, config_.bev, in.box_size), bev_enc_.tensor());
      BevGrid<Scalar> tg = encode_pillars(pillarize(templ, config_.bev, in.box_size), bev_enc_.tensor());
      bev_feat = bev_backbone_(bev_match(sg, tg, bev_prt_));
      out.bev_cells = bev_feat->geometry.cell_centers(0.0);
    }

    if (config_.fuses()) {
      if (config_.fusion_branch == FusionBranch::Point) {
        Tensor<Scalar> b = bev_to_point(*bev_feat, out.seeds);
        if (has_proj_) b = proj_(b);
        matched = selective_fuse(matched, b, config_.fusion, se_);
      } else {
        Tensor<Scalar> b = point_to_bev(matched, out.seeds, bev_feat->geometry).features;
        if (has_proj_) b = proj_(b);
        bev_feat->features = selective_fuse(bev_feat->features, b, config_.fusion, se_);
      }
    }

    if (config_.uses_points()) {
      out.coarse = head_(matched);
      if (config_.use_prm) {
        out.fine = refine_(*out.coarse, out.seeds, s_out.xyz, s_out.features, t_out.xyz, t_out.features, matched);
      }
    }
    if (bev_feat) out.bev = bev_head_(bev_feat->features);
    out.decode_bev = !config_.uses_points() || (config_.fuses() && config_.fusion_branch == FusionBranch::Bev);
    return out;
  }

  /// Decoded box in the canonical frame; `ref` is the reference box there.
  Box3D decode(const ModelOutput<Scalar>& out, const Box3D& ref) const {
    if (out.decode_bev) return decode_box(*out.bev, out.bev_cells, ref, config_.decode);
    return decode_box(out.point_final(), out.seeds, ref, config_.decode);
  }

  Tensor<Scalar> loss(const ModelOutput<Scalar>& out, const Box3D& gt, const Box3D& ref) const {
    if (config_.kind == ModelKind::Pttr) {
      return total_loss(*out.coarse, out.fine, assign_targets<Scalar>(out.seeds, gt, ref),
                        static_cast<Scalar>(config_.lambda));
    }
    const auto alpha = static_cast<Scalar>(config_.alpha);
    const auto beta = static_cast<Scalar>(config_.beta);
    std::optional<Tensor<Scalar>> point_loss, bev_loss;
    if (out.coarse) {
      const auto tgt = assign_targets<Scalar>(out.seeds, gt, ref);
      point_loss = prediction_loss(out.point_final(), tgt, alpha);
      if (out.fine) {
        point_loss = add(scale(*point_loss, static_cast<Scalar>(config_.lambda)), prediction_loss(*out.coarse, tgt, alpha));
      }
    }
    if (out.bev) bev_loss = prediction_loss(*out.bev, assign_targets<Scalar>(out.bev_cells, gt, ref), beta);
    if (point_loss && bev_loss) return add(*point_loss, *bev_loss);
    return point_loss ? *point_loss : *bev_loss;
  }

 private:
  static Points subsample(const Points& cloud, int k, RandomState& rng) {
    const SampleIndices s = sample_random(static_cast<int>(cloud.rows()), k, rng);
    Points out(static_cast<Index>(s.indices.size()), 3);
    for (std::size_t i = 0; i < s.indices.size(); ++i) out.row(static_cast<Index>(i)) = cloud.row(s.indices[i]);
    return out;
  }

  ModelConfig config_;
  PointBackbone<Scalar> search_backbone_;
  PointBackbone<Scalar> template_backbone_;
  PrtWeights<Scalar> prt_;
  CoarseHead<Scalar> head_;
  RefineHead<Scalar> refine_;
  Parameter<Scalar> bev_enc_;
  PrtWeights<Scalar> bev_prt_;
  BevBackbone<Scalar> bev_backbone_;
  CoarseHead<Scalar> bev_head_;
  Linear<Scalar> proj_;
  bool has_proj_ = false;
  SeWeights<Scalar> se_;
};

}  // namespace pttr
