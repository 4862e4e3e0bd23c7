#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pttr/harness/metrics.hpp"
#include "pttr/harness/synth.hpp"
#include "pttr/model.hpp"

namespace pttr {

struct TrackConfig {
  double extend_ratio = 0.1;
  double search_margin = 2.0;
};

/// Everything a predictor may look at for one frame. Clouds are in world
/// coordinates; `ref` is the previous prediction.
struct TrackStep {
  const TrackletSequence& seq;
  std::size_t frame;
  const PointCloud& templ;
  const Box3D& template_box;
  const PointCloud& search;
  const Box3D& ref;
};

/// Must be safe to call concurrently on distinct sequences.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Box3D predict(const TrackStep& step, RandomState& rng) const = 0;
};

/// Returns the ground truth.
class OraclePredictor : public Predictor {
 public:
  Box3D predict(const TrackStep& step, RandomState&) const override { return step.seq.frames[step.frame].gt; }
};

/// Repeats the reference box.
class FrozenPredictor : public Predictor {
 public:
  Box3D predict(const TrackStep& step, RandomState&) const override { return step.ref; }
};

/// Runs a network in the canonical frames of the template and reference boxes.
template <typename Scalar>
class NetPredictor : public Predictor {
 public:
  explicit NetPredictor(const TrackerNet<Scalar>& net) : net_(net) {}

  Box3D predict(const TrackStep& step, RandomState& rng) const override {
    NoGradGuard no_grad;
    const Eigen::Vector3d size = step.template_box.size();
    TrackInput in{step.template_box.to_local(step.templ.points), step.ref.to_local(step.search.points), size};
    const Box3D canonical(Eigen::Vector3d::Zero(), size, 0.0);
    const Box3D local = net_.decode(net_.forward(in, rng), canonical);
    return box_from_frame(local, Box3D(step.ref.center(), size, step.ref.yaw()));
  }

 private:
  const TrackerNet<Scalar>& net_;
};

struct SequenceTrack {
  std::string object_id;
  std::string class_tag;
  std::vector<Box3D> boxes;
  std::vector<FrameScore> scores;
  std::vector<bool> coasted;
  OPEResult ope;
};

/// Frame 0 is initialized from the ground truth and scored (IoU 1, distance
/// 0). Later frames search around the previous prediction; an empty search
/// region repeats the previous box. The template is re-cropped from each
/// prediction, keeping the last non-empty crop.
SequenceTrack track_sequence(const Predictor& predictor, const TrackletSequence& seq, const TrackConfig& cfg,
                             RandomState& rng);

struct EvalResult {
  std::vector<SequenceTrack> sequences;
  OPEResult overall;
  std::map<std::string, OPEResult> per_class;
};

/// Worker count from PTTRKIT_THREADS, else the hardware count (at least 1).
int evaluation_threads();

/// Tracks every sequence (sequence i uses RandomState(seed).fork(i)) on up to
/// `threads` workers (0 = evaluation_threads()). Frames are pooled over
/// sequences for the overall and per-class scores.
EvalResult evaluate(const Predictor& predictor, const std::vector<TrackletSequence>& seqs, const TrackConfig& cfg,
                    std::uint64_t seed, int threads = 0);

}  // namespace pttr
