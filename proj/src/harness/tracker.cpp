#include "pttr/harness/tracker.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "pttr/geom/iou.hpp"

namespace pttr {

SequenceTrack track_sequence(const Predictor& predictor, const TrackletSequence& seq, const TrackConfig& cfg,
                             RandomState& rng) {
  if (seq.frames.empty()) throw EmptyInputError("track_sequence: empty sequence '" + seq.object_id + "'");
  SequenceTrack out;
  out.object_id = seq.object_id;
  out.class_tag = seq.class_tag;
  const Frame& first = seq.frames.front();
  Box3D prev = first.gt;
  PointCloud templ = crop_to_box(first.scene, first.gt, cfg.extend_ratio);
  Box3D template_box = first.gt;
  out.boxes.push_back(prev);
  out.scores.push_back({box_iou_3d(prev, first.gt), center_distance(prev, first.gt)});
  out.coasted.push_back(false);
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    const Frame& frame = seq.frames[t];
    const PointCloud search = make_search_region(frame.scene, prev, cfg.search_margin);
    Box3D pred = prev;
    const bool coast = search.empty() || templ.empty();
    if (!coast) pred = predictor.predict(TrackStep{seq, t, templ, template_box, search, prev}, rng);
    out.boxes.push_back(pred);
    out.scores.push_back({box_iou_3d(pred, frame.gt), center_distance(pred, frame.gt)});
    out.coasted.push_back(coast);
    PointCloud crop = crop_to_box(frame.scene, pred, cfg.extend_ratio);
    if (!crop.empty()) {
      templ = std::move(crop);
      template_box = pred;
    }
    prev = pred;
  }
  out.ope = compute_ope(out.scores);
  return out;
}

int evaluation_threads() {
  if (const char* env = std::getenv("PTTRKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError(std::string("PTTRKIT_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EvalResult evaluate(const Predictor& predictor, const std::vector<TrackletSequence>& seqs, const TrackConfig& cfg,
                    std::uint64_t seed, int threads) {
  if (seqs.empty()) throw EmptyInputError("evaluate: no sequences");
  EvalResult result;
  result.sequences.resize(seqs.size());
  const RandomState root(seed);
  const int workers = std::min<int>(threads > 0 ? threads : evaluation_threads(), static_cast<int>(seqs.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < seqs.size(); i = next++) {
      try {
        RandomState rng = root.fork(i);
        result.sequences[i] = track_sequence(predictor, seqs[i], cfg, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<FrameScore> all;
  std::map<std::string, std::vector<FrameScore>> by_class;
  for (const auto& s : result.sequences) {
    all.insert(all.end(), s.scores.begin(), s.scores.end());
    auto& c = by_class[s.class_tag];
    c.insert(c.end(), s.scores.begin(), s.scores.end());
  }
  result.overall = compute_ope(std::move(all));
  for (auto& [tag, scores] : by_class) result.per_class[tag] = compute_ope(std::move(scores));
  return result;
}

}  // namespace pttr
