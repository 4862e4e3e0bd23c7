#include "pttr/harness/metrics.hpp"

#include "pttr/errors.hpp"

namespace pttr {

double ope_threshold(int i, double range) { return range * static_cast<double>(i) / (kOpeGridPoints - 1); }

namespace {

template <typename Pass>
Curve curve(const std::vector<FrameScore>& frames, double range, Pass pass) {
  Curve c;
  c.reserve(kOpeGridPoints);
  for (int i = 0; i < kOpeGridPoints; ++i) {
    const double t = ope_threshold(i, range);
    std::size_t hits = 0;
    for (const auto& f : frames) hits += pass(f, t) ? 1 : 0;
    c.emplace_back(t, frames.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(frames.size()));
  }
  return c;
}

double area(const Curve& c) {
  double s = 0.0;
  for (const auto& [t, frac] : c) s += frac;
  return 100.0 * s / static_cast<double>(c.size());
}

}  // namespace

Curve success_curve(const std::vector<FrameScore>& frames) {
  return curve(frames, kSuccessRange, [](const FrameScore& f, double t) { return f.iou >= t; });
}

Curve precision_curve(const std::vector<FrameScore>& frames) {
  return curve(frames, kPrecisionRange, [](const FrameScore& f, double t) { return f.distance <= t; });
}

OPEResult compute_ope(std::vector<FrameScore> frames) {
  if (frames.empty()) throw EmptyInputError("compute_ope: no frames");
  OPEResult r;
  r.success = area(success_curve(frames));
  r.precision = area(precision_curve(frames));
  r.per_frame = std::move(frames);
  return r;
}

}  // namespace pttr
