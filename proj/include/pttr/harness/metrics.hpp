#pragma once

#include <utility>
#include <vector>

namespace pttr {

struct FrameScore {
  double iou = 0.0;
  double distance = 0.0;
};

struct OPEResult {
  double success = 0.0;    // 100 * mean over the IoU grid of fraction(iou >= t)
  double precision = 0.0;  // 100 * mean over the distance grid of fraction(dist <= t)
  std::vector<FrameScore> per_frame;
};

/// Thresholds per curve: t_i = i * range / 200, i = 0..200, endpoints included.
inline constexpr int kOpeGridPoints = 201;
inline constexpr double kSuccessRange = 1.0;
inline constexpr double kPrecisionRange = 2.0;

using Curve = std::vector<std::pair<double, double>>;

double ope_threshold(int i, double range);
Curve success_curve(const std::vector<FrameScore>& frames);
Curve precision_curve(const std::vector<FrameScore>& frames);

/// Throws EmptyInputError on an empty list.
OPEResult compute_ope(std::vector<FrameScore> frames);

}  // namespace pttr
