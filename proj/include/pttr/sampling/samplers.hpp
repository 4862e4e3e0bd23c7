#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pttr/errors.hpp"
#include "pttr/numcore/random.hpp"

namespace pttr {

enum class SamplingStrategy { Random, DFPS, FFPS, RAS, RASHybrid };

inline const char* to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::Random: return "random";
    case SamplingStrategy::DFPS: return "dfps";
    case SamplingStrategy::FFPS: return "ffps";
    case SamplingStrategy::RAS: return "ras";
    case SamplingStrategy::RASHybrid: return "ras_hybrid";
  }
  return "?";
}

inline SamplingStrategy sampling_strategy_from_string(const std::string& s) {
  if (s == "random") return SamplingStrategy::Random;
  if (s == "dfps") return SamplingStrategy::DFPS;
  if (s == "ffps") return SamplingStrategy::FFPS;
  if (s == "ras") return SamplingStrategy::RAS;
  if (s == "ras_hybrid") return SamplingStrategy::RASHybrid;
  throw ConfigError("unknown sampling strategy: " + s);
}

/// Selected row indices. `replicated` is set only when the source had fewer
/// rows than requested and indices were repeated to fill the request.
struct SampleIndices {
  std::vector<int> indices;
  SamplingStrategy strategy = SamplingStrategy::Random;
  bool replicated = false;
};

/// k indices without replacement, or all indices plus uniform padding when
/// n_pts < k.
inline SampleIndices sample_random(int n_pts, int k, RandomState& rng) {
  if (n_pts <= 0) throw EmptyInputError("sample_random: empty input");
  if (k <= 0) throw ValidationError("sample_random: k must be positive");
  SampleIndices out;
  out.strategy = SamplingStrategy::Random;
  std::vector<int> all(static_cast<std::size_t>(n_pts));
  std::iota(all.begin(), all.end(), 0);
  if (n_pts >= k) {
    // Partial Fisher-Yates.
    for (int i = 0; i < k; ++i) {
      const int j = rng.uniform_int(i, n_pts - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    out.indices.assign(all.begin(), all.begin() + k);
  } else {
    out.indices = all;
    for (int i = n_pts; i < k; ++i) out.indices.push_back(rng.uniform_int(0, n_pts - 1));
    out.replicated = true;
  }
  return out;
}

namespace detail {

// Greedy farthest-point selection over rows of `x` (any width), starting at
// row 0, ties to the lowest index.
template <typename Derived>
std::vector<int> farthest_point_order(const Eigen::MatrixBase<Derived>& x, int k) {
  const auto n = static_cast<int>(x.rows());
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(std::min(n, k)));
  std::vector<double> min_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  int current = 0;
  for (int step = 0; step < std::min(n, k); ++step) {
    chosen.push_back(current);
    min_d2[static_cast<std::size_t>(current)] = -1.0;
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (min_d2[static_cast<std::size_t>(i)] < 0.0) continue;
      const double d = (x.row(i) - x.row(current)).template cast<double>().squaredNorm();
      if (d < min_d2[static_cast<std::size_t>(i)]) min_d2[static_cast<std::size_t>(i)] = d;
      if (min_d2[static_cast<std::size_t>(i)] > best_d) {
        best_d = min_d2[static_cast<std::size_t>(i)];
        best = i;
      }
    }
    if (best < 0) break;
    current = best;
  }
  return chosen;
}

inline void pad_by_replication(SampleIndices& s, int k) {
  const std::size_t base = s.indices.size();
  for (std::size_t i = 0; s.indices.size() < static_cast<std::size_t>(k); ++i) {
    s.indices.push_back(s.indices[i % base]);
    s.replicated = true;
  }
}

}  // namespace detail

/// Distance-farthest point sampling in Euclidean coordinates.
template <typename Derived>
SampleIndices sample_dfps(const Eigen::MatrixBase<Derived>& points, int k) {
  if (points.rows() == 0) throw EmptyInputError("sample_dfps: empty input");
  if (k <= 0) throw ValidationError("sample_dfps: k must be positive");
  SampleIndices out{detail::farthest_point_order(points, k), SamplingStrategy::DFPS, false};
  detail::pad_by_replication(out, k);
  return out;
}

/// Feature-farthest point sampling: the D-FPS rule with L2 distance between
/// feature rows.
template <typename Derived>
SampleIndices sample_ffps(const Eigen::MatrixBase<Derived>& features, int k) {
  if (features.rows() == 0) throw EmptyInputError("sample_ffps: empty input");
  if (k <= 0) throw ValidationError("sample_ffps: k must be positive");
  SampleIndices out{detail::farthest_point_order(features, k), SamplingStrategy::FFPS, false};
  detail::pad_by_replication(out, k);
  return out;
}

/// For every search row, the feature distance to its nearest template row.
template <typename DerivedS, typename DerivedT>
Eigen::VectorXd ras_scores(const Eigen::MatrixBase<DerivedS>& search_feat,
                           const Eigen::MatrixBase<DerivedT>& template_feat) {
  if (template_feat.rows() == 0) throw EmptyInputError("ras_scores: empty template");
  if (search_feat.cols() != template_feat.cols()) {
    throw DimensionError("ras_scores: feature widths differ (" + std::to_string(search_feat.cols()) + " vs " +
                         std::to_string(template_feat.cols()) + ")");
  }
  const Eigen::MatrixXd s = search_feat.template cast<double>();
  const Eigen::MatrixXd t = template_feat.template cast<double>();
  Eigen::VectorXd v(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    v(i) = (t.rowwise() - s.row(i)).rowwise().squaredNorm().minCoeff();
  }
  v = v.cwiseSqrt();
  return v;
}

/// Indices of the k smallest scores, ties to the lowest index.
inline std::vector<int> smallest_k(const Eigen::VectorXd& scores, int k) {
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto kk = static_cast<std::size_t>(std::min<Eigen::Index>(k, scores.size()));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), order.end(),
                    [&](int a, int b) { return scores(a) < scores(b) || (scores(a) == scores(b) && a < b); });
  order.resize(kk);
  return order;
}

/// Relation-aware sampling only: the k rows nearest to the template in
/// feature space.
template <typename DerivedS, typename DerivedT>
SampleIndices sample_ras(const Eigen::MatrixBase<DerivedS>& search_feat,
                         const Eigen::MatrixBase<DerivedT>& template_feat, int k) {
  if (search_feat.rows() == 0) throw EmptyInputError("sample_ras: empty input");
  SampleIndices out{smallest_k(ras_scores(search_feat, template_feat), k), SamplingStrategy::RAS, false};
  detail::pad_by_replication(out, k);
  return out;
}

/// floor(k/2) rows by smallest relation score, the remainder drawn at random
/// from the rows not yet chosen. Returned order: relation half first.
template <typename DerivedS, typename DerivedT>
SampleIndices sample_ras_hybrid(const Eigen::MatrixBase<DerivedS>& search_feat,
                                const Eigen::MatrixBase<DerivedT>& template_feat, int k, RandomState& rng) {
  const auto n = static_cast<int>(search_feat.rows());
  if (n == 0) throw EmptyInputError("sample_ras_hybrid: empty input");
  if (k < 2) throw ValidationError("sample_ras_hybrid: k must be at least 2");
  const int half = k / 2;
  SampleIndices out;
  out.strategy = SamplingStrategy::RASHybrid;
  out.indices = smallest_k(ras_scores(search_feat, template_feat), half);

  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int i : out.indices) taken[static_cast<std::size_t>(i)] = 1;
  std::vector<int> rest;
  for (int i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  const int remaining = k - static_cast<int>(out.indices.size());
  if (rest.empty()) {
    detail::pad_by_replication(out, k);
    return out;
  }
  const SampleIndices extra = sample_random(static_cast<int>(rest.size()), remaining, rng);
  for (int i : extra.indices) out.indices.push_back(rest[static_cast<std::size_t>(i)]);
  out.replicated = extra.replicated;
  return out;
}

}  // namespace pttr
