#pragma once

// Shared oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pttr/numcore.hpp"

namespace pttr::testing {

using TensorD = Tensor<double>;
using MatrixD = Matrix<double>;

inline MatrixD random_matrix(Index rows, Index cols, RandomState& rng, double lo = -1.0, double hi = 1.0) {
  MatrixD m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline TensorD leaf(const MatrixD& m) { return TensorD(m, true); }

/// Scalar probe of an arbitrary-shape output: sum(out .* weights).
inline TensorD project(const TensorD& out, const MatrixD& weights) { return sum(mul(out, TensorD(weights))); }

/// Central-difference check of d loss / d inputs. Returns the worst relative
/// error ||analytic - numeric|| / max(||analytic||, ||numeric||, floor) over
/// the inputs.
inline double gradient_error(const std::function<TensorD()>& loss_fn, const std::vector<TensorD>& inputs,
                             double h = 1e-5, double floor = 1e-8) {
  for (auto in : inputs) in.zero_grad();
  TensorD loss = loss_fn();
  backward(loss);
  double worst = 0.0;
  for (auto in : inputs) {
    MatrixD analytic = in.has_grad() ? in.grad() : MatrixD::Zero(in.rows(), in.cols());
    MatrixD numeric(in.rows(), in.cols());
    {
      NoGradGuard guard;
      for (Index i = 0; i < in.size(); ++i) {
        double& x = in.mutable_value().data()[i];
        const double saved = x;
        x = saved + h;
        const double up = loss_fn().item();
        x = saved - h;
        const double down = loss_fn().item();
        x = saved;
        numeric.data()[i] = (up - down) / (2.0 * h);
      }
    }
    const double scale = std::max({analytic.norm(), numeric.norm(), floor});
    worst = std::max(worst, (analytic - numeric).norm() / scale);
  }
  return worst;
}

}  // namespace pttr::testing
