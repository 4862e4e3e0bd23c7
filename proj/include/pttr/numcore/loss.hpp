#pragma once

#include <cmath>
#include <iostream>
#include <optional>

#include "pttr/numcore/ops.hpp"

namespace pttr {

/// Mean binary cross-entropy from logits, evaluated as
/// max(z, 0) - z * t + log(1 + exp(-|z|)).
template <typename Scalar>
Tensor<Scalar> bce_loss(const Tensor<Scalar>& logits, const Matrix<Scalar>& target) {
  if (logits.rows() != target.rows() || logits.cols() != target.cols()) {
    detail::dimension_error("bce_loss", logits.rows(), logits.cols(), target.rows(), target.cols());
  }
  for (Index i = 0; i < target.size(); ++i) {
    const Scalar t = target.data()[i];
    if (t != Scalar(0) && t != Scalar(1)) throw ValidationError("bce_loss: targets must be 0 or 1");
  }
  const auto& z = logits.value();
  const Scalar n = static_cast<Scalar>(z.size());
  Scalar total = 0;
  for (Index i = 0; i < z.size(); ++i) {
    const Scalar zi = z.data()[i];
    total += std::max(zi, Scalar(0)) - zi * target.data()[i] + std::log1p(std::exp(-std::abs(zi)));
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = total / n;
  return Tensor<Scalar>::from_op("bce_loss", std::move(out), {logits}, [target, n](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = (sigmoid_values(p.value) - target) * (self.grad(0, 0) / n);
    p.accumulate(g);
  });
}

template <typename Scalar>
Tensor<Scalar> bce_loss(const Tensor<Scalar>& logits, const Tensor<Scalar>& target) {
  return bce_loss(logits, target.value());
}

/// Mean squared error over the active rows. With a mask, the mean runs over
/// (active rows) x (columns); a fully masked input yields 0 and a warning.
template <typename Scalar>
Tensor<Scalar> mse_loss(const Tensor<Scalar>& pred, const Matrix<Scalar>& target,
                        const std::optional<Matrix<Scalar>>& mask = std::nullopt) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    detail::dimension_error("mse_loss", pred.rows(), pred.cols(), target.rows(), target.cols());
  }
  Matrix<Scalar> weights = Matrix<Scalar>::Ones(pred.rows(), 1);
  if (mask) {
    if (mask->rows() != pred.rows() || mask->cols() != 1) {
      detail::dimension_error("mse_loss(mask)", pred.rows(), 1, mask->rows(), mask->cols());
    }
    for (Index i = 0; i < mask->rows(); ++i) {
      const Scalar m = (*mask)(i, 0);
      if (m != Scalar(0) && m != Scalar(1)) throw ValidationError("mse_loss: mask must be 0 or 1");
    }
    weights = *mask;
  }
  const Scalar active = weights.sum();
  if (active == Scalar(0)) {
    std::clog << "warning: mse_loss called with every row masked; returning 0\n";
  }
  const Scalar denom = std::max(active, Scalar(1)) * static_cast<Scalar>(pred.cols());
  const Matrix<Scalar> diff = pred.value() - target;
  Matrix<Scalar> out(1, 1);
  out(0, 0) = (diff.array().square().colwise() * weights.col(0).array()).sum() / denom;
  return Tensor<Scalar>::from_op("mse_loss", std::move(out), {pred}, [diff, weights, denom](auto& self) {
    Matrix<Scalar> g = (diff.array().colwise() * weights.col(0).array()).matrix() *
                       (Scalar(2) * self.grad(0, 0) / denom);
    self.parents[0]->accumulate(g);
  });
}

}  // namespace pttr
