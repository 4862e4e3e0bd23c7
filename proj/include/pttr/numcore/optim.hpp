#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "pttr/numcore/tensor.hpp"

namespace pttr {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Gradients are left in place after step();
/// call zero_grad() explicitly.
template <typename Scalar>
class Adam {
 public:
  Adam(ParameterList<Scalar> params, AdamOptions options)
      : params_(std::move(params)), options_(options) {
    for (const auto& p : params_) {
      first_.push_back(Matrix<Scalar>::Zero(p.tensor().rows(), p.tensor().cols()));
      second_.push_back(Matrix<Scalar>::Zero(p.tensor().rows(), p.tensor().cols()));
    }
  }

  void step() {
    for (const auto& p : params_) {
      if (!p.tensor().has_grad()) throw StateError("adam: parameter '" + p.name() + "' has no gradient");
    }
    ++steps_;
    const Scalar b1 = static_cast<Scalar>(options_.beta1);
    const Scalar b2 = static_cast<Scalar>(options_.beta2);
    const Scalar lr = static_cast<Scalar>(options_.learning_rate);
    const Scalar eps = static_cast<Scalar>(options_.eps);
    const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(options_.beta1, static_cast<double>(steps_)));
    const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(options_.beta2, static_cast<double>(steps_)));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& t = params_[i].tensor();
      const auto& g = t.grad();
      first_[i] = b1 * first_[i] + (Scalar(1) - b1) * g;
      second_[i] = b2 * second_[i] + (Scalar(1) - b2) * g.cwiseProduct(g);
      t.mutable_value().array() -=
          lr * (first_[i].array() / c1) / ((second_[i].array() / c2).sqrt() + eps);
    }
  }

  void zero_grad() { params_.zero_grad(); }

  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  double learning_rate() const { return options_.learning_rate; }
  long steps() const { return steps_; }
  const ParameterList<Scalar>& parameters() const { return params_; }

 private:
  ParameterList<Scalar> params_;
  AdamOptions options_;
  std::vector<Matrix<Scalar>> first_;
  std::vector<Matrix<Scalar>> second_;
  long steps_ = 0;
};

/// One Adam update over `params` with a fresh optimizer state.
template <typename Scalar>
void sgd_adam_step(const ParameterList<Scalar>& params, double lr, std::pair<double, double> betas,
                   double eps) {
  Adam<Scalar> adam(params, AdamOptions{lr, betas.first, betas.second, eps});
  adam.step();
}

/// Step decay: divide by `factor` every `period` epochs.
inline double step_decay_lr(double base, int epoch, int period, double factor) {
  if (period <= 0) return base;
  return base / std::pow(factor, epoch / period);
}

}  // namespace pttr
