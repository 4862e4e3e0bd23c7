#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pttr/numcore/ops.hpp"
#include "pttr/numcore/random.hpp"

namespace pttr {

template <typename Scalar>
Matrix<Scalar> uniform_init(Index rows, Index cols, double bound, RandomState& rng) {
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  return m;
}

/// Affine layer with weight in x out and optional 1 x out bias.
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Index in, Index out, bool bias, RandomState& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight_ = Parameter<Scalar>(name + ".w", uniform_init<Scalar>(in, out, bound, rng));
    if (bias) bias_ = Parameter<Scalar>(name + ".b", uniform_init<Scalar>(1, out, bound, rng));
    has_bias_ = bias;
  }

  Tensor<Scalar> operator()(const Tensor<Scalar>& x) const {
    return has_bias_ ? linear(x, weight_.tensor(), bias_.tensor()) : linear(x, weight_.tensor());
  }

  Index in_features() const { return weight_.tensor().rows(); }
  Index out_features() const { return weight_.tensor().cols(); }
  bool has_bias() const { return has_bias_; }
  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }
  const Parameter<Scalar>& weight() const { return weight_; }
  const Parameter<Scalar>& bias() const { return bias_; }

  void collect(ParameterList<Scalar>& out) const {
    out.add(weight_);
    if (has_bias_) out.add(bias_);
  }

 private:
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  bool has_bias_ = false;
};

/// Stack of Linear layers with ReLU between them. `widths` lists every layer
/// boundary, input first: {in, h1, ..., out}.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::string& name, const std::vector<Index>& widths, bool relu_last, RandomState& rng)
      : relu_last_(relu_last) {
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      layers_.emplace_back(name + "." + std::to_string(i), widths[i], widths[i + 1], true, rng);
    }
  }

  Tensor<Scalar> operator()(const Tensor<Scalar>& x) const {
    Tensor<Scalar> h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      h = layers_[i](h);
      if (i + 1 < layers_.size() || relu_last_) h = relu(h);
    }
    return h;
  }

  std::size_t depth() const { return layers_.size(); }
  std::vector<Linear<Scalar>>& layers() { return layers_; }
  const std::vector<Linear<Scalar>>& layers() const { return layers_; }
  Index out_features() const { return layers_.back().out_features(); }

  void collect(ParameterList<Scalar>& out) const {
    for (const auto& l : layers_) l.collect(out);
  }

 private:
  std::vector<Linear<Scalar>> layers_;
  bool relu_last_ = false;
};

}  // namespace pttr
