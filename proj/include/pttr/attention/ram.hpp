#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "pttr/numcore/layers.hpp"

namespace pttr {

/// Switches for the attention-component ablation. The defaults are the full
/// relation attention; turning `normalize` off gives scaled dot-product
/// logits, turning `offset` off feeds the attention product to the output
/// projection directly.
struct RamOptions {
  bool normalize = true;
  bool offset = true;
};

/// Projections of one relation attention module: square query/key/value maps
/// and the output projection (linear + ReLU).
template <typename Scalar>
struct RamWeights {
  Linear<Scalar> wq;
  Linear<Scalar> wk;
  Linear<Scalar> wv;
  Linear<Scalar> out;

  RamWeights() = default;
  RamWeights(const std::string& name, Index channels, RandomState& rng, bool out_bias = true)
      : wq(name + ".wq", channels, channels, false, rng),
        wk(name + ".wk", channels, channels, false, rng),
        wv(name + ".wv", channels, channels, false, rng),
        out(name + ".out", channels, channels, out_bias, rng) {}

  Index channels() const { return wq.in_features(); }

  void collect(ParameterList<Scalar>& params) const {
    wq.collect(params);
    wk.collect(params);
    wv.collect(params);
    out.collect(params);
  }
};

template <typename Scalar>
struct RamResult {
  Tensor<Scalar> output;
  Tensor<Scalar> logits;  // pre-softmax attention, Nq x Nk
};

/// Relation attention: cosine logits between projected queries and keys,
/// row softmax, offset subtraction from the raw query, then linear + ReLU.
template <typename Scalar>
RamResult<Scalar> ram_attend_traced(const Tensor<Scalar>& q, const Tensor<Scalar>& k, const Tensor<Scalar>& v,
                                    const RamWeights<Scalar>& w, const RamOptions& options = {}) {
  const Index c = w.channels();
  if (q.cols() != c || k.cols() != c || v.cols() != c) {
    throw DimensionError("ram_attend: feature widths " + std::to_string(q.cols()) + "/" + std::to_string(k.cols()) +
                         "/" + std::to_string(v.cols()) + " do not match module width " + std::to_string(c));
  }
  if (k.rows() != v.rows()) throw DimensionError("ram_attend: key and value row counts differ");
  Tensor<Scalar> qp = w.wq(q);
  Tensor<Scalar> kp = w.wk(k);
  Tensor<Scalar> logits;
  if (options.normalize) {
    logits = matmul_transposed(l2_normalize_rows(qp), l2_normalize_rows(kp));
  } else {
    logits = scale(matmul_transposed(qp, kp), static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(c))));
  }
  Tensor<Scalar> product = matmul(softmax_rows(logits), w.wv(v));
  Tensor<Scalar> pre = options.offset ? sub(q, product) : product;
  return {relu(w.out(pre)), logits};
}

template <typename Scalar>
Tensor<Scalar> ram_attend(const Tensor<Scalar>& q, const Tensor<Scalar>& k, const Tensor<Scalar>& v,
                          const RamWeights<Scalar>& w, const RamOptions& options = {}) {
  return ram_attend_traced(q, k, v, w, options).output;
}

/// Parameter-free cosine matching used as the matching baseline: each search
/// row is summed with the softmax(cosine)-weighted mean of the template rows.
template <typename Scalar>
Tensor<Scalar> cosine_match(const Tensor<Scalar>& search, const Tensor<Scalar>& templ) {
  if (search.cols() != templ.cols()) {
    throw DimensionError("cosine_match: widths " + std::to_string(search.cols()) + " and " +
                         std::to_string(templ.cols()) + " differ");
  }
  Tensor<Scalar> sim = matmul_transposed(l2_normalize_rows(search), l2_normalize_rows(templ));
  return add(search, matmul(softmax_rows(sim), templ));
}

}  // namespace pttr
