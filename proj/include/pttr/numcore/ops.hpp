#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pttr/numcore/tensor.hpp"

namespace pttr {

namespace detail {

[[noreturn]] inline void dimension_error(const char* op, Index ar, Index ac, Index br, Index bc) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(ar, ac) +
                       " and " + shape_string(br, bc));
}

// Broadcast extent for one axis: equal, or one side is 1.
inline Index broadcast_extent(const char* op, Index a, Index b, Index ar, Index ac, Index br,
                              Index bc) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  dimension_error(op, ar, ac, br, bc);
}

template <typename Scalar>
Matrix<Scalar> expand(const Matrix<Scalar>& x, Index rows, Index cols) {
  if (x.rows() == rows && x.cols() == cols) return x;
  return x.replicate(rows / x.rows(), cols / x.cols());
}

// Sums a broadcast gradient back down to the operand's shape.
template <typename Scalar>
Matrix<Scalar> reduce_to(const Matrix<Scalar>& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  Matrix<Scalar> out = g;
  if (rows == 1 && g.rows() != 1) out = out.colwise().sum().eval();
  if (cols == 1 && g.cols() != 1) out = out.rowwise().sum().eval();
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

/// Matrix product a * b.
template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.rows()) detail::dimension_error("matmul", a.rows(), a.cols(), b.rows(), b.cols());
  Matrix<Scalar> out = a.value() * b.value();
  return Tensor<Scalar>::from_op("matmul", std::move(out), {a, b}, [](auto& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

/// a * b^T without materializing the transpose.
template <typename Scalar>
Tensor<Scalar> matmul_transposed(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.cols()) {
    detail::dimension_error("matmul_transposed", a.rows(), a.cols(), b.rows(), b.cols());
  }
  Matrix<Scalar> out = a.value() * b.value().transpose();
  return Tensor<Scalar>::from_op("matmul_transposed", std::move(out), {a, b}, [](auto& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value);
    if (pb.requires_grad) pb.accumulate(self.grad.transpose() * pa.value);
  });
}

template <typename Scalar>
Tensor<Scalar> transpose(const Tensor<Scalar>& a) {
  Matrix<Scalar> out = a.value().transpose();
  return Tensor<Scalar>::from_op("transpose", std::move(out), {a}, [](auto& self) {
    self.parents[0]->accumulate(self.grad.transpose());
  });
}

// ---------------------------------------------------------------------------
// Elementwise binary ops. Each axis must match or be 1 on one side.

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const Index r = detail::broadcast_extent("add", a.rows(), b.rows(), a.rows(), a.cols(), b.rows(), b.cols());
  const Index c = detail::broadcast_extent("add", a.cols(), b.cols(), a.rows(), a.cols(), b.rows(), b.cols());
  Matrix<Scalar> out = detail::expand(a.value(), r, c) + detail::expand(b.value(), r, c);
  return Tensor<Scalar>::from_op("add", std::move(out), {a, b}, [](auto& self) {
    for (auto& p : self.parents) {
      if (p->requires_grad) p->accumulate(detail::reduce_to(self.grad, p->value.rows(), p->value.cols()));
    }
  });
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const Index r = detail::broadcast_extent("sub", a.rows(), b.rows(), a.rows(), a.cols(), b.rows(), b.cols());
  const Index c = detail::broadcast_extent("sub", a.cols(), b.cols(), a.rows(), a.cols(), b.rows(), b.cols());
  Matrix<Scalar> out = detail::expand(a.value(), r, c) - detail::expand(b.value(), r, c);
  return Tensor<Scalar>::from_op("sub", std::move(out), {a, b}, [](auto& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(detail::reduce_to(self.grad, pa.value.rows(), pa.value.cols()));
    if (pb.requires_grad) {
      pb.accumulate(detail::reduce_to<Scalar>(-self.grad, pb.value.rows(), pb.value.cols()));
    }
  });
}

template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const Index r = detail::broadcast_extent("mul", a.rows(), b.rows(), a.rows(), a.cols(), b.rows(), b.cols());
  const Index c = detail::broadcast_extent("mul", a.cols(), b.cols(), a.rows(), a.cols(), b.rows(), b.cols());
  Matrix<Scalar> out =
      detail::expand(a.value(), r, c).cwiseProduct(detail::expand(b.value(), r, c));
  return Tensor<Scalar>::from_op("mul", std::move(out), {a, b}, [r, c](auto& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      Matrix<Scalar> g = self.grad.cwiseProduct(detail::expand(pb.value, r, c));
      pa.accumulate(detail::reduce_to(g, pa.value.rows(), pa.value.cols()));
    }
    if (pb.requires_grad) {
      Matrix<Scalar> g = self.grad.cwiseProduct(detail::expand(pa.value, r, c));
      pb.accumulate(detail::reduce_to(g, pb.value.rows(), pb.value.cols()));
    }
  });
}

/// alpha * x + beta, elementwise.
template <typename Scalar>
Tensor<Scalar> affine(const Tensor<Scalar>& x, Scalar alpha, Scalar beta = Scalar(0)) {
  Matrix<Scalar> out = (alpha * x.value().array() + beta).matrix();
  return Tensor<Scalar>::from_op("affine", std::move(out), {x}, [alpha](auto& self) {
    self.parents[0]->accumulate(alpha * self.grad);
  });
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& x, Scalar alpha) {
  return affine(x, alpha, Scalar(0));
}

// ---------------------------------------------------------------------------
// Activations

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x) {
  Matrix<Scalar> out = x.value().cwiseMax(Scalar(0));
  return Tensor<Scalar>::from_op("relu", std::move(out), {x}, [](auto& self) {
    auto& p = *self.parents[0];
    p.accumulate((p.value.array() > Scalar(0)).select(self.grad.array(), Scalar(0)).matrix());
  });
}

template <typename Scalar>
Matrix<Scalar> sigmoid_values(const Matrix<Scalar>& x) {
  // Split by sign so neither branch overflows.
  return x.unaryExpr([](Scalar v) {
    if (v >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-v));
    const Scalar e = std::exp(v);
    return e / (Scalar(1) + e);
  });
}

template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& x) {
  Matrix<Scalar> out = sigmoid_values(x.value());
  return Tensor<Scalar>::from_op("sigmoid", out, {x}, [y = out](auto& self) {
    self.parents[0]->accumulate(
        self.grad.cwiseProduct(y.cwiseProduct((Scalar(1) - y.array()).matrix())));
  });
}

/// Row-wise softmax with max subtraction.
template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& x) {
  Matrix<Scalar> out = x.value();
  for (Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return Tensor<Scalar>::from_op("softmax_rows", out, {x}, [y = out](auto& self) {
    Matrix<Scalar> g = self.grad.cwiseProduct(y);
    const Matrix<Scalar> dots = g.rowwise().sum();
    g -= (y.array().colwise() * dots.col(0).array()).matrix();
    self.parents[0]->accumulate(g);
  });
}

/// Divides each row by max(norm, eps).
template <typename Scalar>
Tensor<Scalar> l2_normalize_rows(const Tensor<Scalar>& x, Scalar eps = Scalar(1e-12)) {
  if (!(eps > Scalar(0))) throw ValidationError("l2_normalize_rows: eps must be positive");
  const Matrix<Scalar> norms = x.value().rowwise().norm();
  Matrix<Scalar> denom = norms.cwiseMax(eps);
  Matrix<Scalar> out = x.value().array().colwise() / denom.col(0).array();
  return Tensor<Scalar>::from_op(
      "l2_normalize_rows", out, {x}, [y = out, norms, denom, eps](auto& self) {
        Matrix<Scalar> g(self.grad.rows(), self.grad.cols());
        for (Index i = 0; i < g.rows(); ++i) {
          if (norms(i, 0) > eps) {
            const Scalar d = self.grad.row(i).dot(y.row(i));
            g.row(i) = (self.grad.row(i) - d * y.row(i)) / denom(i, 0);
          } else {
            g.row(i) = self.grad.row(i) / eps;
          }
        }
        self.parents[0]->accumulate(g);
      });
}

// ---------------------------------------------------------------------------
// Shape manipulation

template <typename Scalar>
Tensor<Scalar> concat_cols(const std::vector<Tensor<Scalar>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      detail::dimension_error("concat_cols", rows, parts.front().cols(), p.rows(), p.cols());
    }
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return Tensor<Scalar>::from_op("concat_cols", std::move(out), parts, [offsets](auto& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto& p = *self.parents[k];
      if (p.requires_grad) p.accumulate(self.grad.middleCols(offsets[k], p.value.cols()));
    }
  });
}

template <typename Scalar>
Tensor<Scalar> concat_last_dim(const std::vector<Tensor<Scalar>>& parts) {
  return concat_cols(parts);
}

template <typename Scalar>
Tensor<Scalar> slice_cols(const Tensor<Scalar>& x, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > x.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(start) + "," +
                         std::to_string(start + count) + ") outside " + x.shape_string());
  }
  Matrix<Scalar> out = x.value().middleCols(start, count);
  return Tensor<Scalar>::from_op("slice_cols", std::move(out), {x}, [start, count](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    g.middleCols(start, count) = self.grad;
    p.accumulate(g);
  });
}

/// Row gather; repeated indices accumulate in the backward pass.
template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& x, const std::vector<int>& index) {
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  Matrix<Scalar> out(static_cast<Index>(index.size()), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= x.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(index[i]) + " outside " +
                           x.shape_string());
    }
    out.row(static_cast<Index>(i)) = x.value().row(index[i]);
  }
  return Tensor<Scalar>::from_op("gather_rows", std::move(out), {x}, [index](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < index.size(); ++i) g.row(index[i]) += self.grad.row(static_cast<Index>(i));
    p.accumulate(g);
  });
}

// ---------------------------------------------------------------------------
// Reductions

/// Maximum along an axis: axis 0 collapses rows (result 1 x n), axis 1
/// collapses columns (result m x 1). Ties route the gradient to the first max.
template <typename Scalar>
Tensor<Scalar> max_over_axis(const Tensor<Scalar>& x, int axis) {
  const auto& v = x.value();
  if (axis == 0) {
    Matrix<Scalar> out(1, v.cols());
    std::vector<Index> arg(static_cast<std::size_t>(v.cols()));
    for (Index c = 0; c < v.cols(); ++c) {
      Index best = 0;
      out(0, c) = v.col(c).maxCoeff(&best);
      arg[static_cast<std::size_t>(c)] = best;
    }
    return Tensor<Scalar>::from_op("max_over_axis", std::move(out), {x}, [arg](auto& self) {
      auto& p = *self.parents[0];
      Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
      for (std::size_t c = 0; c < arg.size(); ++c) g(arg[c], static_cast<Index>(c)) = self.grad(0, static_cast<Index>(c));
      p.accumulate(g);
    });
  }
  if (axis == 1) {
    Matrix<Scalar> out(v.rows(), 1);
    std::vector<Index> arg(static_cast<std::size_t>(v.rows()));
    for (Index r = 0; r < v.rows(); ++r) {
      Index best = 0;
      out(r, 0) = v.row(r).maxCoeff(&best);
      arg[static_cast<std::size_t>(r)] = best;
    }
    return Tensor<Scalar>::from_op("max_over_axis", std::move(out), {x}, [arg](auto& self) {
      auto& p = *self.parents[0];
      Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
      for (std::size_t r = 0; r < arg.size(); ++r) g(static_cast<Index>(r), arg[r]) = self.grad(static_cast<Index>(r), 0);
      p.accumulate(g);
    });
  }
  throw DimensionError("max_over_axis: axis must be 0 or 1");
}

template <typename Scalar>
Tensor<Scalar> mean_over_axis(const Tensor<Scalar>& x, int axis) {
  if (axis == 0) {
    Matrix<Scalar> out = x.value().colwise().mean();
    const Scalar n = static_cast<Scalar>(x.rows());
    return Tensor<Scalar>::from_op("mean_over_axis", std::move(out), {x}, [n](auto& self) {
      auto& p = *self.parents[0];
      p.accumulate((self.grad / n).replicate(p.value.rows(), 1));
    });
  }
  if (axis == 1) {
    Matrix<Scalar> out = x.value().rowwise().mean();
    const Scalar n = static_cast<Scalar>(x.cols());
    return Tensor<Scalar>::from_op("mean_over_axis", std::move(out), {x}, [n](auto& self) {
      auto& p = *self.parents[0];
      p.accumulate((self.grad / n).replicate(1, p.value.cols()));
    });
  }
  throw DimensionError("mean_over_axis: axis must be 0 or 1");
}

/// Channel-wise max over consecutive row segments; segment s spans rows
/// [offsets[s], offsets[s+1]). Every segment must be non-empty.
template <typename Scalar>
Tensor<Scalar> segment_max(const Tensor<Scalar>& x, const std::vector<Index>& offsets) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.rows()) {
    throw DimensionError("segment_max: offsets must span all " + std::to_string(x.rows()) + " rows");
  }
  const Index segments = static_cast<Index>(offsets.size()) - 1;
  const Index cols = x.cols();
  Matrix<Scalar> out(segments, cols);
  std::vector<Index> arg(static_cast<std::size_t>(segments * cols));
  const auto& v = x.value();
  for (Index s = 0; s < segments; ++s) {
    const Index lo = offsets[static_cast<std::size_t>(s)];
    const Index hi = offsets[static_cast<std::size_t>(s) + 1];
    if (hi <= lo) throw DimensionError("segment_max: empty segment");
    out.row(s) = v.row(lo);
    for (Index c = 0; c < cols; ++c) arg[static_cast<std::size_t>(s * cols + c)] = lo;
    for (Index r = lo + 1; r < hi; ++r) {
      for (Index c = 0; c < cols; ++c) {
        if (v(r, c) > out(s, c)) {
          out(s, c) = v(r, c);
          arg[static_cast<std::size_t>(s * cols + c)] = r;
        }
      }
    }
  }
  return Tensor<Scalar>::from_op("segment_max", std::move(out), {x}, [arg, cols](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (Index s = 0; s < self.grad.rows(); ++s) {
      for (Index c = 0; c < cols; ++c) g(arg[static_cast<std::size_t>(s * cols + c)], c) += self.grad(s, c);
    }
    p.accumulate(g);
  });
}

/// Max over consecutive groups of `group` rows: (m * group) x c -> m x c.
template <typename Scalar>
Tensor<Scalar> group_max_rows(const Tensor<Scalar>& x, Index group) {
  if (group <= 0 || x.rows() % group != 0) {
    throw DimensionError("group_max_rows: " + std::to_string(x.rows()) +
                         " rows not divisible into groups of " + std::to_string(group));
  }
  std::vector<Index> offsets;
  for (Index r = 0; r <= x.rows(); r += group) offsets.push_back(r);
  return segment_max(x, offsets);
}

template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = x.value().sum();
  return Tensor<Scalar>::from_op("sum", std::move(out), {x}, [](auto& self) {
    auto& p = *self.parents[0];
    p.accumulate(Matrix<Scalar>::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
  });
}

template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& x) {
  return scale(sum(x), Scalar(1) / static_cast<Scalar>(x.size()));
}

// ---------------------------------------------------------------------------
// Fixed sparse row combination

/// Constant sparse operator out[r] = sum_k weight_k * in[src_k] over entries
/// with dst_k == r. Used for scatter, grid pooling and bilinear resampling.
struct RowMixer {
  struct Entry {
    Index dst;
    Index src;
    double weight;
  };
  Index out_rows = 0;
  Index in_rows = 0;
  std::vector<Entry> entries;
};

template <typename Scalar>
Tensor<Scalar> row_mix(const Tensor<Scalar>& x, const RowMixer& mixer) {
  if (x.rows() != mixer.in_rows) {
    throw DimensionError("row_mix: operator expects " + std::to_string(mixer.in_rows) +
                         " input rows, got " + x.shape_string());
  }
  Matrix<Scalar> out = Matrix<Scalar>::Zero(mixer.out_rows, x.cols());
  for (const auto& e : mixer.entries) out.row(e.dst) += static_cast<Scalar>(e.weight) * x.value().row(e.src);
  return Tensor<Scalar>::from_op("row_mix", std::move(out), {x}, [mixer](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (const auto& e : mixer.entries) g.row(e.src) += static_cast<Scalar>(e.weight) * self.grad.row(e.dst);
    p.accumulate(g);
  });
}

// ---------------------------------------------------------------------------
// Convolution support

/// Patch extraction for a 3x3 kernel with zero padding 1 on a row-major
/// (h * w) x c feature grid. Output is (oh * ow) x (9 * c), patch-major
/// (kernel offset outer, channel inner).
template <typename Scalar>
Tensor<Scalar> im2col3x3(const Tensor<Scalar>& x, Index h, Index w, Index stride) {
  if (h * w != x.rows()) {
    throw DimensionError("im2col3x3: grid " + std::to_string(h) + "x" + std::to_string(w) +
                         " does not match " + x.shape_string());
  }
  if (stride < 1) throw DimensionError("im2col3x3: stride must be >= 1");
  const Index c = x.cols();
  const Index oh = (h - 1) / stride + 1;
  const Index ow = (w - 1) / stride + 1;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(oh * ow, 9 * c);
  const auto& v = x.value();
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      for (Index k = 0; k < 9; ++k) {
        const Index iy = oy * stride + k / 3 - 1;
        const Index ix = ox * stride + k % 3 - 1;
        if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
        out.block(oy * ow + ox, k * c, 1, c) = v.row(iy * w + ix);
      }
    }
  }
  return Tensor<Scalar>::from_op("im2col3x3", std::move(out), {x}, [h, w, c, oh, ow, stride](auto& self) {
    auto& p = *self.parents[0];
    Matrix<Scalar> g = Matrix<Scalar>::Zero(h * w, c);
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        for (Index k = 0; k < 9; ++k) {
          const Index iy = oy * stride + k / 3 - 1;
          const Index ix = ox * stride + k % 3 - 1;
          if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
          g.row(iy * w + ix) += self.grad.block(oy * ow + ox, k * c, 1, c);
        }
      }
    }
    p.accumulate(g);
  });
}

// ---------------------------------------------------------------------------
// Affine map

/// x * w (+ b) over the trailing dimension; b is 1 x out.
template <typename Scalar>
Tensor<Scalar> linear(const Tensor<Scalar>& x, const Tensor<Scalar>& w) {
  if (x.cols() != w.rows()) detail::dimension_error("linear", x.rows(), x.cols(), w.rows(), w.cols());
  return matmul(x, w);
}

template <typename Scalar>
Tensor<Scalar> linear(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const Tensor<Scalar>& b) {
  if (x.cols() != w.rows()) detail::dimension_error("linear", x.rows(), x.cols(), w.rows(), w.cols());
  if (b.rows() != 1 || b.cols() != w.cols()) {
    detail::dimension_error("linear(bias)", w.rows(), w.cols(), b.rows(), b.cols());
  }
  Matrix<Scalar> out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return Tensor<Scalar>::from_op("linear", std::move(out), {x, w, b}, [](auto& self) {
    auto& px = *self.parents[0];
    auto& pw = *self.parents[1];
    auto& pb = *self.parents[2];
    if (px.requires_grad) px.accumulate(self.grad * pw.value.transpose());
    if (pw.requires_grad) pw.accumulate(px.value.transpose() * self.grad);
    if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
  });
}

}  // namespace pttr
