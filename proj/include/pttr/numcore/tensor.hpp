#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pttr/errors.hpp"

namespace pttr {

using Index = Eigen::Index;

/// Dense row-major matrix, the storage of every tensor.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

namespace detail {

inline std::atomic<std::uint64_t>& sequence_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

template <typename Scalar>
struct Node {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool requires_grad = false;
  std::uint64_t sequence = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents.
  std::function<void(Node&)> backward;

  void accumulate(const Matrix<Scalar>& delta) {
    if (!requires_grad) return;
    if (grad.size() == 0) {
      grad = delta;
    } else {
      grad += delta;
    }
  }
};

inline std::string shape_string(Index rows, Index cols) {
  std::ostringstream out;
  out << "[" << rows << "," << cols << "]";
  return out.str();
}

}  // namespace detail

/// Disables gradient recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return detail::grad_mode(); }

/// Two-dimensional dense tensor with optional participation in reverse-mode
/// differentiation. Copies are shallow: they share value and gradient storage.
///
/// Vectors are represented as n x 1 (or 1 x n) tensors; grids are flattened to
/// (h * w) x c with the grid geometry carried by the owner.
template <typename Scalar>
class Tensor {
 public:
  using NodeType = detail::Node<Scalar>;

  Tensor() : Tensor(Matrix<Scalar>(1, 1)) { node_->value.setZero(); }

  explicit Tensor(Matrix<Scalar> value, bool requires_grad = false)
      : node_(std::make_shared<NodeType>()) {
    if (value.rows() <= 0 || value.cols() <= 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           detail::shape_string(value.rows(), value.cols()));
    }
    if (!all_finite(value)) throw NumericError("tensor constructed from non-finite values");
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
    node_->sequence = detail::sequence_counter().fetch_add(1, std::memory_order_relaxed);
  }

  /// x * 0 is NaN exactly for non-finite x, so one vectorized sum decides.
  static bool all_finite(const Matrix<Scalar>& m) { return (m.array() * Scalar(0)).sum() == Scalar(0); }

  static Tensor zeros(Index rows, Index cols) {
    return Tensor(Matrix<Scalar>::Zero(rows, cols));
  }
  static Tensor constant(Index rows, Index cols, Scalar v) {
    return Tensor(Matrix<Scalar>::Constant(rows, cols, v));
  }
  static Tensor scalar(Scalar v) { return constant(1, 1, v); }

  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::array<Index, 2> shape() const { return {rows(), cols()}; }
  std::string shape_string() const { return detail::shape_string(rows(), cols()); }

  const Matrix<Scalar>& value() const { return node_->value; }
  /// Direct write access, used by optimizers and checkpoint loading.
  Matrix<Scalar>& mutable_value() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  const Matrix<Scalar>& grad() const { return node_->grad; }
  Matrix<Scalar>& mutable_grad() { return node_->grad; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Scalar item() const {
    if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string());
    return node_->value(0, 0);
  }
  Scalar operator()(Index r, Index c) const { return node_->value(r, c); }

  /// Same values, cut from the graph.
  Tensor detach() const { return Tensor(node_->value); }

  std::uint64_t sequence() const { return node_->sequence; }
  const char* op_name() const { return node_->op; }
  const std::shared_ptr<NodeType>& node() const { return node_; }

  /// Builds an operation result. When no parent requires a gradient (or
  /// recording is disabled) the result is a plain constant.
  template <typename Backward>
  static Tensor from_op(const char* op, Matrix<Scalar> value,
                        std::initializer_list<Tensor> parents, Backward&& backward) {
    return from_op(op, std::move(value), std::vector<Tensor>(parents),
                   std::forward<Backward>(backward));
  }

  template <typename Backward>
  static Tensor from_op(const char* op, Matrix<Scalar> value, const std::vector<Tensor>& parents,
                        Backward&& backward) {
    if (!all_finite(value)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
    Tensor out(std::move(value), Unchecked{});
    out.node_->op = op;
    if (!grad_enabled()) return out;
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
    if (!any) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (const auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::forward<Backward>(backward);
    return out;
  }

 private:
  struct Unchecked {};
  Tensor(Matrix<Scalar> value, Unchecked) : node_(std::make_shared<NodeType>()) {
    if (value.rows() <= 0 || value.cols() <= 0) {
      throw DimensionError("operation result extents must be positive, got " +
                           detail::shape_string(value.rows(), value.cols()));
    }
    node_->value = std::move(value);
    node_->sequence = detail::sequence_counter().fetch_add(1, std::memory_order_relaxed);
  }

  std::shared_ptr<NodeType> node_;
};

/// Named trainable tensor.
template <typename Scalar>
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix<Scalar> init)
      : name_(std::move(name)), tensor_(std::move(init), true) {}

  const std::string& name() const { return name_; }
  const Tensor<Scalar>& tensor() const { return tensor_; }
  Tensor<Scalar>& tensor() { return tensor_; }
  operator const Tensor<Scalar>&() const { return tensor_; }  // NOLINT

 private:
  std::string name_;
  Tensor<Scalar> tensor_;
};

/// Ordered list of parameters with unique names.
template <typename Scalar>
class ParameterList {
 public:
  void add(const Parameter<Scalar>& p) {
    for (const auto& q : items_) {
      if (q.name() == p.name()) throw ConfigError("duplicate parameter name: " + p.name());
    }
    items_.push_back(p);
  }
  void append(const ParameterList& other) {
    for (const auto& p : other.items_) add(p);
  }

  const Parameter<Scalar>* find(const std::string& name) const {
    for (const auto& p : items_) {
      if (p.name() == name) return &p;
    }
    return nullptr;
  }

  std::size_t size() const { return items_.size(); }
  Index scalar_count() const {
    Index n = 0;
    for (const auto& p : items_) n += p.tensor().size();
    return n;
  }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  const Parameter<Scalar>& operator[](std::size_t i) const { return items_[i]; }
  Parameter<Scalar>& operator[](std::size_t i) { return items_[i]; }

  void zero_grad() {
    for (auto& p : items_) p.tensor().zero_grad();
  }

 private:
  std::vector<Parameter<Scalar>> items_;
};

/// Record of the differentiable operations reachable from a root tensor, in
/// execution order. backward() replays them in exact reverse order.
template <typename Scalar>
class GradTape {
 public:
  using NodeType = detail::Node<Scalar>;

  explicit GradTape(const Tensor<Scalar>& root) : root_(root) {
    std::vector<NodeType*> stack{root.node().get()};
    std::vector<NodeType*> seen;
    std::unordered_set<NodeType*> visited;
    while (!stack.empty()) {
      NodeType* node = stack.back();
      stack.pop_back();
      if (!node->requires_grad || !node->backward) continue;
      if (!visited.insert(node).second) continue;
      seen.push_back(node);
      for (const auto& p : node->parents) stack.push_back(p.get());
    }
    std::sort(seen.begin(), seen.end(),
              [](const NodeType* a, const NodeType* b) { return a->sequence < b->sequence; });
    operations_ = std::move(seen);
  }

  const std::vector<NodeType*>& operations() const { return operations_; }

  /// Seeds the root gradient with ones and propagates.
  void backward() {
    if (!root_.requires_grad()) return;
    auto& root = *root_.node();
    root.accumulate(Matrix<Scalar>::Ones(root.value.rows(), root.value.cols()));
    for (auto it = operations_.rbegin(); it != operations_.rend(); ++it) {
      NodeType& node = **it;
      if (node.grad.size() == 0) continue;
      node.backward(node);
      // Interior gradients are consumed; only leaves keep theirs.
      node.grad.resize(0, 0);
    }
  }

 private:
  Tensor<Scalar> root_;
  std::vector<NodeType*> operations_;
};

template <typename Scalar>
void backward(const Tensor<Scalar>& root) {
  GradTape<Scalar>(root).backward();
}

}  // namespace pttr
