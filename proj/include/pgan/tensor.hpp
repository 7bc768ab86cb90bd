#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgan {

using Shape = std::vector<std::size_t>;

/// Thrown when an operation's preconditions (shapes, ranges) are not met.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a forward or backward pass produces NaN/Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  // Nodes created by an op carry their inputs and a rule that pushes
  // this->grad into the inputs' grad buffers.
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;
  const char* op = "leaf";

  bool is_leaf() const { return !backward_fn; }
  std::vector<T>& ensure_grad();
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// Dense row-major tensor (images are C x H x W) with reverse-mode autodiff.
/// Copies share the underlying node; use clone() or detach() for a new buffer.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Node = TensorNode<T>;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node().shape; }
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const { return node().data.size(); }

  std::span<const T> data() const { return node().data; }
  /// Direct write access; only meaningful on leaves (e.g. optimizer updates).
  std::span<T> mutable_data() { return node().data; }
  T at(std::size_t flat) const { return node().data.at(flat); }
  T item() const;

  bool requires_grad() const { return node().requires_grad; }
  void set_requires_grad(bool flag);
  bool has_grad() const { return !node().grad.empty(); }
  std::span<const T> grad() const { return node().grad; }
  void zero_grad();

  bool is_leaf() const { return node().is_leaf(); }
  const char* op_name() const { return node().op; }

  /// Same data, cut from the graph, never requires grad.
  Tensor detach() const;
  /// Independent leaf copy with the same requires_grad flag.
  Tensor clone() const;

  bool all_finite() const;
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  /// Reverse-mode pass from a scalar. Leaf gradients accumulate across calls.
  void backward() const;

  std::shared_ptr<Node> node_ptr() const { return node_; }

 private:
  Node& node() const;
  std::shared_ptr<Node> node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace pgan
