#ifndef ERRNET_TENSOR_HPP_
#define ERRNET_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace errnet {

using Real = double;

/// (batch, channels, height, width). Every tensor in the engine is rank 4.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor;

namespace detail {

struct TensorImpl;

// One recorded operation. `backward` reads the output's data and grad and
// accumulates into the grad buffers of `inputs`.
struct Node {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::function<void(const TensorImpl& out)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // null for leaves

  // Returns the grad buffer, allocating zeros on first use.
  std::vector<Real>& grad_buffer();
};

}  // namespace detail

/// Dense rank-4 array with an optional gradient buffer.
///
/// Copies share storage. Data is immutable once an op has produced it; only
/// leaves (parameters, inputs) expose mutable data, and grads accumulate.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<Real> data, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }

  std::span<const Real> data() const;
  /// Only valid on leaves; used for parameter updates and perturbation.
  std::span<Real> mutable_data();

  Real at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const;
  /// Value of a single-element tensor.
  Real item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const Real> grad() const;
  void zero_grad();

  /// Leaf copy of the data, detached from any graph.
  Tensor detach(bool requires_grad = false) const;

  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
  static Tensor from_impl(std::shared_ptr<detail::TensorImpl> impl);

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Runs reverse-mode differentiation from a single-element loss.
/// Gradients accumulate into every requires_grad leaf reachable from it.
void backward(const Tensor& loss);

bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

using BackwardFn = std::function<void(const TensorImpl& out)>;

// Builds an op result. A graph node is attached only when recording is on
// and at least one input requires grad.
Tensor make_result(Shape shape, std::vector<Real> data, std::string op,
                   const std::vector<Tensor>& inputs, BackwardFn backward);

}  // namespace detail

}  // namespace errnet

#endif  // ERRNET_TENSOR_HPP_
