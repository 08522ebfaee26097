#ifndef ERRNET_OPS_HPP_
#define ERRNET_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "errnet/tensor.hpp"

namespace errnet {

/// Kernel (out_ch, in_ch, kH, kW) and bias (1, out_ch, 1, 1).
struct Conv2dParams {
  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t dilation = 1;
};

/// Dilated cross-correlation plus bias.
/// Output extent is floor((H + 2*pad - ((kH-1)*dilation + 1)) / stride) + 1.
Tensor conv2d(const Tensor& input, const Conv2dParams& params);

/// Bilinear interpolation with half-pixel centres (align_corners = false).
Tensor bilinear_resize(const Tensor& input, std::size_t out_h, std::size_t out_w);

Tensor concat_channels(const std::vector<Tensor>& inputs);
Tensor slice_channels(const Tensor& input, std::size_t begin, std::size_t count);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor one_minus(const Tensor& a);
Tensor scale(const Tensor& a, Real factor);

Tensor sigmoid(const Tensor& input);
/// Subgradient at exactly zero is 0.
Tensor relu(const Tensor& input);

/// Mean over each window; padded zeros count toward the kernel area.
Tensor avg_pool(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding);

/// Repeats a single-channel map `copies` times along the channel axis.
Tensor stack_channels(const Tensor& input, std::size_t copies);

/// Sum of all elements as a 1x1x1x1 tensor.
Tensor sum(const Tensor& input);

/// Scalar sigmoid that never overflows.
Real stable_sigmoid(Real x);

namespace testing {

/// Scales the sigmoid backward pass; 1.0 restores it. Negative control for
/// gradient checking only.
void set_sigmoid_backward_fault(Real factor);

/// While alive, relu() on this thread folds its active/inactive pattern into
/// a running hash. Two evaluations with equal hashes lie on the same smooth
/// piece of a ReLU network.
class ReluSignatureScope {
 public:
  ReluSignatureScope();
  ~ReluSignatureScope();
  ReluSignatureScope(const ReluSignatureScope&) = delete;
  ReluSignatureScope& operator=(const ReluSignatureScope&) = delete;

  /// Hash accumulated since construction or the previous take().
  std::uint64_t take();

 private:
  bool previous_;
};

}  // namespace testing

}  // namespace errnet

#endif  // ERRNET_OPS_HPP_
