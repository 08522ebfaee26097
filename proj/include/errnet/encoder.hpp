#ifndef ERRNET_ENCODER_HPP_
#define ERRNET_ENCODER_HPP_

#include <array>
#include <cstddef>
#include <random>

#include "errnet/ops.hpp"
#include "errnet/parameters.hpp"
#include "errnet/tensor.hpp"

namespace errnet {

struct EncoderConfig {
  std::array<std::size_t, 5> channels{16, 32, 32, 64, 64};

  static EncoderConfig desk() { return {}; }
  /// ResNet-50 stage widths.
  static EncoderConfig full_scale() { return {{64, 256, 512, 1024, 2048}}; }
  void validate() const;
};

/// Encoder hierarchies e1..e5 (index 0..4).
struct FeaturePyramid {
  static constexpr std::array<std::size_t, 5> kStrides{4, 4, 8, 16, 32};
  static constexpr std::size_t kInputMultiple = 32;

  std::array<Tensor, 5> levels;

  const Tensor& e(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
};

/// 3x3 convolution (size-preserving padding unless strided) followed by ReLU.
Tensor conv_block(const Tensor& input, const Conv2dParams& params);

/// Strided convolutional stand-in for the ResNet-50 backbone. Reproduces the
/// stride/channel topology, not the weights.
class Encoder {
 public:
  Encoder(ParameterStore& store, const EncoderConfig& config, std::mt19937_64& rng);

  /// `image` is N x 3 x H x W with H and W multiples of 32.
  FeaturePyramid forward(const Tensor& image) const;
  const EncoderConfig& config() const { return config_; }

 private:
  EncoderConfig config_;
  Conv2dParams stem1_, stem2_, e2_, e3a_, e3b_, e4a_, e4b_, e5a_, e5b_;
};

}  // namespace errnet

#endif  // ERRNET_ENCODER_HPP_
