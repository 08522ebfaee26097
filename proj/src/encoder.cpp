#include "errnet/encoder.hpp"

#include <stdexcept>
#include <string>

namespace errnet {

void EncoderConfig::validate() const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == 0) {
      throw std::invalid_argument("encoder.c" + std::to_string(i + 1) + " must be at least 1");
    }
  }
}

Tensor conv_block(const Tensor& input, const Conv2dParams& params) {
  return relu(conv2d(input, params));
}

Encoder::Encoder(ParameterStore& store, const EncoderConfig& config, std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  const auto& c = config_.channels;
  stem1_ = make_conv(store, "encoder.stem1", 3, c[0], 3, 2, 1, 1, rng);
  stem2_ = make_conv(store, "encoder.stem2", c[0], c[0], 3, 2, 1, 1, rng);
  e2_ = make_conv(store, "encoder.e2", c[0], c[1], 3, 1, 1, 1, rng);
  e3a_ = make_conv(store, "encoder.e3a", c[1], c[2], 3, 2, 1, 1, rng);
  e3b_ = make_conv(store, "encoder.e3b", c[2], c[2], 3, 1, 1, 1, rng);
  e4a_ = make_conv(store, "encoder.e4a", c[2], c[3], 3, 2, 1, 1, rng);
  e4b_ = make_conv(store, "encoder.e4b", c[3], c[3], 3, 1, 1, 1, rng);
  e5a_ = make_conv(store, "encoder.e5a", c[3], c[4], 3, 2, 1, 1, rng);
  e5b_ = make_conv(store, "encoder.e5b", c[4], c[4], 3, 1, 1, 1, rng);
}

FeaturePyramid Encoder::forward(const Tensor& image) const {
  const Shape& s = image.shape();
  if (s.c != 3) {
    throw std::invalid_argument("encoder expects 3 input channels, got " + std::to_string(s.c));
  }
  constexpr auto m = FeaturePyramid::kInputMultiple;
  if (s.h == 0 || s.w == 0 || s.h % m != 0 || s.w % m != 0) {
    throw std::invalid_argument("encoder input " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                                " must have height and width that are multiples of " +
                                std::to_string(m));
  }
  FeaturePyramid fp;
  fp.levels[0] = conv_block(conv_block(image, stem1_), stem2_);
  fp.levels[1] = conv_block(fp.levels[0], e2_);
  fp.levels[2] = conv_block(conv_block(fp.levels[1], e3a_), e3b_);
  fp.levels[3] = conv_block(conv_block(fp.levels[2], e4a_), e4b_);
  fp.levels[4] = conv_block(conv_block(fp.levels[3], e5a_), e5b_);
  return fp;
}

}  // namespace errnet
