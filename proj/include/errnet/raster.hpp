#ifndef ERRNET_RASTER_HPP_
#define ERRNET_RASTER_HPP_

#include <cstddef>
#include <vector>

#include "errnet/tensor.hpp"

namespace errnet {

/// Planar image: channel-major, then row-major. Values nominally in [0, 1].
struct Raster {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Real> values;

  Raster() = default;
  Raster(std::size_t c, std::size_t h, std::size_t w, Real fill = 0.0)
      : channels(c), height(h), width(w), values(c * h * w, fill) {}

  std::size_t pixels() const { return height * width; }
  Real& at(std::size_t y, std::size_t x, std::size_t c = 0) { return values[(c * height + y) * width + x]; }
  Real at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return values[(c * height + y) * width + x];
  }
  bool same_size(const Raster& o) const { return height == o.height && width == o.width; }
  bool operator==(const Raster&) const = default;
};

/// Copies one batch item of a tensor into a raster.
Raster to_raster(const Tensor& t, std::size_t batch_index = 0);
/// 1 x C x H x W tensor holding the raster's values.
Tensor to_tensor(const Raster& r);

}  // namespace errnet

#endif  // ERRNET_RASTER_HPP_
