#include "errnet/raster.hpp"

#include <algorithm>
#include <stdexcept>

namespace errnet {

Raster to_raster(const Tensor& t, std::size_t batch_index) {
  const Shape& s = t.shape();
  if (batch_index >= s.n) throw std::out_of_range("to_raster: batch index out of range");
  Raster r(s.c, s.h, s.w);
  const std::size_t per = s.c * s.plane();
  std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(batch_index * per), per, r.values.begin());
  return r;
}

Tensor to_tensor(const Raster& r) {
  return Tensor::from_data({1, r.channels, r.height, r.width}, r.values);
}

}  // namespace errnet
