#ifndef ERRNET_NETPBM_HPP_
#define ERRNET_NETPBM_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "errnet/raster.hpp"

namespace errnet {

/// Binary PGM (P5) for 1 channel, PPM (P6) for 3 channels, maxval 255.
/// Values are quantized as floor(v * 255 + 0.5); reading divides by maxval.
std::string encode_netpbm(const Raster& raster);
/// Throws std::runtime_error naming the byte offset of malformed input.
Raster decode_netpbm(std::string_view bytes);

void write_map(const std::filesystem::path& path, const Raster& raster);
Raster read_map(const std::filesystem::path& path);

std::uint8_t quantize(Real v);

}  // namespace errnet

#endif  // ERRNET_NETPBM_HPP_
