#ifndef ERRNET_SYNTH_HPP_
#define ERRNET_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "errnet/raster.hpp"
#include "errnet/tensor.hpp"

namespace errnet {

struct Sample {
  std::string id;
  Raster image;  // 3 x H x W in [0, 1]
  Raster mask;   // 1 x H x W binary
  Raster edge;   // 1 x H x W binary
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t count = 8;
  std::size_t size = 64;   // multiple of 32
  Real contrast = 0.15;    // (0, 0.5]; smaller is harder

  void validate() const;
};

/// Value-noise backgrounds with one smooth blob whose texture is the same
/// noise shifted in mean by +/- contrast. Pure function of the config.
std::vector<Sample> synth_generate(const SynthConfig& config);

/// Morphological gradient (3x3 dilation minus 3x3 erosion). Neighbourhoods
/// are clipped to the image, so constant masks have empty edges.
Raster edge_from_mask(const Raster& mask);

/// |mean(fg) - mean(bg)| of the channel-averaged image.
Real region_contrast(const Sample& sample);

// Dataset layout: <root>/images/<id>.ppm, <root>/masks/<id>.pgm,
// <root>/edges/<id>.pgm and <root>/manifest.txt (one id per line).
void write_dataset(const std::filesystem::path& root, const std::vector<Sample>& samples);
/// Ids from the manifest after checking every file exists. Throws listing
/// the missing files.
std::vector<std::string> validate_dataset(const std::filesystem::path& root);
std::vector<Sample> read_dataset(const std::filesystem::path& root);

inline constexpr std::array<Real, 3> kTrainScales{0.75, 1.0, 1.25};

/// Nearest multiple of 32 to size * scale (ties round down). Throws if the
/// result is below 32.
std::size_t scaled_size(std::size_t size, Real scale);

/// Bilinear resize of all three maps; mask and edge re-binarized at 0.5.
Sample resize_sample(const Sample& sample, std::size_t size);

struct Batch {
  Tensor image;  // N x 3 x S x S
  Tensor mask;   // N x 1 x S x S
  Tensor edge;   // N x 1 x S x S
};

/// Stacks samples after resizing each to scaled_size(base_size, scale).
Batch multiscale_batch(const std::vector<const Sample*>& samples, std::size_t base_size, Real scale);

}  // namespace errnet

#endif  // ERRNET_SYNTH_HPP_
