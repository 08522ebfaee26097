#ifndef ERRNET_PARAMETERS_HPP_
#define ERRNET_PARAMETERS_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errnet/ops.hpp"
#include "errnet/tensor.hpp"

namespace errnet {

/// Named, ordered collection of trainable leaves.
class ParameterStore {
 public:
  /// Registers a leaf drawn uniformly from [-bound, bound].
  Tensor add_uniform(const std::string& name, Shape shape, Real bound, std::mt19937_64& rng);
  Tensor add(const std::string& name, Tensor value);

  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Registers "<name>.weight", He-uniform in +/- sqrt(6 / (in_ch * k * k)),
/// and "<name>.bias", zero.
Conv2dParams make_conv(ParameterStore& store, const std::string& name, std::size_t in_ch,
                       std::size_t out_ch, std::size_t kernel, std::size_t stride,
                       std::size_t padding, std::size_t dilation, std::mt19937_64& rng);

// Checkpoint container:
//   "ERRNETCKPT1"
//   repeated until EOF:
//     u32 name length, name bytes (UTF-8), u32 rank, u64 dims[rank],
//     f64 values[prod(dims)]
// All integers and floats little-endian.
inline constexpr char kCheckpointMagic[] = "ERRNETCKPT1";

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<Real> values;
};

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_checkpoint(const std::filesystem::path& path);

void save_parameters(const std::filesystem::path& path, const ParameterStore& store);
/// Copies checkpoint values into `store`. Every parameter must be present
/// with identical dims; errors name the offending parameter.
void load_parameters(const std::filesystem::path& path, ParameterStore& store);

}  // namespace errnet

#endif  // ERRNET_PARAMETERS_HPP_
