#ifndef ERRNET_CONFIG_HPP_
#define ERRNET_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "errnet/errnet.hpp"

namespace errnet {

/// Flat `key = value` settings; `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Later settings win.
  void merge(const KeyValueConfig& other);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  Real get_real(const std::string& key, Real fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::vector<Real> get_reals(const std::string& key, const std::vector<Real>& fallback) const;

  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

struct TrainConfig {
  Real lr = 1e-4;
  std::size_t epochs = 50;
  std::size_t batch = 4;
  std::size_t input_size = 64;
  std::uint64_t seed = 7;
  std::size_t iterations = 0;  // 0: run `epochs` full epochs
  ErrNetConfig model;
  std::vector<Real> scales{0.75, 1.0, 1.25};

  /// 352 px, batch 36, 30 epochs, ResNet-50 channel widths.
  static TrainConfig full_scale();
  static TrainConfig from(const KeyValueConfig& kv, const TrainConfig& defaults);
  static TrainConfig from(const KeyValueConfig& kv);
  KeyValueConfig to_key_values() const;
  void validate() const;
};

}  // namespace errnet

#endif  // ERRNET_CONFIG_HPP_
