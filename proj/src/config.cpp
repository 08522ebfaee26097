#include "errnet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace errnet {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string format_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

Real KeyValueConfig::get_real(const std::string& key, Real fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const Real v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": expected a number, got '" + it->second + "'");
  }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + ": expected an integer, got '" + it->second + "'");
  }
}

std::vector<Real> KeyValueConfig::get_reals(const std::string& key, const std::vector<Real>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<Real> out;
  std::stringstream ss(it->second);
  for (std::string item; std::getline(ss, item, ',');) {
    KeyValueConfig one;
    one.set(key, trim(item));
    out.push_back(one.get_real(key, 0));
  }
  return out;
}

std::string KeyValueConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

TrainConfig TrainConfig::full_scale() {
  TrainConfig c;
  c.epochs = 30;
  c.batch = 36;
  c.input_size = 352;
  c.model.encoder = EncoderConfig::full_scale();
  return c;
}

TrainConfig TrainConfig::from(const KeyValueConfig& kv) { return from(kv, TrainConfig{}); }

TrainConfig TrainConfig::from(const KeyValueConfig& kv, const TrainConfig& defaults) {
  TrainConfig c = defaults;
  auto non_negative = [&](const std::string& key, std::int64_t fallback) {
    const auto v = kv.get_int(key, fallback);
    if (v < 0) throw std::invalid_argument("config key " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.lr = kv.get_real("lr", c.lr);
  c.epochs = non_negative("epochs", static_cast<std::int64_t>(c.epochs));
  c.batch = non_negative("batch", static_cast<std::int64_t>(c.batch));
  c.input_size = non_negative("input_size", static_cast<std::int64_t>(c.input_size));
  c.seed = static_cast<std::uint64_t>(non_negative("seed", static_cast<std::int64_t>(c.seed)));
  c.iterations = non_negative("iterations", static_cast<std::int64_t>(c.iterations));
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string key = "encoder.c" + std::to_string(i + 1);
    c.model.encoder.channels[i] = non_negative(key, static_cast<std::int64_t>(c.model.encoder.channels[i]));
  }
  c.model.aspp_mid_channels =
      non_negative("aspp.mid_channels", static_cast<std::int64_t>(c.model.aspp_mid_channels));
  c.scales = kv.get_reals("scales", c.scales);
  c.validate();
  return c;
}

KeyValueConfig TrainConfig::to_key_values() const {
  KeyValueConfig kv;
  kv.set("lr", format_real(lr));
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch", std::to_string(batch));
  kv.set("input_size", std::to_string(input_size));
  kv.set("seed", std::to_string(seed));
  kv.set("iterations", std::to_string(iterations));
  for (std::size_t i = 0; i < 5; ++i) {
    kv.set("encoder.c" + std::to_string(i + 1), std::to_string(model.encoder.channels[i]));
  }
  kv.set("aspp.mid_channels", std::to_string(model.aspp_mid_channels));
  std::string s;
  for (std::size_t i = 0; i < scales.size(); ++i) s += (i ? "," : "") + format_real(scales[i]);
  kv.set("scales", s);
  return kv;
}

void TrainConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("lr must be positive");
  if (batch == 0) throw std::invalid_argument("batch must be at least 1");
  if (input_size == 0 || input_size % 32 != 0) {
    throw std::invalid_argument("input_size " + std::to_string(input_size) + " must be a positive multiple of 32");
  }
  if (scales.empty()) throw std::invalid_argument("scales must not be empty");
  for (Real s : scales) {
    if (!(s > 0)) throw std::invalid_argument("scales must be positive");
  }
  if (epochs == 0 && iterations == 0) throw std::invalid_argument("epochs or iterations must be positive");
  model.encoder.validate();
  if (model.aspp_mid_channels == 0) throw std::invalid_argument("aspp.mid_channels must be at least 1");
}

}  // namespace errnet
