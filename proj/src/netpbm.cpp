#include "errnet/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace errnet {

namespace {

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
  throw std::runtime_error("netpbm: " + what + " at byte offset " + std::to_string(offset));
}

class HeaderParser {
 public:
  explicit HeaderParser(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  unsigned long number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (v > 1u << 24) fail(std::string("value too large for ") + field, start);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected ") + field, start);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

std::uint8_t quantize(Real v) {
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

std::string encode_netpbm(const Raster& r) {
  if (r.channels != 1 && r.channels != 3) {
    throw std::invalid_argument("netpbm supports 1 or 3 channels, got " + std::to_string(r.channels));
  }
  for (Real v : r.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("netpbm: value " + std::to_string(v) + " outside [0, 1]");
    }
  }
  std::string out = (r.channels == 1 ? "P5\n" : "P6\n") + std::to_string(r.width) + " " +
                    std::to_string(r.height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + r.values.size());
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      for (std::size_t c = 0; c < r.channels; ++c) {
        out[header + (y * r.width + x) * r.channels + c] = static_cast<char>(quantize(r.at(y, x, c)));
      }
    }
  }
  return out;
}

Raster decode_netpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    fail("bad magic, expected \"P5\" or \"P6\"", 0);
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  HeaderParser p(bytes);
  const auto width = p.number("width");
  const auto height = p.number("height");
  const std::size_t maxval_at = p.offset();
  const auto maxval = p.number("maxval");
  if (width == 0 || height == 0) fail("zero image dimension", maxval_at);
  if (maxval == 0 || maxval > 255) fail("unsupported maxval " + std::to_string(maxval), maxval_at);
  p.single_whitespace();
  const std::size_t start = p.offset();
  const std::size_t need = width * height * channels;
  if (bytes.size() - start < need) {
    fail("truncated raster: expected " + std::to_string(need) + " bytes, found " +
             std::to_string(bytes.size() - start),
         bytes.size());
  }
  Raster r(channels, height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const auto byte = static_cast<unsigned char>(bytes[start + (y * width + x) * channels + c]);
        if (byte > maxval) fail("sample exceeds maxval", start + (y * width + x) * channels + c);
        r.at(y, x, c) = static_cast<Real>(byte) / static_cast<Real>(maxval);
      }
    }
  }
  return r;
}

void write_map(const std::filesystem::path& path, const Raster& raster) {
  const std::string bytes = encode_netpbm(raster);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

Raster read_map(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes(std::istreambuf_iterator<char>(f), {});
  try {
    return decode_netpbm(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace errnet
