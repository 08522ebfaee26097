#include "errnet/parameters.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <unordered_map>

namespace errnet {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t offset() const { return pos_; }

  std::uint64_t uint(int width, const char* what) {
    need(width, what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw std::runtime_error("checkpoint truncated reading " + std::string(what) +
                               " at byte offset " + std::to_string(pos_));
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint64_t> dims_of(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

Tensor ParameterStore::add_uniform(const std::string& name, Shape shape, Real bound,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> dist(-bound, bound);
  std::vector<Real> values(shape.numel());
  for (auto& v : values) v = dist(rng);
  return add(name, Tensor::from_data(shape, std::move(values), true));
}

Tensor ParameterStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  value.set_requires_grad(true);
  entries_.emplace_back(name, value);
  return value;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw std::out_of_range("unknown parameter " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.second.numel();
  return total;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

Conv2dParams make_conv(ParameterStore& store, const std::string& name, std::size_t in_ch,
                       std::size_t out_ch, std::size_t kernel, std::size_t stride,
                       std::size_t padding, std::size_t dilation, std::mt19937_64& rng) {
  const Real bound = std::sqrt(6.0 / static_cast<Real>(in_ch * kernel * kernel));
  Conv2dParams p;
  p.weight = store.add_uniform(name + ".weight", {out_ch, in_ch, kernel, kernel}, bound, rng);
  p.bias = store.add(name + ".bias", Tensor::zeros({1, out_ch, 1, 1}));
  p.stride = stride;
  p.padding = padding;
  p.dilation = dilation;
  return p;
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  std::string out(kCheckpointMagic);
  for (const auto& a : arrays) {
    std::uint64_t count = 1;
    for (auto d : a.dims) count *= d;
    if (count != a.values.size()) {
      throw std::invalid_argument("checkpoint array " + a.name + " has inconsistent dims");
    }
    put_u32(out, static_cast<std::uint32_t>(a.name.size()));
    out += a.name;
    put_u32(out, static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) put_u64(out, d);
    for (Real v : a.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::vector<NamedArray> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}));
  const std::size_t magic_len = sizeof(kCheckpointMagic) - 1;
  if (r.str(magic_len, "magic") != kCheckpointMagic) {
    throw std::runtime_error("not a checkpoint (expected magic \"" + std::string(kCheckpointMagic) +
                             "\"): " + path.string());
  }
  std::vector<NamedArray> arrays;
  while (!r.done()) {
    NamedArray a;
    const auto name_len = r.uint(4, "name length");
    a.name = r.str(name_len, "name");
    const auto rank = r.uint(4, "rank");
    if (rank > 8) {
      throw std::runtime_error("implausible rank " + std::to_string(rank) + " for " + a.name +
                               " at byte offset " + std::to_string(r.offset()));
    }
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      a.dims.push_back(r.uint(8, "dims"));
      count *= a.dims.back();
    }
    a.values.resize(count);
    for (auto& v : a.values) v = std::bit_cast<Real>(r.uint(8, "values"));
    arrays.push_back(std::move(a));
  }
  return arrays;
}

void save_parameters(const std::filesystem::path& path, const ParameterStore& store) {
  std::vector<NamedArray> arrays;
  for (const auto& [name, t] : store.entries()) {
    arrays.push_back({name, dims_of(t.shape()), std::vector<Real>(t.data().begin(), t.data().end())});
  }
  write_checkpoint(path, arrays);
}

void load_parameters(const std::filesystem::path& path, ParameterStore& store) {
  auto arrays = read_checkpoint(path);
  std::unordered_map<std::string, const NamedArray*> by_name;
  for (const auto& a : arrays) by_name[a.name] = &a;
  for (const auto& [name, t] : store.entries()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint is missing parameter " + name);
    if (it->second->dims != dims_of(t.shape())) {
      throw std::runtime_error("checkpoint shape mismatch for parameter " + name + " (model " +
                               t.shape().str() + ")");
    }
  }
  if (arrays.size() != store.size()) {
    for (const auto& a : arrays) {
      if (!store.contains(a.name)) throw std::runtime_error("checkpoint has unknown parameter " + a.name);
    }
  }
  for (const auto& [name, t] : store.entries()) {
    Tensor leaf = t;
    std::copy(by_name[name]->values.begin(), by_name[name]->values.end(), leaf.mutable_data().begin());
  }
}

}  // namespace errnet
