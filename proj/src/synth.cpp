#include "errnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "errnet/netpbm.hpp"
#include "errnet/ops.hpp"
#include "errnet/parallel.hpp"

namespace errnet {

namespace {

namespace fs = std::filesystem;

Real smoothstep(Real t) { return t * t * (3.0 - 2.0 * t); }

// Multi-octave value noise in [0, 1].
std::vector<Real> value_noise(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> uni(0.0, 1.0);
  std::vector<Real> out(size * size, 0.0);
  Real amplitude = 1.0, total = 0.0;
  std::size_t cell = std::max<std::size_t>(2, size / 4);
  for (int octave = 0; octave < 4 && cell >= 2; ++octave, cell /= 2, amplitude *= 0.5) {
    const std::size_t lattice = size / cell + 2;
    std::vector<Real> grid(lattice * lattice);
    for (auto& g : grid) g = uni(rng);
    for (std::size_t y = 0; y < size; ++y) {
      const Real fy = static_cast<Real>(y) / static_cast<Real>(cell);
      const std::size_t iy = static_cast<std::size_t>(fy);
      const Real ty = smoothstep(fy - static_cast<Real>(iy));
      for (std::size_t x = 0; x < size; ++x) {
        const Real fx = static_cast<Real>(x) / static_cast<Real>(cell);
        const std::size_t ix = static_cast<std::size_t>(fx);
        const Real tx = smoothstep(fx - static_cast<Real>(ix));
        const Real a = grid[iy * lattice + ix], b = grid[iy * lattice + ix + 1];
        const Real c = grid[(iy + 1) * lattice + ix], d = grid[(iy + 1) * lattice + ix + 1];
        const Real top = a + (b - a) * tx;
        const Real bottom = c + (d - c) * tx;
        out[y * size + x] += amplitude * (top + (bottom - top) * ty);
      }
    }
    total += amplitude;
  }
  for (auto& v : out) v /= total;
  return out;
}

struct BlobShape {
  Real cy, cx, aspect, orientation, radius;
  std::array<Real, 3> amp, phase;  // harmonics 2, 3, 4
};

Raster rasterize(const BlobShape& b, std::size_t size) {
  Raster mask(1, size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const Real dy = static_cast<Real>(y) + 0.5 - b.cy;
      const Real dx = static_cast<Real>(x) + 0.5 - b.cx;
      const Real phi = std::atan2(dy, dx);
      const Real u = std::cos(phi - b.orientation);
      const Real v = std::sin(phi - b.orientation) / b.aspect;
      Real r = b.radius / std::sqrt(u * u + v * v);
      Real wobble = 1.0;
      for (std::size_t k = 0; k < 3; ++k) wobble += b.amp[k] * std::cos(static_cast<Real>(k + 2) * phi + b.phase[k]);
      r *= wobble;
      mask.at(y, x) = std::sqrt(dx * dx + dy * dy) <= r ? 1.0 : 0.0;
    }
  }
  return mask;
}

Real fraction(const Raster& mask) {
  Real s = 0;
  for (Real v : mask.values) s += v;
  return s / static_cast<Real>(mask.values.size());
}

Raster make_blob(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> uni(0.0, 1.0);
  const Real s = static_cast<Real>(size);
  while (true) {
    BlobShape b;
    b.cy = s * (0.35 + 0.3 * uni(rng));
    b.cx = s * (0.35 + 0.3 * uni(rng));
    b.aspect = 0.6 + 0.4 * uni(rng);
    b.orientation = std::numbers::pi * uni(rng);
    for (std::size_t k = 0; k < 3; ++k) {
      b.amp[k] = 0.1 * uni(rng);
      b.phase[k] = 2.0 * std::numbers::pi * uni(rng);
    }
    const Real target = 0.08 + 0.27 * uni(rng);
    b.radius = std::sqrt(target * s * s / (std::numbers::pi * b.aspect));
    Raster mask = rasterize(b, size);
    for (int iter = 0; iter < 4; ++iter) {
      const Real f = fraction(mask);
      if (f <= 0) break;
      b.radius *= std::sqrt(target / f);
      mask = rasterize(b, size);
    }
    const Real f = fraction(mask);
    if (f >= 0.02 && f <= 0.60) return mask;
  }
}

Sample make_sample(const SynthConfig& cfg, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  const std::size_t n = cfg.size;

  Sample s;
  char id[32];
  std::snprintf(id, sizeof(id), "sample_%04zu", index);
  s.id = id;
  s.mask = make_blob(n, rng);
  s.edge = edge_from_mask(s.mask);

  const bool brighter = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  const Real fg_level = 0.5 + (brighter ? 0.5 : -0.5) * cfg.contrast;
  const Real bg_level = 0.5 - (brighter ? 0.5 : -0.5) * cfg.contrast;
  const Real amplitude = 0.8 * (1.0 - cfg.contrast);

  const std::vector<Real> shared = value_noise(n, rng);
  s.image = Raster(3, n, n);
  for (std::size_t c = 0; c < 3; ++c) {
    const std::vector<Real> own = value_noise(n, rng);
    std::vector<Real> tex(n * n);
    Real fg_sum = 0, bg_sum = 0, fg_n = 0;
    for (std::size_t i = 0; i < tex.size(); ++i) {
      tex[i] = 0.75 * shared[i] + 0.25 * own[i];
      if (s.mask.values[i] > 0.5) {
        fg_sum += tex[i];
        fg_n += 1;
      } else {
        bg_sum += tex[i];
      }
    }
    const Real fg_mean = fg_sum / fg_n;
    const Real bg_mean = bg_sum / (static_cast<Real>(tex.size()) - fg_n);
    for (std::size_t i = 0; i < tex.size(); ++i) {
      const bool fg = s.mask.values[i] > 0.5;
      const Real v = (fg ? fg_level : bg_level) + amplitude * (tex[i] - (fg ? fg_mean : bg_mean));
      s.image.values[c * n * n + i] = std::clamp(v, 0.0, 1.0);
    }
  }
  return s;
}

Raster resize_raster(const Raster& r, std::size_t size) {
  NoGradGuard no_grad;
  return to_raster(bilinear_resize(to_tensor(r), size, size));
}

}  // namespace

void SynthConfig::validate() const {
  if (size == 0 || size % 32 != 0) {
    throw std::invalid_argument("size " + std::to_string(size) + " must be a positive multiple of 32");
  }
  if (!(contrast > 0.0 && contrast <= 0.5)) {
    throw std::invalid_argument("contrast must lie in (0, 0.5]");
  }
  if (count == 0) throw std::invalid_argument("count must be at least 1");
}

std::vector<Sample> synth_generate(const SynthConfig& config) {
  config.validate();
  std::vector<Sample> samples(config.count);
  parallel_for(config.count, [&](std::size_t i) { samples[i] = make_sample(config, i); });
  return samples;
}

Raster edge_from_mask(const Raster& mask) {
  const std::size_t h = mask.height, w = mask.width;
  Raster edge(1, h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      Real lo = 1.0, hi = 0.0;
      for (std::size_t yy = y > 0 ? y - 1 : 0; yy <= std::min(h - 1, y + 1); ++yy) {
        for (std::size_t xx = x > 0 ? x - 1 : 0; xx <= std::min(w - 1, x + 1); ++xx) {
          const Real v = mask.at(yy, xx) > 0.5 ? 1.0 : 0.0;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      edge.at(y, x) = hi - lo;
    }
  }
  return edge;
}

Real region_contrast(const Sample& sample) {
  const std::size_t n = sample.mask.pixels();
  Real fg = 0, bg = 0, fg_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real gray = 0;
    for (std::size_t c = 0; c < sample.image.channels; ++c) gray += sample.image.values[c * n + i];
    gray /= static_cast<Real>(sample.image.channels);
    if (sample.mask.values[i] > 0.5) {
      fg += gray;
      fg_n += 1;
    } else {
      bg += gray;
    }
  }
  return std::abs(fg / fg_n - bg / (static_cast<Real>(n) - fg_n));
}

void write_dataset(const fs::path& root, const std::vector<Sample>& samples) {
  for (const char* sub : {"images", "masks", "edges"}) fs::create_directories(root / sub);
  std::string manifest;
  for (const auto& s : samples) {
    write_map(root / "images" / (s.id + ".ppm"), s.image);
    write_map(root / "masks" / (s.id + ".pgm"), s.mask);
    write_map(root / "edges" / (s.id + ".pgm"), s.edge);
    manifest += s.id + "\n";
  }
  std::ofstream f(root / "manifest.txt", std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + (root / "manifest.txt").string());
  f << manifest;
}

std::vector<std::string> validate_dataset(const fs::path& root) {
  std::ifstream f(root / "manifest.txt");
  if (!f) throw std::runtime_error("dataset manifest not found: " + (root / "manifest.txt").string());
  std::vector<std::string> ids;
  std::string missing;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ids.push_back(line);
    for (const auto& p : {root / "images" / (line + ".ppm"), root / "masks" / (line + ".pgm"),
                          root / "edges" / (line + ".pgm")}) {
      if (!fs::is_regular_file(p)) missing += "\n  " + p.string();
    }
  }
  if (!missing.empty()) throw std::runtime_error("dataset is missing files:" + missing);
  if (ids.empty()) throw std::runtime_error("dataset manifest is empty: " + root.string());
  return ids;
}

std::vector<Sample> read_dataset(const fs::path& root) {
  const auto ids = validate_dataset(root);
  std::vector<Sample> samples(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    Sample& s = samples[i];
    s.id = ids[i];
    s.image = read_map(root / "images" / (s.id + ".ppm"));
    s.mask = read_map(root / "masks" / (s.id + ".pgm"));
    s.edge = read_map(root / "edges" / (s.id + ".pgm"));
    if (s.image.channels != 3 || s.mask.channels != 1 || s.edge.channels != 1 ||
        !s.image.same_size(s.mask) || !s.image.same_size(s.edge)) {
      throw std::runtime_error("inconsistent image/mask/edge sizes for " + s.id);
    }
  });
  return samples;
}

std::size_t scaled_size(std::size_t size, Real scale) {
  if (!(scale > 0)) throw std::invalid_argument("scale must be positive");
  const Real raw = static_cast<Real>(size) * scale / 32.0;
  // Round half down.
  const std::size_t rounded = static_cast<std::size_t>(std::ceil(raw - 0.5)) * 32;
  if (rounded < 32) {
    throw std::invalid_argument("scaled size of " + std::to_string(size) + " at scale " +
                                std::to_string(scale) + " falls below 32");
  }
  return rounded;
}

Sample resize_sample(const Sample& sample, std::size_t size) {
  if (sample.image.height == size && sample.image.width == size) return sample;
  Sample out;
  out.id = sample.id;
  out.image = resize_raster(sample.image, size);
  for (auto& v : out.image.values) v = std::clamp(v, 0.0, 1.0);
  out.mask = resize_raster(sample.mask, size);
  out.edge = resize_raster(sample.edge, size);
  for (auto* r : {&out.mask, &out.edge}) {
    for (auto& v : r->values) v = v >= 0.5 ? 1.0 : 0.0;
  }
  return out;
}

Batch multiscale_batch(const std::vector<const Sample*>& samples, std::size_t base_size, Real scale) {
  if (samples.empty()) throw std::invalid_argument("empty batch");
  const std::size_t size = scaled_size(base_size, scale);
  const std::size_t n = samples.size();
  const std::size_t plane = size * size;
  std::vector<Real> image(n * 3 * plane), mask(n * plane), edge(n * plane);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample s = resize_sample(*samples[i], size);
    std::copy(s.image.values.begin(), s.image.values.end(), image.begin() + static_cast<std::ptrdiff_t>(i * 3 * plane));
    std::copy(s.mask.values.begin(), s.mask.values.end(), mask.begin() + static_cast<std::ptrdiff_t>(i * plane));
    std::copy(s.edge.values.begin(), s.edge.values.end(), edge.begin() + static_cast<std::ptrdiff_t>(i * plane));
  }
  return {Tensor::from_data({n, 3, size, size}, std::move(image)),
          Tensor::from_data({n, 1, size, size}, std::move(mask)),
          Tensor::from_data({n, 1, size, size}, std::move(edge))};
}

}  // namespace errnet
