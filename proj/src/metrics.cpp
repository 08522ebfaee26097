#include "errnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "errnet/netpbm.hpp"
#include "errnet/parallel.hpp"

namespace errnet::metrics {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();
// Structure-measure guards use machine epsilon so that a perfect
// prediction scores 1 to within rounding.
constexpr Real kStructureEps = std::numeric_limits<Real>::epsilon();

Real mean_of(const std::vector<Real>& v) {
  Real s = 0;
  for (Real x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<Real>(v.size());
}

Real foreground_fraction(const Raster& gt) {
  Real s = 0;
  for (Real g : gt.values) s += g;
  return s / static_cast<Real>(gt.values.size());
}

// 2x / (x^2 + 1 + sigma + eps) over the pixels of one region.
Real object_score(const std::vector<Real>& values) {
  if (values.empty()) return 0.0;
  const Real x = mean_of(values);
  Real var = 0;
  for (Real v : values) var += (v - x) * (v - x);
  const Real sigma = values.size() > 1 ? std::sqrt(var / static_cast<Real>(values.size() - 1)) : 0.0;
  return 2.0 * x / (x * x + 1.0 + sigma + kStructureEps);
}

Real s_object(const Raster& pred, const Raster& gt) {
  std::vector<Real> fg, bg;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (gt.values[i] > 0.5) {
      fg.push_back(pred.values[i]);
    } else {
      bg.push_back(1.0 - pred.values[i]);
    }
  }
  const Real u = foreground_fraction(gt);
  return u * object_score(fg) + (1.0 - u) * object_score(bg);
}

// SSIM-style similarity of one rectangular block [y0, y1) x [x0, x1).
Real block_ssim(const Raster& pred, const Raster& gt, std::size_t y0, std::size_t y1,
                std::size_t x0, std::size_t x1) {
  const Real n = static_cast<Real>((y1 - y0) * (x1 - x0));
  Real x = 0, y = 0;
  for (std::size_t r = y0; r < y1; ++r) {
    for (std::size_t c = x0; c < x1; ++c) {
      x += pred.at(r, c);
      y += gt.at(r, c);
    }
  }
  x /= n;
  y /= n;
  Real sxx = 0, syy = 0, sxy = 0;
  for (std::size_t r = y0; r < y1; ++r) {
    for (std::size_t c = x0; c < x1; ++c) {
      const Real dp = pred.at(r, c) - x;
      const Real dg = gt.at(r, c) - y;
      sxx += dp * dp;
      syy += dg * dg;
      sxy += dp * dg;
    }
  }
  const Real denom = n - 1.0 + kStructureEps;
  sxx /= denom;
  syy /= denom;
  sxy /= denom;
  const Real alpha = 4.0 * x * y * sxy;
  const Real beta = (x * x + y * y) * (sxx + syy);
  if (alpha != 0.0) return alpha / (beta + kStructureEps);
  if (beta == 0.0) return 1.0;
  return 0.0;
}

Real s_region(const Raster& pred, const Raster& gt) {
  const std::size_t h = gt.height, w = gt.width;
  // Centroid in 1-based coordinates, rounded half away from zero.
  Real total = 0, sx = 0, sy = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const Real g = gt.at(r, c);
      total += g;
      sx += g * static_cast<Real>(c + 1);
      sy += g * static_cast<Real>(r + 1);
    }
  }
  std::size_t cx, cy;
  if (total == 0) {
    cx = static_cast<std::size_t>(std::round(static_cast<Real>(w) / 2.0));
    cy = static_cast<std::size_t>(std::round(static_cast<Real>(h) / 2.0));
  } else {
    cx = static_cast<std::size_t>(std::round(sx / total));
    cy = static_cast<std::size_t>(std::round(sy / total));
  }
  const Real area = static_cast<Real>(h * w);
  const Real w1 = static_cast<Real>(cx * cy) / area;
  const Real w2 = static_cast<Real>((w - cx) * cy) / area;
  const Real w3 = static_cast<Real>(cx * (h - cy)) / area;
  const Real w4 = 1.0 - w1 - w2 - w3;
  struct Block {
    Real weight;
    std::size_t y0, y1, x0, x1;
  };
  const Block blocks[4] = {{w1, 0, cy, 0, cx}, {w2, 0, cy, cx, w}, {w3, cy, h, 0, cx}, {w4, cy, h, cx, w}};
  Real score = 0;
  for (const auto& b : blocks) {
    if (b.y1 == b.y0 || b.x1 == b.x0) continue;  // empty quadrant carries zero weight
    score += b.weight * block_ssim(pred, gt, b.y0, b.y1, b.x0, b.x1);
  }
  return score;
}

struct Counts {
  Real n11 = 0, n10 = 0, n01 = 0, n00 = 0;  // (pred, gt)
};

Real alignment_from_counts(const Counts& k, bool gt_constant, Real gt_mean) {
  const Real n = k.n11 + k.n10 + k.n01 + k.n00;
  const Real mu_p = (k.n11 + k.n10) / n;
  const Real shift = gt_constant ? kEps : 0.0;
  const Real g1 = 1.0 - gt_mean + shift;
  const Real g0 = -gt_mean + shift;
  const Real p1 = 1.0 - mu_p;
  const Real p0 = -mu_p;
  auto enhanced = [](Real g, Real p) {
    const Real xi = 2.0 * g * p / (g * g + p * p + kEps);
    return (1.0 + xi) * (1.0 + xi) / 4.0;
  };
  return (k.n11 * enhanced(g1, p1) + k.n10 * enhanced(g0, p1) + k.n01 * enhanced(g1, p0) +
          k.n00 * enhanced(g0, p0)) /
         n;
}

// Largest k in [0, 255] with v >= k / 255.
int threshold_bin(Real v) {
  int k = static_cast<int>(std::floor(v * 255.0));
  k = std::clamp(k, 0, 255);
  while (k < 255 && v >= static_cast<Real>(k + 1) / 255.0) ++k;
  while (k > 0 && v < static_cast<Real>(k) / 255.0) --k;
  return k;
}

std::vector<Real> distance_1d(const std::vector<Real>& f) {
  const std::size_t n = f.size();
  std::vector<Real> d(n, kInf);
  std::vector<std::size_t> v(n);
  std::vector<Real> z(n + 1);
  long k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const Real fq = f[q] + static_cast<Real>(q * q);
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    Real s;
    while (true) {
      const std::size_t p = v[static_cast<std::size_t>(k)];
      s = (fq - (f[p] + static_cast<Real>(p * p))) / (2.0 * static_cast<Real>(q) - 2.0 * static_cast<Real>(p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) return d;
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[j + 1] < static_cast<Real>(q)) ++j;
    const Real diff = static_cast<Real>(q) - static_cast<Real>(v[j]);
    d[q] = diff * diff + f[v[j]];
  }
  return d;
}

std::array<std::array<Real, 7>, 7> gaussian_7x7() {
  std::array<std::array<Real, 7>, 7> k{};
  Real total = 0;
  for (int y = -3; y <= 3; ++y) {
    for (int x = -3; x <= 3; ++x) {
      k[y + 3][x + 3] = std::exp(-static_cast<Real>(x * x + y * y) / (2.0 * 25.0));
      total += k[y + 3][x + 3];
    }
  }
  for (auto& row : k) {
    for (auto& v : row) v /= total;
  }
  return k;
}

std::string format_row(const ImageMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f\n", m.file.c_str(), m.s_alpha, m.e_phi,
                m.f_w_beta, m.mae);
  return buf;
}

}  // namespace

void validate_pair(const Raster& pred, const Raster& gt) {
  if (pred.channels != 1 || gt.channels != 1) {
    throw std::invalid_argument("metrics expect single-channel maps");
  }
  if (!pred.same_size(gt)) {
    throw std::invalid_argument("size mismatch: pred " + std::to_string(pred.height) + "x" +
                                std::to_string(pred.width) + " vs gt " + std::to_string(gt.height) +
                                "x" + std::to_string(gt.width));
  }
  if (gt.values.empty()) throw std::invalid_argument("empty maps");
  for (Real v : pred.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("prediction value outside [0, 1]");
  }
  for (Real v : gt.values) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("ground truth is not binary");
  }
}

Real mae(const Raster& pred, const Raster& gt) {
  validate_pair(pred, gt);
  Real s = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) s += std::abs(pred.values[i] - gt.values[i]);
  return s / static_cast<Real>(gt.values.size());
}

Real s_measure(const Raster& pred, const Raster& gt, Real alpha) {
  validate_pair(pred, gt);
  const Real y = foreground_fraction(gt);
  if (y == 0.0) return 1.0 - mean_of(pred.values);
  if (y == 1.0) return mean_of(pred.values);
  const Real q = alpha * s_object(pred, gt) + (1.0 - alpha) * s_region(pred, gt);
  return std::clamp(q, 0.0, 1.0);
}

Real enhanced_alignment(const Raster& binary_pred, const Raster& gt) {
  validate_pair(binary_pred, gt);
  Counts k;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const bool p = binary_pred.values[i] > 0.5;
    const bool g = gt.values[i] > 0.5;
    (p ? (g ? k.n11 : k.n10) : (g ? k.n01 : k.n00)) += 1.0;
  }
  const Real gm = foreground_fraction(gt);
  return alignment_from_counts(k, gm == 0.0 || gm == 1.0, gm);
}

std::array<Real, kThresholds> e_measure_curve(const Raster& pred, const Raster& gt) {
  validate_pair(pred, gt);
  // Histogram of each pixel's highest passing threshold, split by gt.
  std::array<Real, kThresholds> fg_hist{}, bg_hist{};
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const int bin = threshold_bin(pred.values[i]);
    (gt.values[i] > 0.5 ? fg_hist : bg_hist)[static_cast<std::size_t>(bin)] += 1.0;
  }
  const Real n_fg = foreground_fraction(gt) * static_cast<Real>(gt.values.size());
  const Real n_bg = static_cast<Real>(gt.values.size()) - n_fg;
  const Real gm = foreground_fraction(gt);
  const bool constant = gm == 0.0 || gm == 1.0;

  std::array<Real, kThresholds> curve{};
  Real fg_above = 0, bg_above = 0;
  for (std::size_t t = kThresholds; t-- > 0;) {
    fg_above += fg_hist[t];
    bg_above += bg_hist[t];
    Counts k{fg_above, bg_above, n_fg - fg_above, n_bg - bg_above};
    curve[t] = alignment_from_counts(k, constant, gm);
  }
  return curve;
}

Real e_measure_mean(const Raster& pred, const Raster& gt) {
  const auto curve = e_measure_curve(pred, gt);
  Real s = 0;
  for (Real v : curve) s += v;
  return s / static_cast<Real>(kThresholds);
}

std::vector<Real> squared_distance_transform(const Raster& gt) {
  const std::size_t h = gt.height, w = gt.width;
  std::vector<Real> d(h * w);
  std::vector<Real> col(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) col[y] = gt.at(y, x) > 0.5 ? 0.0 : kInf;
    const auto out = distance_1d(col);
    for (std::size_t y = 0; y < h; ++y) d[y * w + x] = out[y];
  }
  std::vector<Real> row(w);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(d.begin() + static_cast<std::ptrdiff_t>(y * w), w, row.begin());
    const auto out = distance_1d(row);
    std::copy(out.begin(), out.end(), d.begin() + static_cast<std::ptrdiff_t>(y * w));
  }
  return d;
}

Real weighted_f(const Raster& pred, const Raster& gt, Real beta_sq) {
  validate_pair(pred, gt);
  const std::size_t h = gt.height, w = gt.width, n = h * w;
  const Real fg_count = foreground_fraction(gt) * static_cast<Real>(n);
  if (fg_count == 0.0) {
    return std::all_of(pred.values.begin(), pred.values.end(), [](Real v) { return v == 0.0; }) ? 1.0 : 0.0;
  }

  std::vector<Real> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(pred.values[i] - gt.values[i]);
  const std::vector<Real> dist2 = squared_distance_transform(gt);

  // Background pixels borrow the error of their nearest foreground pixel
  // (ties: smallest row-major index). Only pixels within reach of the 7x7
  // filter around foreground matter, i.e. squared distance <= 18.
  std::vector<Real> borrowed = err;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (gt.values[i] > 0.5) continue;
      borrowed[i] = 0.0;
      if (dist2[i] > 18.0) continue;
      const long r = 5;
      bool found = false;
      for (long dy = -r; dy <= r && !found; ++dy) {
        const long yy = static_cast<long>(y) + dy;
        if (yy < 0 || yy >= static_cast<long>(h)) continue;
        for (long dx = -r; dx <= r; ++dx) {
          const long xx = static_cast<long>(x) + dx;
          if (xx < 0 || xx >= static_cast<long>(w)) continue;
          const std::size_t j = static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx);
          if (gt.values[j] > 0.5 && static_cast<Real>(dy * dy + dx * dx) == dist2[i]) {
            borrowed[i] = err[j];
            found = true;
            break;
          }
        }
      }
    }
  }

  static const auto kernel = gaussian_7x7();
  Real weighted_fg_error = 0, weighted_bg_error = 0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (gt.values[i] > 0.5) {
        Real smoothed = 0;
        for (int dy = -3; dy <= 3; ++dy) {
          const long yy = static_cast<long>(y) + dy;
          if (yy < 0 || yy >= static_cast<long>(h)) continue;
          for (int dx = -3; dx <= 3; ++dx) {
            const long xx = static_cast<long>(x) + dx;
            if (xx < 0 || xx >= static_cast<long>(w)) continue;
            smoothed += kernel[dy + 3][dx + 3] * borrowed[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
          }
        }
        weighted_fg_error += std::min(err[i], smoothed);
      } else {
        const Real importance = 2.0 - std::exp(std::log(0.5) / 5.0 * std::sqrt(dist2[i]));
        weighted_bg_error += err[i] * importance;
      }
    }
  }
  const Real tp = fg_count - weighted_fg_error;
  const Real recall = 1.0 - weighted_fg_error / fg_count;
  const Real precision = tp / (kEps + tp + weighted_bg_error);
  return (1.0 + beta_sq) * recall * precision / (kEps + recall + beta_sq * precision);
}

ImageMetrics evaluate_pair(const std::string& file, const Raster& pred, const Raster& gt) {
  return {file, s_measure(pred, gt), e_measure_mean(pred, gt), weighted_f(pred, gt), mae(pred, gt)};
}

MetricReport evaluate_folder(const std::filesystem::path& pred_dir,
                             const std::filesystem::path& gt_dir) {
  namespace fs = std::filesystem;
  MetricReport report;
  report.mean.file = "MEAN";
  auto list = [&](const fs::path& dir) {
    std::map<std::string, fs::path> files;
    if (!fs::is_directory(dir)) {
      report.errors.push_back("not a directory: " + dir.string());
      return files;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
        files[entry.path().filename().string()] = entry.path();
      }
    }
    return files;
  };
  const auto preds = list(pred_dir);
  const auto gts = list(gt_dir);
  std::vector<std::string> names;
  for (const auto& [name, path] : preds) {
    if (gts.count(name)) {
      names.push_back(name);
    } else {
      report.errors.push_back("missing ground truth for " + name);
    }
  }
  for (const auto& [name, path] : gts) {
    if (!preds.count(name)) report.errors.push_back("missing prediction for " + name);
  }

  std::vector<ImageMetrics> results(names.size());
  std::vector<std::string> failures(names.size());
  parallel_for(names.size(), [&](std::size_t i) {
    try {
      const Raster pred = read_map(preds.at(names[i]));
      const Raster gt = read_map(gts.at(names[i]));
      results[i] = evaluate_pair(names[i], pred, gt);
    } catch (const std::exception& e) {
      failures[i] = names[i] + ": " + e.what();
    }
  });
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!failures[i].empty()) {
      report.errors.push_back(failures[i]);
    } else {
      report.images.push_back(results[i]);
    }
  }
  if (!report.images.empty()) {
    for (const auto& m : report.images) {
      report.mean.s_alpha += m.s_alpha;
      report.mean.e_phi += m.e_phi;
      report.mean.f_w_beta += m.f_w_beta;
      report.mean.mae += m.mae;
    }
    const Real k = static_cast<Real>(report.images.size());
    report.mean.s_alpha /= k;
    report.mean.e_phi /= k;
    report.mean.f_w_beta /= k;
    report.mean.mae /= k;
  }
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::string out = "file,s_alpha,e_phi,fw_beta,mae\n";
  for (const auto& m : report.images) out += format_row(m);
  out += format_row(report.mean);
  return out;
}

}  // namespace errnet::metrics
