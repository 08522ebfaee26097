#ifndef ERRNET_METRICS_HPP_
#define ERRNET_METRICS_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "errnet/raster.hpp"

namespace errnet::metrics {

/// Ratio guard for the E-measure and weighted F-measure. The S-measure uses
/// machine epsilon instead.
inline constexpr Real kEps = 1e-8;
inline constexpr std::size_t kThresholds = 256;

/// Throws std::invalid_argument unless pred and gt are single-channel, equal
/// in size, pred in [0, 1] and gt binary.
void validate_pair(const Raster& pred, const Raster& gt);

Real mae(const Raster& pred, const Raster& gt);

/// alpha * S_object + (1 - alpha) * S_region, clamped to [0, 1].
/// Empty gt scores 1 - mean(pred); full gt scores mean(pred).
Real s_measure(const Raster& pred, const Raster& gt, Real alpha = 0.5);

/// Enhanced-alignment score of an already binarized prediction.
Real enhanced_alignment(const Raster& binary_pred, const Raster& gt);
/// Enhanced-alignment score at thresholds k/255 (pred >= t), k = 0..255.
std::array<Real, kThresholds> e_measure_curve(const Raster& pred, const Raster& gt);
/// Mean of e_measure_curve.
Real e_measure_mean(const Raster& pred, const Raster& gt);

/// Weighted F-measure with a 7x7 (sigma 5) error-dependency filter and
/// distance-based background importance. Empty gt: 1 if pred is all zero,
/// else 0.
Real weighted_f(const Raster& pred, const Raster& gt, Real beta_sq = 0.3);

/// Squared Euclidean distance from every pixel to the nearest gt pixel
/// (infinity when gt is empty).
std::vector<Real> squared_distance_transform(const Raster& gt);

struct ImageMetrics {
  std::string file;
  Real s_alpha = 0;
  Real e_phi = 0;
  Real f_w_beta = 0;
  Real mae = 0;
};

ImageMetrics evaluate_pair(const std::string& file, const Raster& pred, const Raster& gt);

struct MetricReport {
  std::vector<ImageMetrics> images;  // sorted by file name
  ImageMetrics mean;                 // arithmetic means, file = "MEAN"
  std::vector<std::string> errors;   // per-file problems (missing counterpart, size mismatch)
  bool ok() const { return errors.empty() && !images.empty(); }
};

/// Pairs every *.pgm in pred_dir with the same name in gt_dir.
MetricReport evaluate_folder(const std::filesystem::path& pred_dir,
                             const std::filesystem::path& gt_dir);

/// Header "file,s_alpha,e_phi,fw_beta,mae", one row per image, then "MEAN".
/// Six decimal places.
std::string report_csv(const MetricReport& report);

}  // namespace errnet::metrics

#endif  // ERRNET_METRICS_HPP_
