#ifndef ERRNET_COMMANDS_HPP_
#define ERRNET_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "errnet/config.hpp"
#include "errnet/metrics.hpp"
#include "errnet/synth.hpp"

namespace errnet::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kNumericalFailure = 2 };

/// Writes the dataset layout under `out`. Returns the sample count.
std::size_t synth(const SynthConfig& config, const std::filesystem::path& out, std::ostream& log);

struct TrainSummary {
  std::size_t iterations = 0;
  std::vector<Real> epoch_means;  // mean total loss per (possibly partial) epoch
};

/// Trains from scratch (or from `resume`) and writes loss.csv, model.ckpt and
/// config.txt into `out_dir`. loss.csv is flushed every iteration.
TrainSummary train(const TrainConfig& config, const std::filesystem::path& data_root,
                   const std::filesystem::path& out_dir, std::ostream& log,
                   const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Column header of loss.csv.
std::string loss_csv_header();

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;  // directory of .ppm images, or a dataset root
  std::filesystem::path out;
  bool dump_all = false;        // also write p_4, p_5, p_g, p_e under <out>/priors
};

/// Writes <out>/<id>.pgm (sigmoid of upsampled p_3, at input resolution) per
/// image. Returns the number of images processed.
std::size_t predict(const TrainConfig& config, const PredictOptions& options, std::ostream& log);

struct GradcheckEntry {
  std::string component;
  Real max_relative_error = 0;
  Real threshold = 0;
  bool pass() const { return max_relative_error < threshold; }
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  bool ok() const;
};

inline constexpr Real kOpTolerance = 1e-5;
inline constexpr Real kModelTolerance = 1e-3;

/// Central-difference check of every op (tolerance 1e-5) and of the full
/// training loss w.r.t. every parameter tensor of a seeded desk-scale model
/// on a 1x3x32x32 input (tolerance 1e-3).
GradcheckReport gradcheck(std::uint64_t seed, std::ostream* progress = nullptr);

/// Folder evaluation; writes the CSV report to `csv_path` when non-empty.
metrics::MetricReport evaluate(const std::filesystem::path& pred_dir,
                               const std::filesystem::path& gt_dir,
                               const std::filesystem::path& csv_path);

}  // namespace errnet::cli

#endif  // ERRNET_COMMANDS_HPP_
