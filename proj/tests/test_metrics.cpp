#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "errnet/metrics.hpp"
#include "errnet/netpbm.hpp"
#include "oracles.hpp"

using namespace errnet;
using namespace errnet::metrics;
namespace fs = std::filesystem;

namespace {

Raster from_rows(std::size_t h, std::size_t w, std::vector<Real> v) {
  Raster r(1, h, w);
  r.values = std::move(v);
  return r;
}

// Square of foreground at [y0, y0 + s) x [x0, x0 + s).
Raster square(std::size_t h, std::size_t w, std::size_t y0, std::size_t x0, std::size_t s) {
  Raster r(1, h, w);
  for (std::size_t y = y0; y < y0 + s; ++y)
    for (std::size_t x = x0; x < x0 + s; ++x) r.at(y, x) = 1.0;
  return r;
}

Raster scaled(const Raster& r, Real k) {
  Raster o = r;
  for (auto& v : o.values) v *= k;
  return o;
}

Raster inverted(const Raster& r) {
  Raster o = r;
  for (auto& v : o.values) v = 1 - v;
  return o;
}

}  // namespace

TEST(Mae, Definitions) {
  const Raster gt = square(8, 8, 2, 2, 3);
  EXPECT_EQ(mae(gt, gt), 0.0);
  EXPECT_EQ(mae(Raster(1, 8, 8), Raster(1, 8, 8, 1.0)), 1.0);
  EXPECT_NEAR(mae(from_rows(2, 2, {0.2, 0.8, 0.5, 0.0}), from_rows(2, 2, {0, 1, 1, 0})), 0.225, 1e-15);
  EXPECT_THROW(mae(Raster(1, 4, 4), Raster(1, 4, 5)), std::invalid_argument);
  EXPECT_THROW(mae(Raster(1, 4, 4), Raster(1, 4, 4, 0.5)), std::invalid_argument);
}

TEST(SMeasure, Definitions) {
  const Raster gt = square(16, 16, 3, 5, 6);
  EXPECT_NEAR(s_measure(gt, gt), 1.0, 1e-6);
  EXPECT_EQ(s_measure(Raster(1, 8, 8), Raster(1, 8, 8)), 1.0);
  EXPECT_NEAR(s_measure(Raster(1, 8, 8, 0.25), Raster(1, 8, 8, 1.0)), 0.25, 1e-15);
  Raster quadrant(1, 16, 16);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) quadrant.at(y, x) = 1.0;
  EXPECT_NEAR(s_measure(scaled(quadrant, 0.9), quadrant), oracle::s_measure(scaled(quadrant, 0.9), quadrant), 1e-9);
  EXPECT_LT(s_measure(inverted(gt), gt), 0.1);
}

TEST(SMeasure, MatchesOracleOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [pred, gt] = oracle::random_pair(1000 + seed, 9, 7);
    EXPECT_NEAR(s_measure(pred, gt), oracle::s_measure(pred, gt), 1e-9) << seed;
  }
}

TEST(SMeasure, ReflectionInvariance) {
  // Mirroring both maps left-right changes only the region split order.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [pred, gt] = oracle::random_pair(2000 + seed, 8, 8);
    Raster p2 = pred, g2 = gt;
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) {
        p2.at(y, x) = pred.at(y, 7 - x);
        g2.at(y, x) = gt.at(y, 7 - x);
      }
    EXPECT_NEAR(oracle::s_measure(p2, g2), s_measure(p2, g2), 1e-9);
  }
}

TEST(EMeasure, PerfectAndInvertedAlignment) {
  const Raster gt = square(16, 16, 4, 4, 6);
  const auto curve = e_measure_curve(gt, gt);
  for (std::size_t t = 1; t < kThresholds; ++t) EXPECT_NEAR(curve[t], 1.0, 1e-6) << t;
  EXPECT_GT(e_measure_mean(gt, gt), 0.5);
  const auto inv = e_measure_curve(inverted(gt), gt);
  for (std::size_t t = 1; t < kThresholds; ++t) EXPECT_LT(inv[t], 1e-6) << t;
  EXPECT_NEAR(enhanced_alignment(gt, gt), 1.0, 1e-6);
}

TEST(EMeasure, MatchesPerThresholdOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [pred, gt] = oracle::random_pair(3000 + seed, 8, 8);
    const auto curve = e_measure_curve(pred, gt);
    for (std::size_t t = 0; t < kThresholds; ++t) {
      ASSERT_NEAR(curve[t], oracle::e_at_threshold(pred, gt, static_cast<Real>(t) / 255.0), 1e-9)
          << "seed " << seed << " threshold " << t;
    }
  }
  // Constant ground truth uses the shifted bias rule.
  const Raster empty(1, 6, 6);
  const auto [pred, unused] = oracle::random_pair(3100, 6, 6);
  const auto curve = e_measure_curve(pred, empty);
  for (std::size_t t = 0; t < kThresholds; t += 17) {
    EXPECT_NEAR(curve[t], oracle::e_at_threshold(pred, empty, static_cast<Real>(t) / 255.0), 1e-9);
  }
}

TEST(EMeasure, ThresholdsUseGreaterOrEqual) {
  // A pixel exactly at k/255 is foreground at threshold k.
  Raster pred(1, 2, 2);
  pred.values = {128.0 / 255.0, 0.0, 0.0, 0.0};
  const Raster gt = from_rows(2, 2, {1, 0, 0, 0});
  const auto curve = e_measure_curve(pred, gt);
  EXPECT_NEAR(curve[128], 1.0, 1e-6);
  EXPECT_LT(curve[129], 1.0);
}

TEST(WeightedF, Definitions) {
  const Raster gt = square(16, 16, 5, 5, 5);
  EXPECT_NEAR(weighted_f(gt, gt), 1.0, 1e-6);
  EXPECT_NEAR(weighted_f(Raster(1, 16, 16), gt), 0.0, 1e-12);
  EXPECT_EQ(weighted_f(Raster(1, 8, 8), Raster(1, 8, 8)), 1.0);
  EXPECT_EQ(weighted_f(Raster(1, 8, 8, 0.1), Raster(1, 8, 8)), 0.0);
}

TEST(WeightedF, DistanceTransformMatchesExhaustive) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [pred, gt] = oracle::random_pair(4000 + seed, 11, 9);
    const auto fast = squared_distance_transform(gt);
    const auto slow = oracle::squared_distance(gt);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_EQ(fast[i], slow[i]);
  }
}

TEST(WeightedF, MatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [pred, gt] = oracle::random_pair(5000 + seed, 8, 8);
    EXPECT_NEAR(weighted_f(pred, gt), oracle::weighted_f(pred, gt), 1e-6) << seed;
  }
  const Raster gt = square(12, 12, 1, 2, 4);
  const auto [pred, unused] = oracle::random_pair(5100, 12, 12);
  EXPECT_NEAR(weighted_f(pred, gt), oracle::weighted_f(pred, gt), 1e-6);
}

TEST(WeightedF, MonotoneInForegroundConfidence) {
  const Raster gt = square(16, 16, 4, 6, 6);
  Real previous = -1;
  for (Real k : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const Real f = weighted_f(scaled(gt, k), gt);
    EXPECT_GT(f, previous);
    previous = f;
  }
}

TEST(Metrics, ShuffledPredictionScoresWorse) {
  const Raster gt = square(16, 16, 3, 3, 7);
  Raster shuffled = gt;
  std::shuffle(shuffled.values.begin(), shuffled.values.end(), std::mt19937_64(1));
  EXPECT_LT(s_measure(shuffled, gt), s_measure(gt, gt));
  EXPECT_LT(e_measure_mean(shuffled, gt), e_measure_mean(gt, gt));
  EXPECT_LT(weighted_f(shuffled, gt), weighted_f(gt, gt));
  EXPECT_GT(mae(shuffled, gt), mae(gt, gt));
}

class EvaluateFolder : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("errnet_eval_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_ / "pred");
    fs::create_directories(root_ / "gt");
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

TEST_F(EvaluateFolder, IdenticalFolders) {
  for (int i = 0; i < 3; ++i) {
    const Raster gt = square(16, 16, 2 + static_cast<std::size_t>(i), 3, 6);
    write_map(root_ / "gt" / ("m" + std::to_string(i) + ".pgm"), gt);
    write_map(root_ / "pred" / ("m" + std::to_string(i) + ".pgm"), gt);
  }
  const MetricReport r = evaluate_folder(root_ / "pred", root_ / "gt");
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.mean.s_alpha, 1.0, 1e-6);
  EXPECT_GT(r.mean.e_phi, 0.5);
  EXPECT_NEAR(r.mean.f_w_beta, 1.0, 1e-6);
  EXPECT_EQ(r.mean.mae, 0.0);
}

TEST_F(EvaluateFolder, MeansAreArithmeticAverages) {
  std::vector<ImageMetrics> expected;
  for (int i = 0; i < 3; ++i) {
    const auto [pred, gt] = oracle::random_pair(6000 + static_cast<std::uint64_t>(i), 10, 10);
    const std::string name = "x" + std::to_string(i) + ".pgm";
    write_map(root_ / "gt" / name, gt);
    write_map(root_ / "pred" / name, pred);
    expected.push_back(evaluate_pair(name, read_map(root_ / "pred" / name), gt));
  }
  const MetricReport r = evaluate_folder(root_ / "pred", root_ / "gt");
  ASSERT_TRUE(r.ok());
  Real s = 0, e = 0, f = 0, m = 0;
  for (const auto& x : expected) {
    s += x.s_alpha;
    e += x.e_phi;
    f += x.f_w_beta;
    m += x.mae;
  }
  EXPECT_NEAR(r.mean.s_alpha, s / 3, 1e-12);
  EXPECT_NEAR(r.mean.e_phi, e / 3, 1e-12);
  EXPECT_NEAR(r.mean.f_w_beta, f / 3, 1e-12);
  EXPECT_NEAR(r.mean.mae, m / 3, 1e-12);
  const std::string csv = report_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.rfind("MEAN,", std::string::npos) != std::string::npos, true);
}

TEST_F(EvaluateFolder, EmptyAndMismatchedFolders) {
  EXPECT_FALSE(evaluate_folder(root_ / "pred", root_ / "gt").ok());
  write_map(root_ / "gt" / "a.pgm", square(8, 8, 1, 1, 3));
  write_map(root_ / "pred" / "b.pgm", square(8, 8, 1, 1, 3));
  const MetricReport r = evaluate_folder(root_ / "pred", root_ / "gt");
  EXPECT_FALSE(r.ok());
  std::string all;
  for (const auto& e : r.errors) all += e + "\n";
  EXPECT_NE(all.find("a.pgm"), std::string::npos);
  EXPECT_NE(all.find("b.pgm"), std::string::npos);
}
