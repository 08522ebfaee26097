#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "errnet/adam.hpp"
#include "errnet/commands.hpp"
#include "errnet/config.hpp"
#include "errnet/netpbm.hpp"
#include "errnet/parameters.hpp"

using namespace errnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("errnet_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

TrainConfig tiny_config() {
  TrainConfig c;
  c.input_size = 32;
  c.batch = 2;
  c.iterations = 3;
  c.scales = {1.0};
  c.lr = 1e-3;
  return c;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParameters) {
  ParameterStore store;
  Tensor p = store.add("p", Tensor::from_data({1, 1, 1, 3}, {1, -2, 3}));
  AdamState state;
  backward(sum(scale(p, 0.0)));
  adam_step(store, state, 0.1);
  EXPECT_EQ(std::vector<Real>(p.data().begin(), p.data().end()), (std::vector<Real>{1, -2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  Tensor p = store.add("p", Tensor::from_data({1, 1, 1, 2}, {0.5, 0.5}));
  AdamState state;
  backward(sum(mul(p, Tensor::from_data({1, 1, 1, 2}, {3.0, -0.25}))));
  adam_step(store, state, 0.01);
  EXPECT_NEAR(p.data()[0], 0.5 - 0.01, 1e-9);
  EXPECT_NEAR(p.data()[1], 0.5 + 0.01, 1e-9);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, DescendsQuadratic) {
  ParameterStore store;
  Tensor x = store.add("x", Tensor::scalar(1.0));
  AdamState state;
  Real previous = 1.0;
  for (int i = 0; i < 10; ++i) {
    store.zero_grad();
    backward(mul(x, x));
    adam_step(store, state, 0.1);
    EXPECT_LT(std::abs(x.item()), previous);
    previous = std::abs(x.item());
  }
}

TEST(Adam, MissingGradientNamesParameter) {
  ParameterStore store;
  store.add("lonely", Tensor::scalar(1.0));
  AdamState state;
  try {
    adam_step(store, state, 0.1);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("lonely"), std::string::npos);
  }
}

TEST(Config, ParseAndPrecedence) {
  const auto file = KeyValueConfig::parse("# comment\nlr = 0.5\n  batch=2  # trailing\n\nscales = 1, 1.5\n");
  EXPECT_EQ(file.get_real("lr", 0), 0.5);
  EXPECT_EQ(file.get_int("batch", 0), 2);
  EXPECT_EQ(file.get_reals("scales", {}), (std::vector<Real>{1.0, 1.5}));
  KeyValueConfig merged = TrainConfig{}.to_key_values();
  merged.merge(file);
  KeyValueConfig flags;
  flags.set("lr", "0.25");
  merged.merge(flags);
  const TrainConfig c = TrainConfig::from(merged);
  EXPECT_EQ(c.lr, 0.25);
  EXPECT_EQ(c.batch, 2u);
  EXPECT_EQ(c.epochs, TrainConfig{}.epochs);
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), std::invalid_argument);
}

TEST(Config, ValidationAndRoundTrip) {
  TrainConfig c;
  c.input_size = 50;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.input_size = 64;
  c.lr = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const TrainConfig full = TrainConfig::full_scale();
  EXPECT_EQ(full.input_size, 352u);
  EXPECT_EQ(full.batch, 36u);
  EXPECT_EQ(full.epochs, 30u);
  EXPECT_EQ(full.lr, 1e-4);
  const TrainConfig back = TrainConfig::from(full.to_key_values());
  EXPECT_EQ(back.model.encoder.channels, full.model.encoder.channels);
  EXPECT_EQ(back.scales, full.scales);
}

TEST_F(Workspace, CheckpointRoundTripAndErrors) {
  ErrNet a(ErrNetConfig{}, 1), b(ErrNetConfig{}, 2);
  save_parameters(root_ / "a.ckpt", a.parameters());
  load_parameters(root_ / "a.ckpt", b.parameters());
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    const auto& x = a.parameters().entries()[i].second;
    const auto& y = b.parameters().entries()[i].second;
    EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
  }
  const std::string bytes = slurp(root_ / "a.ckpt");
  EXPECT_EQ(bytes.substr(0, 11), "ERRNETCKPT1");

  std::ofstream(root_ / "trunc.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(load_parameters(root_ / "trunc.ckpt", b.parameters()), std::runtime_error);
  std::ofstream(root_ / "magic.ckpt", std::ios::binary) << "NOTACKPT" << bytes.substr(11);
  EXPECT_THROW(load_parameters(root_ / "magic.ckpt", b.parameters()), std::runtime_error);

  ErrNetConfig wide;
  wide.aspp_mid_channels = 32;
  ErrNet c(wide, 1);
  try {
    load_parameters(root_ / "a.ckpt", c.parameters());
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("aspp."), std::string::npos) << e.what();
  }
}

TEST_F(Workspace, SynthTrainPredictEvalPipeline) {
  SynthConfig sc;
  sc.count = 3;
  sc.size = 32;
  std::ostringstream log;
  EXPECT_EQ(cli::synth(sc, root_ / "data", log), 3u);

  const TrainConfig cfg = tiny_config();
  const auto summary = cli::train(cfg, root_ / "data", root_ / "run", log);
  EXPECT_EQ(summary.iterations, 3u);
  const std::string csv = slurp(root_ / "run" / "loss.csv");
  EXPECT_EQ(csv.substr(0, cli::loss_csv_header().size()), cli::loss_csv_header());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_TRUE(fs::exists(root_ / "run" / "model.ckpt"));
  EXPECT_EQ(TrainConfig::from(KeyValueConfig::load(root_ / "run" / "config.txt")).lr, cfg.lr);

  cli::PredictOptions opts{root_ / "run" / "model.ckpt", root_ / "data", root_ / "pred", true};
  EXPECT_EQ(cli::predict(cfg, opts, log), 3u);
  std::size_t maps = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "pred")) maps += e.path().extension() == ".pgm";
  EXPECT_EQ(maps, 15u);
  const Raster p = read_map(root_ / "pred" / "sample_0000.pgm");
  EXPECT_EQ(p.height, 32u);
  EXPECT_EQ(p.width, 32u);

  const auto first = slurp(root_ / "pred" / "sample_0002.pgm");
  opts.out = root_ / "pred2";
  opts.dump_all = false;
  cli::predict(cfg, opts, log);
  EXPECT_EQ(first, slurp(root_ / "pred2" / "sample_0002.pgm"));

  const auto report = cli::evaluate(root_ / "pred2", root_ / "data" / "masks", root_ / "eval.csv");
  EXPECT_TRUE(report.ok());
  const std::string rows = slurp(root_ / "eval.csv");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 5);  // header + 3 images + mean
}

TEST_F(Workspace, ResumeReproducesForward) {
  SynthConfig sc;
  sc.count = 2;
  sc.size = 32;
  std::ostringstream log;
  cli::synth(sc, root_ / "data", log);
  TrainConfig cfg = tiny_config();
  cli::train(cfg, root_ / "data", root_ / "run", log);

  ErrNet a(cfg.model, cfg.seed), b(cfg.model, cfg.seed + 1);
  load_parameters(root_ / "run" / "model.ckpt", a.parameters());
  load_parameters(root_ / "run" / "model.ckpt", b.parameters());
  const Tensor x = to_tensor(read_dataset(root_ / "data")[0].image);
  const Tensor pa = a.forward(x).p_3, pb = b.forward(x).p_3;
  EXPECT_TRUE(std::equal(pa.data().begin(), pa.data().end(), pb.data().begin()));

  cfg.iterations = 1;
  cli::train(cfg, root_ / "data", root_ / "resumed", log, root_ / "run" / "model.ckpt");
  EXPECT_TRUE(fs::exists(root_ / "resumed" / "model.ckpt"));
}

TEST_F(Workspace, TrainRejectsIncompleteDataset) {
  SynthConfig sc;
  sc.count = 2;
  sc.size = 32;
  std::ostringstream log;
  cli::synth(sc, root_ / "data", log);
  fs::remove(root_ / "data" / "edges" / "sample_0000.pgm");
  EXPECT_THROW(cli::train(tiny_config(), root_ / "data", root_ / "run", log), std::exception);
}

TEST(Gradcheck, ReportCoversOpsAndParameterGroups) {
  const auto report = cli::gradcheck(7);
  EXPECT_TRUE(report.ok());
  ErrNet net(ErrNetConfig{}, 7);
  for (const auto& [name, t] : net.parameters().entries()) {
    const bool listed = std::any_of(report.entries.begin(), report.entries.end(),
                                    [&](const cli::GradcheckEntry& e) { return e.component == "loss/" + name; });
    EXPECT_TRUE(listed) << name;
  }
  for (const auto& e : report.entries) {
    if (e.component.rfind("loss/", 0) != 0) {
      EXPECT_EQ(e.threshold, cli::kOpTolerance) << e.component;
    }
  }
}

TEST(Gradcheck, CorruptedSigmoidBackwardFails) {
  errnet::testing::set_sigmoid_backward_fault(1.1);
  const auto report = cli::gradcheck(7);
  errnet::testing::set_sigmoid_backward_fault(1.0);
  EXPECT_FALSE(report.ok());
}
