#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "errnet/commands.hpp"
#include "errnet/config.hpp"
#include "errnet/ops.hpp"

namespace fs = std::filesystem;
using namespace errnet;

namespace {

// Flags that override config-file keys. Unset flags leave the key alone.
struct Overrides {
  std::deque<std::pair<std::string, std::string>> slots;  // stable addresses for CLI11

  std::string& bind(const std::string& key) { return slots.emplace_back(key, std::string{}).second; }
  void apply(KeyValueConfig& kv) const {
    for (const auto& [key, value] : slots) {
      if (!value.empty()) kv.set(key, value);
    }
  }
};

void echo(const KeyValueConfig& kv) {
  std::cout << "# effective config\n";
  for (const auto& [k, v] : kv.values()) std::cout << "# " << k << " = " << v << "\n";
  std::cout << std::flush;
}

KeyValueConfig layered(const std::string& config_path, const Overrides& flags, const KeyValueConfig& defaults) {
  KeyValueConfig kv = defaults;
  if (!config_path.empty()) kv.merge(KeyValueConfig::load(config_path));
  flags.apply(kv);
  return kv;
}

KeyValueConfig synth_defaults() {
  const SynthConfig d;
  KeyValueConfig kv;
  kv.set("seed", std::to_string(d.seed));
  kv.set("count", std::to_string(d.count));
  kv.set("size", std::to_string(d.size));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", d.contrast);
  kv.set("contrast", buf);
  return kv;
}

SynthConfig synth_from(const KeyValueConfig& kv) {
  SynthConfig c;
  const std::int64_t seed = kv.get_int("seed", 7);
  const std::int64_t count = kv.get_int("count", 8);
  const std::int64_t size = kv.get_int("size", 64);
  if (seed < 0) throw std::invalid_argument("seed must be non-negative");
  if (count <= 0) throw std::invalid_argument("count must be positive");
  if (size <= 0) throw std::invalid_argument("size must be a positive multiple of 32");
  c.seed = static_cast<std::uint64_t>(seed);
  c.count = static_cast<std::size_t>(count);
  c.size = static_cast<std::size_t>(size);
  c.contrast = kv.get_real("contrast", c.contrast);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ERRNet camouflaged object detection: synthesis, training, inference, evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  Overrides flags;

  auto shared = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value settings file");
    cmd->add_option("--seed", flags.bind("seed"), "random seed");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic camouflage dataset");
  shared(synth);
  synth->add_option("--out", out, "dataset root")->required();
  synth->add_option("--count", flags.bind("count"), "number of samples");
  synth->add_option("--size", flags.bind("size"), "image side, multiple of 32");
  synth->add_option("--contrast", flags.bind("contrast"), "foreground/background mean offset");

  std::string data;
  std::string resume;
  auto* train = app.add_subcommand("train", "train a model on a dataset");
  shared(train);
  train->add_option("--out", out, "run directory")->required();
  train->add_option("--data", data, "dataset root")->required();
  train->add_option("--resume", resume, "checkpoint to start from");
  train->add_option("--lr", flags.bind("lr"), "Adam learning rate");
  train->add_option("--iterations", flags.bind("iterations"), "total iterations (overrides epochs)");
  train->add_option("--epochs", flags.bind("epochs"), "full passes over the data");
  train->add_option("--batch", flags.bind("batch"), "mini-batch size");
  train->add_option("--input-size", flags.bind("input_size"), "base training resolution");
  train->add_option("--scales", flags.bind("scales"), "comma-separated multiscale factors");

  cli::PredictOptions predict_opts;
  std::string checkpoint;
  std::string input;
  auto* predict = app.add_subcommand("predict", "write prediction maps for a folder of images");
  shared(predict);
  predict->add_option("--out", out, "output directory")->required();
  predict->add_option("--checkpoint", checkpoint, "model.ckpt from train")->required();
  predict->add_option("--input", input, "image directory or dataset root")->required();
  predict->add_option("--input-size", flags.bind("input_size"), "network resolution");
  predict->add_flag("--dump-all", predict_opts.dump_all, "also write p_4, p_5, p_g and p_e maps");

  std::string pred_dir;
  std::string gt_dir;
  auto* eval = app.add_subcommand("eval", "score predictions against ground-truth masks");
  eval->add_option("--config", config_path, "unused; accepted for uniformity");
  eval->add_option("--seed", flags.bind("seed"), "unused; accepted for uniformity");
  eval->add_option("--pred", pred_dir, "prediction directory")->required();
  eval->add_option("--gt", gt_dir, "ground-truth mask directory")->required();
  eval->add_option("--out", out, "CSV report path");

  bool inject_fault = false;
  auto* grad = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  shared(grad);
  grad->add_option("--out", out, "report path");
  grad->add_flag("--inject-fault", inject_fault, "corrupt the sigmoid backward pass (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const KeyValueConfig kv = layered(config_path, flags, synth_defaults());
      echo(kv);
      cli::synth(synth_from(kv), out, std::cout);
      return cli::kSuccess;
    }
    if (train->parsed() || predict->parsed()) {
      const KeyValueConfig kv = layered(config_path, flags, TrainConfig{}.to_key_values());
      const TrainConfig cfg = TrainConfig::from(kv);
      echo(cfg.to_key_values());
      if (train->parsed()) {
        std::optional<fs::path> from;
        if (!resume.empty()) from = resume;
        const auto summary = cli::train(cfg, data, out, std::cout, from);
        std::cout << "trained " << summary.iterations << " iterations; checkpoint "
                  << (fs::path(out) / "model.ckpt").string() << "\n";
      } else {
        predict_opts.checkpoint = checkpoint;
        predict_opts.input = input;
        predict_opts.out = out;
        cli::predict(cfg, predict_opts, std::cout);
      }
      return cli::kSuccess;
    }
    if (eval->parsed()) {
      const auto report = cli::evaluate(pred_dir, gt_dir, out);
      for (const auto& e : report.errors) std::cerr << "error: " << e << "\n";
      if (!report.ok()) return cli::kValidationError;
      std::printf("S_alpha %.6f\nE_phi %.6f\nFw_beta %.6f\nMAE %.6f\n", report.mean.s_alpha, report.mean.e_phi,
                  report.mean.f_w_beta, report.mean.mae);
      return cli::kSuccess;
    }
    if (grad->parsed()) {
      KeyValueConfig defaults;
      defaults.set("seed", "7");
      const KeyValueConfig kv = layered(config_path, flags, defaults);
      echo(kv);
      if (inject_fault) testing::set_sigmoid_backward_fault(1.1);
      const auto report = cli::gradcheck(static_cast<std::uint64_t>(kv.get_int("seed", 7)), &std::cout);
      Real worst = 0;
      for (const auto& e : report.entries) worst = std::max(worst, e.max_relative_error / e.threshold);
      std::cout << (report.ok() ? "gradcheck passed" : "gradcheck FAILED") << " ("
                << report.entries.size() << " components, worst error/threshold " << worst << ")\n";
      if (!out.empty()) {
        std::ofstream f(out);
        f << "component,max_relative_error,threshold,pass\n";
        for (const auto& e : report.entries) {
          f << e.component << "," << e.max_relative_error << "," << e.threshold << "," << (e.pass() ? 1 : 0) << "\n";
        }
      }
      return report.ok() ? cli::kSuccess : cli::kNumericalFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kValidationError;
  }
  return cli::kValidationError;
}
