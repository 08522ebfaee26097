#include "errnet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include "errnet/adam.hpp"
#include "errnet/errnet.hpp"
#include "errnet/gradcheck.hpp"
#include "errnet/losses.hpp"
#include "errnet/netpbm.hpp"
#include "errnet/ops.hpp"

namespace errnet::cli {

namespace fs = std::filesystem;

namespace {

std::string loss_row(std::size_t iter, std::size_t epoch, std::size_t size, const LossBreakdown& b) {
  char buf[512];
  int n = std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.12e,%.12e", iter, epoch, size, b.total, b.edge);
  for (const auto& level : b.per_level) {
    n += std::snprintf(buf + n, sizeof(buf) - static_cast<std::size_t>(n), ",%.12e,%.12e", level.wbce, level.wiou);
  }
  return std::string(buf) + "\n";
}

Tensor random_tensor(Shape s, std::mt19937_64& rng, Real lo = -1.0, Real hi = 1.0) {
  std::uniform_real_distribution<Real> uni(lo, hi);
  std::vector<Real> v(s.numel());
  for (auto& x : v) x = uni(rng);
  return Tensor::from_data(s, std::move(v));
}

// Random values bounded away from zero, for ops with a kink there.
Tensor kink_free_tensor(Shape s, std::mt19937_64& rng) {
  std::uniform_real_distribution<Real> uni(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<Real> v(s.numel());
  for (auto& x : v) x = sign(rng) ? uni(rng) : -uni(rng);
  return Tensor::from_data(s, std::move(v));
}

// Projects a tensor-valued op onto a scalar with fixed random weights.
std::function<Tensor(const Tensor&)> projected(std::function<Tensor(const Tensor&)> op, Shape out,
                                               std::mt19937_64& rng) {
  const Tensor weights = random_tensor(out, rng);
  return [op = std::move(op), weights](const Tensor& x) { return sum(mul(op(x), weights)); };
}

std::vector<fs::path> list_images(const fs::path& input) {
  fs::path dir = input;
  if (fs::is_directory(input / "images")) dir = input / "images";
  if (!fs::is_directory(dir)) throw std::invalid_argument("input directory not found: " + input.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no .ppm images in " + dir.string());
  return files;
}

Raster probability_map(const Tensor& logits, std::size_t h, std::size_t w) {
  return to_raster(sigmoid(bilinear_resize(logits, h, w)));
}

}  // namespace

std::size_t synth(const SynthConfig& config, const fs::path& out, std::ostream& log) {
  const auto samples = synth_generate(config);
  write_dataset(out, samples);
  log << "wrote " << samples.size() << " samples to " << out.string() << "\n";
  return samples.size();
}

std::string loss_csv_header() {
  return "iter,epoch,size,total,edge,wbce_3,wiou_3,wbce_4,wiou_4,wbce_5,wiou_5,wbce_g,wiou_g\n";
}

TrainSummary train(const TrainConfig& config, const fs::path& data_root, const fs::path& out_dir,
                   std::ostream& log, const std::optional<fs::path>& resume) {
  config.validate();
  const std::vector<Sample> samples = read_dataset(data_root);
  fs::create_directories(out_dir);

  ErrNet model(config.model, config.seed);
  if (resume) load_parameters(*resume, model.parameters());
  AdamState adam;

  std::ofstream csv(out_dir / "loss.csv", std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + (out_dir / "loss.csv").string());
  csv << loss_csv_header() << std::flush;

  const std::size_t per_epoch = (samples.size() + config.batch - 1) / config.batch;
  const std::size_t total = config.iterations ? config.iterations : config.epochs * per_epoch;
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainSummary summary;
  std::size_t iter = 0;
  for (std::size_t epoch = 1; iter < total; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    Real epoch_sum = 0;
    std::size_t epoch_iters = 0;
    for (std::size_t start = 0; start < order.size() && iter < total; start += config.batch) {
      std::vector<const Sample*> members;
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch); ++k) {
        members.push_back(&samples[order[k]]);
      }
      const Real scale = config.scales[std::uniform_int_distribution<std::size_t>(0, config.scales.size() - 1)(rng)];
      const Batch batch = multiscale_batch(members, config.input_size, scale);

      const PredictionSet ps = model.forward(batch.image);
      const LossResult loss = total_loss(ps, batch.mask, batch.edge);
      model.parameters().zero_grad();
      backward(loss.total);
      adam_step(model.parameters(), adam, config.lr);

      ++iter;
      ++epoch_iters;
      epoch_sum += loss.breakdown.total;
      csv << loss_row(iter, epoch, batch.image.shape().h, loss.breakdown) << std::flush;
    }
    summary.epoch_means.push_back(epoch_sum / static_cast<Real>(epoch_iters));
    log << "epoch " << epoch << " iter " << iter << " mean loss " << summary.epoch_means.back() << "\n";
  }
  summary.iterations = iter;

  save_parameters(out_dir / "model.ckpt", model.parameters());
  std::ofstream cfg(out_dir / "config.txt", std::ios::trunc);
  cfg << config.to_key_values().dump();
  return summary;
}

std::size_t predict(const TrainConfig& config, const PredictOptions& options, std::ostream& log) {
  config.validate();
  const auto files = list_images(options.input);
  ErrNet model(config.model, config.seed);
  load_parameters(options.checkpoint, model.parameters());
  fs::create_directories(options.out);
  if (options.dump_all) fs::create_directories(options.out / "priors");

  NoGradGuard no_grad;
  for (const auto& file : files) {
    const Raster image = read_map(file);
    if (image.channels != 3) throw std::invalid_argument(file.string() + " is not a 3-channel image");
    Tensor input = to_tensor(image);
    if (image.height != config.input_size || image.width != config.input_size) {
      input = bilinear_resize(input, config.input_size, config.input_size);
    }
    const PredictionSet ps = model.forward(input);
    const std::string stem = file.stem().string();
    write_map(options.out / (stem + ".pgm"), to_raster(final_prediction(ps, image.height, image.width)));
    if (options.dump_all) {
      const std::pair<const char*, const Tensor*> extra[] = {
          {"p4", &ps.p_4}, {"p5", &ps.p_5}, {"pg", &ps.p_g}, {"pe", &ps.p_e}};
      for (const auto& [tag, t] : extra) {
        write_map(options.out / "priors" / (stem + "_" + tag + ".pgm"),
                  probability_map(*t, image.height, image.width));
      }
    }
  }
  log << "predicted " << files.size() << " images into " << options.out.string() << "\n";
  return files.size();
}

bool GradcheckReport::ok() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(), [](const GradcheckEntry& e) { return e.pass(); });
}

GradcheckReport gradcheck(std::uint64_t seed, std::ostream* progress) {
  GradcheckReport report;
  std::mt19937_64 rng(seed);
  auto record = [&](std::string name, Real err, Real threshold) {
    report.entries.push_back({std::move(name), err, threshold});
    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%-40s %.3e  %s\n", report.entries.back().component.c_str(), err,
                    err < threshold ? "ok" : "FAIL");
      *progress << buf << std::flush;
    }
  };
  constexpr Real eps = 1e-6;

  // Individual ops.
  {
    const Tensor weight = random_tensor({3, 2, 3, 3}, rng);
    const Tensor bias = random_tensor({1, 3, 1, 1}, rng);
    const Tensor x = random_tensor({1, 2, 6, 6}, rng);
    auto conv_with = [](std::size_t stride, std::size_t pad, std::size_t dil) {
      return [=](const Tensor& in, const Tensor& w, const Tensor& b) {
        return conv2d(in, {w, b, stride, pad, dil});
      };
    };
    for (auto [stride, pad, dil] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 2, 2}, {2, 1, 1}}) {
      const auto conv = conv_with(stride, pad, dil);
      const Shape out = conv(x, weight, bias).shape();
      const std::string tag = "conv2d[s" + std::to_string(stride) + ",d" + std::to_string(dil) + "]";
      record(tag + ".input", grad_check(projected([&](const Tensor& t) { return conv(t, weight, bias); }, out, rng), x, eps), kOpTolerance);
      record(tag + ".kernel", grad_check(projected([&](const Tensor& t) { return conv(x, t, bias); }, out, rng), weight, eps), kOpTolerance);
      record(tag + ".bias", grad_check(projected([&](const Tensor& t) { return conv(x, weight, t); }, out, rng), bias, eps), kOpTolerance);
    }
  }
  {
    const Tensor x = random_tensor({1, 2, 3, 5}, rng);
    record("bilinear_resize.up", grad_check(projected([](const Tensor& t) { return bilinear_resize(t, 7, 8); }, {1, 2, 7, 8}, rng), x, eps), kOpTolerance);
    record("bilinear_resize.down", grad_check(projected([](const Tensor& t) { return bilinear_resize(t, 2, 2); }, {1, 2, 2, 2}, rng), x, eps), kOpTolerance);
  }
  {
    const Tensor a = random_tensor({1, 2, 3, 3}, rng);
    const Tensor b = random_tensor({1, 3, 3, 3}, rng);
    record("concat_channels", grad_check(projected([&](const Tensor& t) { return concat_channels({t, b, t}); }, {1, 7, 3, 3}, rng), a, eps), kOpTolerance);
    const Tensor c = random_tensor({1, 2, 3, 3}, rng);
    record("add", grad_check(projected([&](const Tensor& t) { return add(t, c); }, a.shape(), rng), a, eps), kOpTolerance);
    record("sub", grad_check(projected([&](const Tensor& t) { return sub(c, t); }, a.shape(), rng), a, eps), kOpTolerance);
    record("mul", grad_check(projected([&](const Tensor& t) { return mul(t, c); }, a.shape(), rng), a, eps), kOpTolerance);
    record("mul.shared_input", grad_check(projected([](const Tensor& t) { return mul(t, t); }, a.shape(), rng), a, eps), kOpTolerance);
    record("one_minus", grad_check(projected([](const Tensor& t) { return one_minus(t); }, a.shape(), rng), a, eps), kOpTolerance);
    record("sigmoid", grad_check(projected([](const Tensor& t) { return sigmoid(t); }, a.shape(), rng), random_tensor(a.shape(), rng, -4, 4), eps), kOpTolerance);
    record("relu", grad_check(projected([](const Tensor& t) { return relu(t); }, a.shape(), rng), kink_free_tensor(a.shape(), rng), eps), kOpTolerance);
  }
  {
    const Tensor x = random_tensor({1, 2, 6, 6}, rng);
    record("avg_pool[k3,s1,p1]", grad_check(projected([](const Tensor& t) { return avg_pool(t, 3, 1, 1); }, {1, 2, 6, 6}, rng), x, eps), kOpTolerance);
    record("avg_pool[k3,s2,p0]", grad_check(projected([](const Tensor& t) { return avg_pool(t, 3, 2, 0); }, {1, 2, 2, 2}, rng), x, eps), kOpTolerance);
    const Tensor m = random_tensor({1, 1, 4, 4}, rng);
    record("stack_channels", grad_check(projected([](const Tensor& t) { return stack_channels(t, 3); }, {1, 3, 4, 4}, rng), m, eps), kOpTolerance);
  }
  {
    std::bernoulli_distribution coin(0.4);
    std::vector<Real> g(2 * 36);
    for (auto& v : g) v = coin(rng) ? 1.0 : 0.0;
    const Tensor target = Tensor::from_data({2, 1, 6, 6}, g);
    const Tensor weight = pixel_weight_map(target);
    const Tensor logits = random_tensor({2, 1, 6, 6}, rng, -3, 3);
    record("weighted_bce", grad_check([&](const Tensor& t) { return weighted_bce(t, target, weight); }, logits, eps), kOpTolerance);
    record("weighted_iou", grad_check([&](const Tensor& t) { return weighted_iou(t, target, weight); }, logits, eps), kOpTolerance);
  }

  // Full objective w.r.t. every parameter tensor.
  ErrNet model(ErrNetConfig{}, seed);
  SynthConfig sc;
  sc.seed = seed;
  sc.count = 1;
  sc.size = 32;
  const Sample sample = synth_generate(sc).front();
  const Tensor image = to_tensor(sample.image);
  const Tensor mask = to_tensor(sample.mask);
  const Tensor edge = to_tensor(sample.edge);
  const auto loss_fn = [&] { return total_loss(model.forward(image), mask, edge).total; };

  model.parameters().zero_grad();
  backward(loss_fn());
  std::vector<std::vector<Real>> grads;
  for (const auto& [name, t] : model.parameters().entries()) grads.emplace_back(t.grad().begin(), t.grad().end());
  model.parameters().zero_grad();

  std::bernoulli_distribution coin(0.5);
  for (std::size_t p = 0; p < model.parameters().size(); ++p) {
    const auto& [name, t] = model.parameters().entries()[p];
    // The largest-magnitude entries plus one random +/-1 direction.
    std::vector<std::size_t> idx(t.numel());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t k = std::min<std::size_t>(3, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return std::abs(grads[p][a]) > std::abs(grads[p][b]); });
    idx.resize(k);
    std::vector<Real> direction(t.numel());
    for (auto& d : direction) d = coin(rng) ? 1.0 : -1.0;
    record("loss/" + name, grad_check_leaf(loss_fn, t, idx, eps, &direction), kModelTolerance);
  }
  return report;
}

metrics::MetricReport evaluate(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& csv_path) {
  auto report = metrics::evaluate_folder(pred_dir, gt_dir);
  if (!csv_path.empty()) {
    if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
    std::ofstream f(csv_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + csv_path.string());
    f << metrics::report_csv(report);
  }
  return report;
}

}  // namespace errnet::cli
