#include "errnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "errnet/ops.hpp"

namespace errnet {

namespace {

void require_binary(const Tensor& g, const char* what) {
  for (Real v : g.data()) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument(std::string(what) + " must be binary, found value " + std::to_string(v));
    }
  }
}

void require_triple(const Tensor& logits, const Tensor& g, const Tensor& w, const char* op) {
  if (logits.shape() != g.shape() || logits.shape() != w.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch logits " + logits.shape().str() +
                                ", target " + g.shape().str() + ", weight " + w.shape().str());
  }
}

// log(1 + exp(-|x|)) + max(x, 0) - x*g
Real bce_term(Real x, Real g) { return std::max(x, 0.0) - x * g + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Tensor pixel_weight_map(const Tensor& g) {
  require_binary(g, "pixel_weight_map target");
  NoGradGuard no_grad;
  const Tensor pooled = avg_pool(g, 31, 1, 15);
  std::vector<Real> w(g.numel());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 + 5.0 * std::abs(pooled.data()[i] - g.data()[i]);
  return Tensor::from_data(g.shape(), std::move(w));
}

Tensor weighted_bce(const Tensor& logits, const Tensor& g, const Tensor& weight) {
  require_triple(logits, g, weight, "weighted_bce");
  const Shape s = logits.shape();
  const std::size_t per = s.c * s.plane();
  const Real* x = logits.data().data();
  const Real* t = g.data().data();
  const Real* w = weight.data().data();
  std::vector<Real> weight_sums(s.n, 0.0);
  Real total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    Real num = 0.0, den = 0.0;
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) {
      num += w[i] * bce_term(x[i], t[i]);
      den += w[i];
    }
    weight_sums[n] = den;
    total += num / den;
  }
  total /= static_cast<Real>(s.n);

  return detail::make_result(
      {1, 1, 1, 1}, {total}, "weighted_bce", {logits},
      [g, weight, weight_sums, per, n_batch = s.n](const detail::TensorImpl& r) {
        auto& gx = r.node->inputs[0]->grad_buffer();
        const Real* x = r.node->inputs[0]->data.data();
        const Real* t = g.data().data();
        const Real* w = weight.data().data();
        const Real upstream = r.grad[0] / static_cast<Real>(n_batch);
        for (std::size_t n = 0; n < n_batch; ++n) {
          const Real k = upstream / weight_sums[n];
          for (std::size_t i = n * per; i < (n + 1) * per; ++i) {
            gx[i] += k * w[i] * (stable_sigmoid(x[i]) - t[i]);
          }
        }
      });
}

Tensor weighted_iou(const Tensor& logits, const Tensor& g, const Tensor& weight) {
  require_triple(logits, g, weight, "weighted_iou");
  const Shape s = logits.shape();
  const std::size_t per = s.c * s.plane();
  const Real* x = logits.data().data();
  const Real* t = g.data().data();
  const Real* w = weight.data().data();
  std::vector<Real> inter(s.n, 0.0), uni(s.n, 0.0);
  Real total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t i = n * per; i < (n + 1) * per; ++i) {
      const Real p = stable_sigmoid(x[i]);
      inter[n] += w[i] * p * t[i];
      uni[n] += w[i] * (p + t[i] - p * t[i]);
    }
    total += 1.0 - (inter[n] + 1.0) / (uni[n] + 1.0);
  }
  total /= static_cast<Real>(s.n);

  return detail::make_result(
      {1, 1, 1, 1}, {total}, "weighted_iou", {logits},
      [g, weight, inter, uni, per, n_batch = s.n](const detail::TensorImpl& r) {
        auto& gx = r.node->inputs[0]->grad_buffer();
        const Real* x = r.node->inputs[0]->data.data();
        const Real* t = g.data().data();
        const Real* w = weight.data().data();
        const Real upstream = r.grad[0] / static_cast<Real>(n_batch);
        for (std::size_t n = 0; n < n_batch; ++n) {
          const Real a = inter[n] + 1.0;
          const Real b = uni[n] + 1.0;
          for (std::size_t i = n * per; i < (n + 1) * per; ++i) {
            const Real p = stable_sigmoid(x[i]);
            // d(a/b)/dp = (w*t*b - a*w*(1 - t)) / b^2
            const Real dratio = w[i] * (t[i] * b - a * (1.0 - t[i])) / (b * b);
            gx[i] -= upstream * dratio * p * (1.0 - p);
          }
        }
      });
}

LossResult total_loss(const PredictionSet& ps, const Tensor& g_mask, const Tensor& g_edge) {
  const Shape& ms = g_mask.shape();
  const Shape& es = g_edge.shape();
  if (ms != es) {
    throw std::invalid_argument("mask and edge ground truth differ in resolution: " + ms.str() +
                                " vs " + es.str());
  }
  if (ms.c != 1) throw std::invalid_argument("ground truth must be single-channel");
  const Tensor mask_weight = pixel_weight_map(g_mask);
  const Tensor edge_weight = pixel_weight_map(g_edge);

  LossResult result;
  const Tensor edge_loss = weighted_bce(bilinear_resize(ps.p_e, es.h, es.w), g_edge, edge_weight);
  result.breakdown.edge = edge_loss.item();
  Tensor total = edge_loss;

  const std::array<const Tensor*, 4> maps{&ps.p_3, &ps.p_4, &ps.p_5, &ps.p_g};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const Tensor up = bilinear_resize(*maps[i], ms.h, ms.w);
    const Tensor bce = weighted_bce(up, g_mask, mask_weight);
    const Tensor iou = weighted_iou(up, g_mask, mask_weight);
    result.breakdown.per_level[i] = {bce.item(), iou.item()};
    total = add(total, add(bce, iou));
  }
  result.breakdown.total = total.item();
  result.total = total;
  return result;
}

}  // namespace errnet
