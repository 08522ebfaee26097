#ifndef ERRNET_LOSSES_HPP_
#define ERRNET_LOSSES_HPP_

#include <array>
#include <string_view>

#include "errnet/errnet.hpp"
#include "errnet/tensor.hpp"

namespace errnet {

/// Boundary-emphasis weights: 1 + 5 * |avg_pool31(g) - g|, values in [1, 6].
/// Throws if `g` is not binary.
Tensor pixel_weight_map(const Tensor& g);

// Both losses normalise per image by the weight sum and average over the
// batch. Only the logits receive gradients.

/// Weighted binary cross-entropy on logits (log-sum-exp form).
Tensor weighted_bce(const Tensor& logits, const Tensor& g, const Tensor& weight);

/// 1 - (sum w*p*g + 1) / (sum w*(p + g - p*g) + 1) with p = sigmoid(logits).
Tensor weighted_iou(const Tensor& logits, const Tensor& g, const Tensor& weight);

struct LevelLoss {
  Real wbce = 0;
  Real wiou = 0;
};

/// Mask-supervised levels in summation order.
inline constexpr std::array<std::string_view, 4> kSupervisedLevels{"3", "4", "5", "g"};

struct LossBreakdown {
  Real total = 0;
  Real edge = 0;
  std::array<LevelLoss, 4> per_level;  // indexed like kSupervisedLevels
};

struct LossResult {
  Tensor total;  // differentiable
  LossBreakdown breakdown;
};

/// edge wBCE + sum over {3, 4, 5, g} of (wBCE + wIoU). Predictions are
/// upsampled to ground-truth resolution before comparison.
LossResult total_loss(const PredictionSet& ps, const Tensor& g_mask, const Tensor& g_edge);

}  // namespace errnet

#endif  // ERRNET_LOSSES_HPP_
