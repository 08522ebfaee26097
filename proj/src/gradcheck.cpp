#include "errnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "errnet/ops.hpp"

namespace errnet {

namespace {

Real finite_value(const Tensor& t) {
  const Real v = t.item();
  if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite function value");
  return v;
}

// Evaluates `at(step)` for step in {0, +h, -h}. If any ReLU changes state
// across the stencil the difference straddles a kink, so h shrinks (at most
// kMaxShrinks times) until the three points share one smooth piece.
constexpr int kMaxShrinks = 6;

Real central_difference(const std::function<Real(Real)>& at, Real eps) {
  testing::ReluSignatureScope scope;
  at(0.0);
  const std::uint64_t base = scope.take();
  Real h = eps;
  Real estimate = 0.0;
  for (int attempt = 0; attempt <= kMaxShrinks; ++attempt, h *= 0.25) {
    const Real up = at(h);
    const std::uint64_t up_sig = scope.take();
    const Real down = at(-h);
    const std::uint64_t down_sig = scope.take();
    estimate = (up - down) / (2 * h);
    if (up_sig == base && down_sig == base) break;
  }
  return estimate;
}

}  // namespace

Real relative_error(Real analytic, Real numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

Real grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point, Real eps) {
  Tensor x = point.detach(true);
  Tensor y = fn(x);
  finite_value(y);
  backward(y);
  std::vector<Real> analytic(x.numel(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  for (Real g : analytic) {
    if (!std::isfinite(g)) throw std::runtime_error("grad_check: non-finite gradient");
  }

  NoGradGuard no_grad;
  Real worst = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    Tensor probe = point.detach();
    auto d = probe.mutable_data();
    const Real base = d[i];
    const Real numeric = central_difference(
        [&](Real step) {
          d[i] = base + step;
          return finite_value(fn(probe));
        },
        eps);
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

Real grad_check_leaf(const std::function<Tensor()>& loss_fn, Tensor leaf,
                     const std::vector<std::size_t>& indices, Real eps,
                     const std::vector<Real>* direction) {
  if (!leaf.is_leaf() || !leaf.requires_grad()) {
    throw std::invalid_argument("grad_check_leaf: expected a requires_grad leaf");
  }
  leaf.zero_grad();
  {
    Tensor loss = loss_fn();
    finite_value(loss);
    backward(loss);
  }
  std::vector<Real> analytic(leaf.numel(), 0.0);
  if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), analytic.begin());
  leaf.zero_grad();

  NoGradGuard no_grad;
  auto data = leaf.mutable_data();
  Real worst = 0.0;
  for (std::size_t i : indices) {
    if (i >= data.size()) throw std::out_of_range("grad_check_leaf: index out of range");
    const Real base = data[i];
    const Real numeric = central_difference(
        [&](Real step) {
          data[i] = base + step;
          return finite_value(loss_fn());
        },
        eps);
    data[i] = base;
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  if (direction) {
    if (direction->size() != data.size()) {
      throw std::invalid_argument("grad_check_leaf: direction size mismatch");
    }
    const std::vector<Real> saved(data.begin(), data.end());
    Real directional = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) directional += analytic[i] * (*direction)[i];
    const Real numeric = central_difference(
        [&](Real step) {
          for (std::size_t i = 0; i < data.size(); ++i) data[i] = saved[i] + step * (*direction)[i];
          return finite_value(loss_fn());
        },
        eps);
    std::copy(saved.begin(), saved.end(), data.begin());
    worst = std::max(worst, relative_error(directional, numeric));
  }
  return worst;
}

}  // namespace errnet
