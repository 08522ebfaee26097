#include "errnet/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace errnet {

void adam_step(ParameterStore& params, AdamState& state, Real lr) {
  const auto& entries = params.entries();
  for (const auto& [name, t] : entries) {
    if (!t.has_grad()) throw std::runtime_error("adam_step: parameter " + name + " has no gradient");
  }
  if (state.first_moment.empty()) {
    for (const auto& e : entries) {
      state.first_moment.emplace_back(e.second.numel(), 0.0);
      state.second_moment.emplace_back(e.second.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != entries.size()) {
    throw std::logic_error("adam_step: optimizer state does not match parameter set");
  }
  ++state.step;
  const Real t = static_cast<Real>(state.step);
  const Real correction1 = 1.0 - std::pow(state.beta1, t);
  const Real correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor param = entries[p].second;
    auto data = param.mutable_data();
    auto grad = param.grad();
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const Real m_hat = m[i] / correction1;
      const Real v_hat = v[i] / correction2;
      data[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace errnet
