#ifndef ERRNET_ADAM_HPP_
#define ERRNET_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "errnet/parameters.hpp"

namespace errnet {

struct AdamState {
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<Real>> first_moment;   // one per parameter, store order
  std::vector<std::vector<Real>> second_moment;
};

/// Bias-corrected Adam update of every parameter in `params` from its grad.
/// Throws naming the parameter if a gradient is missing.
void adam_step(ParameterStore& params, AdamState& state, Real lr);

}  // namespace errnet

#endif  // ERRNET_ADAM_HPP_
