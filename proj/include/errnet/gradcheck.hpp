#ifndef ERRNET_GRADCHECK_HPP_
#define ERRNET_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "errnet/tensor.hpp"

namespace errnet {

/// |a - n| / max(1e-8, |a| + |n|)
Real relative_error(Real analytic, Real numeric);

/// Compares the analytic gradient of a scalar function at `point` against
/// central differences for every element. Returns the max relative error.
/// Throws std::runtime_error if any evaluation is non-finite.
Real grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point, Real eps);

/// Same comparison for a leaf that `loss_fn` closes over (typically a model
/// parameter). Checks the listed element indices plus, when
/// `directional` is set, one random +/-1 direction over the whole tensor.
/// The leaf's data is restored before returning.
Real grad_check_leaf(const std::function<Tensor()>& loss_fn, Tensor leaf,
                     const std::vector<std::size_t>& indices, Real eps,
                     const std::vector<Real>* direction = nullptr);

}  // namespace errnet

#endif  // ERRNET_GRADCHECK_HPP_
