#pragma once

#include <functional>

#include "pgan/tensor.hpp"

namespace pgan {

/// Compares reverse-mode gradients of `fn` at `point` against central
/// differences with step `eps`. Returns the largest
/// |analytic - numeric| / max(1, |analytic|) over all coordinates.
/// Throws NonFiniteError if any evaluation is not finite.
double grad_check(const std::function<TensorD(const TensorD&)>& fn, const TensorD& point,
                  double eps = 1e-6);

}  // namespace pgan
