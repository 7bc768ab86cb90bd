#pragma once

#include <vector>

#include "pgan/params.hpp"

namespace pgan {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers for every tensor of one ParamStore.
struct AdamState {
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
  std::size_t step = 0;

  static AdamState for_params(const ParamStore<float>& params);
};

/// p <- p - lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected moments.
/// Parameters without a gradient buffer are treated as having zero gradient.
void adam_update(ParamStore<float>& params, AdamState& state, const AdamOptions& options);

}  // namespace pgan
