#include "pgan/adam.hpp"

#include <cmath>

namespace pgan {

AdamState AdamState::for_params(const ParamStore<float>& params) {
  AdamState s;
  for (const auto& [name, t] : params.entries()) {
    s.m.emplace_back(t.numel(), 0.0f);
    s.v.emplace_back(t.numel(), 0.0f);
  }
  return s;
}

void adam_update(ParamStore<float>& params, AdamState& state, const AdamOptions& options) {
  auto& entries = params.entries();
  if (state.m.size() != entries.size() || state.v.size() != entries.size()) {
    throw ContractViolation("adam: state has " + std::to_string(state.m.size()) +
                            " slots for " + std::to_string(entries.size()) + " parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(options.beta1, t);
  const double c2 = 1.0 - std::pow(options.beta2, t);
  const auto b1 = static_cast<float>(options.beta1), b2 = static_cast<float>(options.beta2);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& p = entries[i].second;
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != p.numel() || v.size() != p.numel()) {
      throw ContractViolation("adam: moment shape mismatch for " + entries[i].first);
    }
    if (!p.has_grad()) {
      // Zero gradient still decays the moments.
      for (std::size_t j = 0; j < m.size(); ++j) {
        m[j] *= b1;
        v[j] *= b2;
      }
    } else {
      auto g = p.grad();
      for (std::size_t j = 0; j < m.size(); ++j) {
        m[j] = b1 * m[j] + (1.0f - b1) * g[j];
        v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
      }
    }
    auto data = p.mutable_data();
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double m_hat = m[j] / c1, v_hat = v[j] / c2;
      data[j] -= static_cast<float>(options.lr * m_hat / (std::sqrt(v_hat) + options.eps));
    }
  }
}

}  // namespace pgan
