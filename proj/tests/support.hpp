#pragma once

#include <random>
#include <vector>

#include "pgan/tensor.hpp"

namespace pgan::testing {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                        bool requires_grad = false) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> data(shape_numel(shape));
  for (auto& v : data) v = static_cast<T>(u(rng));
  return Tensor<T>::from_data(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
std::vector<T> values(const Tensor<T>& t) {
  return {t.data().begin(), t.data().end()};
}

// Reference zero-padded cross-correlation written as nested loops.
inline std::vector<double> naive_conv2d(const std::vector<double>& x, std::size_t cin, std::size_t h,
                                        std::size_t w, const std::vector<double>& k, std::size_t cout,
                                        std::size_t ks, const std::vector<double>& b,
                                        std::size_t stride, std::size_t pad, std::size_t& oh,
                                        std::size_t& ow) {
  oh = (h + 2 * pad - ks) / stride + 1;
  ow = (w + 2 * pad - ks) / stride + 1;
  std::vector<double> y(cout * oh * ow);
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t r = 0; r < oh; ++r)
      for (std::size_t c = 0; c < ow; ++c) {
        double acc = b[o];
        for (std::size_t i = 0; i < cin; ++i)
          for (std::size_t u = 0; u < ks; ++u)
            for (std::size_t v = 0; v < ks; ++v) {
              const long yy = static_cast<long>(r * stride + u) - static_cast<long>(pad);
              const long xx = static_cast<long>(c * stride + v) - static_cast<long>(pad);
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
              acc += k[((o * cin + i) * ks + u) * ks + v] * x[(i * h + yy) * w + xx];
            }
        y[(o * oh + r) * ow + c] = acc;
      }
  return y;
}

}  // namespace pgan::testing
