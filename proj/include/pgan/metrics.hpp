#pragma once

#include <vector>

#include "pgan/tensor.hpp"

namespace pgan {

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Maps model range [-1, 1] to [0, 1] (a fresh leaf).
template <typename T>
Tensor<T> to_unit_range(const Tensor<T>& image);

/// Mean squared difference over all elements.
template <typename T>
double mse(const Tensor<T>& a, const Tensor<T>& b);

/// Luma plane (0.299 R + 0.587 G + 0.114 B) of a 3 x H x W image, or the
/// single plane of a 1 x H x W image.
template <typename T>
std::vector<double> grayscale(const Tensor<T>& image);

/// Normalized 2-D Gaussian weights, row-major `window` x `window`.
std::vector<double> gaussian_window(std::size_t window, double sigma);

/// Mean local SSIM over all fully contained windows of the luma planes.
template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, const SsimOptions& options = {});

}  // namespace pgan
