#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgan/tensor.hpp"

namespace pgan {

// Elementwise arithmetic; operands must have identical shapes.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T offset);
template <typename T> Tensor<T> square(const Tensor<T>& a);
template <typename T> Tensor<T> abs(const Tensor<T>& a);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& a, T slope);
template <typename T> Tensor<T> tanh(const Tensor<T>& a);

// Reductions to a scalar (shape {}).
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);
/// mean(|a - b|)
template <typename T> Tensor<T> l1_distance(const Tensor<T>& a, const Tensor<T>& b);

/// [m x k] * [k x n] -> [m x n]
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> transpose(const Tensor<T>& a);
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

/// Concatenation along the leading (channel) axis.
template <typename T> Tensor<T> channel_concat(std::span<const Tensor<T>> parts);
template <typename T>
Tensor<T> channel_concat(std::initializer_list<Tensor<T>> parts) {
  std::vector<Tensor<T>> v(parts);
  return channel_concat<T>(std::span<const Tensor<T>>(v));
}
/// Channels [begin, end) of a C x H x W tensor.
template <typename T> Tensor<T> channel_slice(const Tensor<T>& a, std::size_t begin, std::size_t end);

/// 2x2 box average of a C x H x W tensor; H and W must be even.
template <typename T> Tensor<T> average_downsample(const Tensor<T>& a);

/// Zero-padded cross-correlation. weight is C_out x C_in x k x k.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);

/// Adjoint of conv2d. weight is C_in x C_out x k x k.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                           std::size_t stride, std::size_t padding);

/// Per-channel normalization over H x W followed by an affine map.
template <typename T>
Tensor<T> instance_norm(const Tensor<T>& input, const Tensor<T>& scale, const Tensor<T>& shift,
                        T eps);

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding);
std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                                       std::size_t padding);

}  // namespace pgan
