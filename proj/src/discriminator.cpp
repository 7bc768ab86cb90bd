#include "pgan/discriminator.hpp"

#include <string>

#include "pgan/ops.hpp"

namespace pgan {

std::vector<ConvSpec> DiscriminatorConfig::default_layers(std::size_t base_channels) {
  const auto b = base_channels;
  return {{4, 2, b, 2}, {4, 2, 2 * b, 2}, {4, 2, 4 * b, 2}, {4, 1, 8 * b, 2}, {4, 1, 1, 2}};
}

void DiscriminatorConfig::validate() const {
  if (n_levels == 0) throw ContractViolation("discriminator: n_levels must be >= 1");
  if (layers.size() < 2) throw ContractViolation("discriminator: need at least two layers");
  for (const auto& l : layers) {
    if (l.kernel == 0 || l.stride == 0 || l.channels == 0) {
      throw ContractViolation("discriminator: kernel, stride and channels must be positive");
    }
  }
  if (layers.back().channels != 1) {
    throw ContractViolation("discriminator: last layer must emit one channel");
  }
}

std::size_t receptive_field(std::span<const ConvSpec> layers) {
  std::size_t r = 1, jump = 1;
  for (const auto& l : layers) {
    r += (l.kernel - 1) * jump;
    jump *= l.stride;
  }
  return r;
}

InputWindow input_window(std::span<const ConvSpec> layers, std::size_t out_index) {
  long begin = static_cast<long>(out_index), end = static_cast<long>(out_index);
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const auto s = static_cast<long>(it->stride), p = static_cast<long>(it->padding);
    begin = begin * s - p;
    end = end * s - p + static_cast<long>(it->kernel) - 1;
  }
  return {begin, static_cast<std::size_t>(end - begin + 1)};
}

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorConfig& config, std::uint64_t seed)
    : layers_(config.layers), leaky_slope_(config.leaky_slope), instance_norm_(config.instance_norm) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::size_t in = 3;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto name = "conv" + std::to_string(i);
    params_.add(name + ".weight", normal_tensor<T>({l.channels, in, l.kernel, l.kernel}, 0.02, rng));
    params_.add(name + ".bias", Tensor<T>::zeros({l.channels}, true));
    if (instance_norm_ && i > 0 && i + 1 < layers_.size()) {
      params_.add(name + ".norm.scale", normal_tensor<T>({l.channels}, 0.02, rng, 1.0));
      params_.add(name + ".norm.shift", Tensor<T>::zeros({l.channels}, true));
    }
    in = l.channels;
  }
}

template <typename T>
std::size_t Discriminator<T>::logit_size(std::size_t size) const {
  for (const auto& l : layers_) size = conv_output_size(size, l.kernel, l.stride, l.padding);
  return size;
}

template <typename T>
PatchResponse<T> Discriminator<T>::forward(const Tensor<T>& image) const {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ContractViolation("discriminator: expected a 3 x H x W image, got " +
                            shape_str(image.shape()));
  }
  PatchResponse<T> r;
  auto x = image;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto name = "conv" + std::to_string(i);
    x = conv2d(x, params_.get(name + ".weight"), params_.get(name + ".bias"), l.stride, l.padding);
    if (i + 1 == layers_.size()) break;
    if (instance_norm_ && i > 0) {
      x = instance_norm(x, params_.get(name + ".norm.scale"), params_.get(name + ".norm.shift"),
                        T(1e-5));
    }
    x = leaky_relu(x, static_cast<T>(leaky_slope_));
    r.features.push_back(x);
  }
  r.logits = x;
  return r;
}

template <typename T>
MultiDiscriminator<T>::MultiDiscriminator(const DiscriminatorConfig& config, std::uint64_t seed) {
  config.validate();
  for (std::size_t k = 0; k < config.n_levels; ++k) {
    levels_.emplace_back(config, seed + 7919 * (k + 1));
  }
}

template <typename T>
std::vector<PatchResponse<T>> MultiDiscriminator<T>::apply(
    std::span<const Tensor<T>> images_per_level) const {
  if (images_per_level.size() != levels_.size()) {
    throw ContractViolation("discriminator: got " + std::to_string(images_per_level.size()) +
                            " images for " + std::to_string(levels_.size()) + " levels");
  }
  std::vector<PatchResponse<T>> out;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const auto& img = images_per_level[k];
    if (k > 0) {
      const auto& prev = images_per_level[k - 1];
      if (img.rank() != 3 || prev.rank() != 3 || img.dim(1) * 2 != prev.dim(1) ||
          img.dim(2) * 2 != prev.dim(2)) {
        throw ContractViolation("discriminator: level " + std::to_string(k) +
                                " image must be half the size of level " + std::to_string(k - 1));
      }
    }
    out.push_back(levels_[k].forward(img));
  }
  return out;
}

template <typename T>
void MultiDiscriminator<T>::zero_grad() {
  for (auto& d : levels_) d.params().zero_grad();
}

template <typename T>
void MultiDiscriminator<T>::set_requires_grad(bool flag) {
  for (auto& d : levels_) d.params().set_requires_grad(flag);
}

template <typename T>
bool MultiDiscriminator<T>::grads_are_zero() const {
  for (const auto& d : levels_) {
    if (!d.params().grads_are_zero()) return false;
  }
  return true;
}

template <typename T>
std::uint64_t MultiDiscriminator<T>::hash() const {
  std::uint64_t h = 0;
  for (const auto& d : levels_) h = h * 1099511628211ULL ^ d.params().hash();
  return h;
}

template class Discriminator<float>;
template class Discriminator<double>;
template class MultiDiscriminator<float>;
template class MultiDiscriminator<double>;

}  // namespace pgan
