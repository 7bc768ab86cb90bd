#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgan/params.hpp"

namespace pgan {

struct ConvSpec {
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t channels = 64;
  std::size_t padding = 2;
  bool operator==(const ConvSpec&) const = default;
};

/// Patch discriminators, one per supervised scale. The default layer stack
/// (three stride-2 blocks, two stride-1 convs) sees 70 x 70 input patches.
struct DiscriminatorConfig {
  std::size_t n_levels = 2;
  std::vector<ConvSpec> layers = default_layers(64);
  double leaky_slope = 0.2;
  /// Instance norm on hidden layers after the first. Off by default: it
  /// couples every logit to the whole image and breaks patch locality.
  bool instance_norm = false;

  static std::vector<ConvSpec> default_layers(std::size_t base_channels);
  void validate() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

/// r <- r + (k - 1) * j, j <- j * s, starting from r = j = 1.
std::size_t receptive_field(std::span<const ConvSpec> layers);

/// Input window [begin, begin + size) along one axis that influences output
/// index `out_index`; `begin` may be negative (padding region).
struct InputWindow {
  long begin;
  std::size_t size;
};
InputWindow input_window(std::span<const ConvSpec> layers, std::size_t out_index);

template <typename T>
struct PatchResponse {
  Tensor<T> logits;                 // 1 x h x w raw scores
  std::vector<Tensor<T>> features;  // one per hidden layer
};

template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

  PatchResponse<T> forward(const Tensor<T>& image) const;
  /// Logit map height/width for a square input of `size`.
  std::size_t logit_size(std::size_t size) const;

  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

 private:
  std::vector<ConvSpec> layers_;
  double leaky_slope_;
  bool instance_norm_;
  ParamStore<T> params_;
};

/// One discriminator per level; level k judges images at resolution H / 2^k.
template <typename T>
class MultiDiscriminator {
 public:
  MultiDiscriminator(const DiscriminatorConfig& config, std::uint64_t seed);

  /// Exactly one image per level, finest first, halving in size.
  std::vector<PatchResponse<T>> apply(std::span<const Tensor<T>> images_per_level) const;

  std::size_t levels() const { return levels_.size(); }
  Discriminator<T>& level(std::size_t k) { return levels_.at(k); }
  const Discriminator<T>& level(std::size_t k) const { return levels_.at(k); }

  void zero_grad();
  void set_requires_grad(bool flag);
  bool grads_are_zero() const;
  std::uint64_t hash() const;

 private:
  std::vector<Discriminator<T>> levels_;
};

}  // namespace pgan
