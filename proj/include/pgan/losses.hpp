#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgan/discriminator.hpp"
#include "pgan/params.hpp"

namespace pgan {

/// Weights of the full objective. lambda_base weighs the identity term in
/// the single-direction objectives (base and multilevel modes).
struct LossWeights {
  double alpha = 2.0;   // cycle
  double beta = 10.0;   // feature matching
  double gamma = 5.0;   // identity
  double eta = 10.0;    // texture
  double lambda_base = 5.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

enum class ObjectiveMode { Base, MultiLevel, Full };

const char* mode_name(ObjectiveMode mode);
ObjectiveMode parse_mode(const std::string& name);

/// 1/2 mean((D(real) - 1)^2) + 1/2 mean(D(fake)^2). Callers detach the fake
/// image before the discriminator forward pass.
template <typename T>
Tensor<T> adv_loss_d(const PatchResponse<T>& real, const PatchResponse<T>& fake);

/// Same, with the fake term averaged over several samples of one level.
template <typename T>
Tensor<T> adv_loss_d(const PatchResponse<T>& real, std::span<const PatchResponse<T>> fakes);

/// mean((D(fake) - 1)^2)
template <typename T>
Tensor<T> adv_loss_g(const PatchResponse<T>& fake);

template <typename T>
Tensor<T> identity_l1(const Tensor<T>& target, const Tensor<T>& generated);

/// Sum over layers of mean |real - fake|; the real branch is detached.
template <typename T>
Tensor<T> feature_matching(std::span<const Tensor<T>> features_real,
                           std::span<const Tensor<T>> features_fake);

/// Elementwise average of per-sample feature lists (the batch mean).
template <typename T>
std::vector<Tensor<T>> batch_mean_features(std::span<const std::vector<Tensor<T>>> samples);

/// Inner products of vectorized feature maps: kappa x kappa. With
/// `normalize`, divided by kappa * H * W.
template <typename T>
Tensor<T> gram(const Tensor<T>& features, bool normalize = false);

/// Frozen convolutional feature extractor with five tapped blocks. Blocks
/// after the first start with a 2x average downsample.
template <typename T>
class TextureNet {
 public:
  explicit TextureNet(std::uint64_t seed = 1234,
                      std::vector<std::size_t> channels = {8, 16, 32, 32, 32});

  std::vector<Tensor<T>> features(const Tensor<T>& image) const;
  const ParamStore<T>& params() const { return params_; }
  std::size_t taps() const { return channels_.size(); }

 private:
  std::vector<std::size_t> channels_;
  ParamStore<T> params_;
};

/// Mean over tapped layers of the squared Frobenius distance between
/// normalized Gram matrices.
template <typename T>
Tensor<T> texture_loss(const Tensor<T>& image_a, const Tensor<T>& image_b, const TextureNet<T>& net);

/// Same loss on precomputed feature lists.
template <typename T>
Tensor<T> texture_loss_from_features(std::span<const Tensor<T>> features_a,
                                     std::span<const Tensor<T>> features_b);

/// mean|rec_A - A| + mean|rec_B - B|
template <typename T>
Tensor<T> cycle_loss(const Tensor<T>& image_a, const Tensor<T>& reconstructed_a,
                     const Tensor<T>& image_b, const Tensor<T>& reconstructed_b);

/// Named scalar terms. Undefined tensors are absent terms and count as 0.
template <typename T>
struct LossParts {
  Tensor<T> adv_ab;            // summed over levels
  Tensor<T> adv_ba;            // summed over levels
  Tensor<T> cycle;
  Tensor<T> feature_matching;  // summed over levels and directions
  Tensor<T> identity;
  Tensor<T> texture;
};

/// Full:        adv_ab + adv_ba + alpha*cyc + beta*fm + gamma*id + eta*tex
/// Base / MultiLevel: adv_ab + lambda_base*id
/// Throws NonFiniteError naming the first non-finite term.
template <typename T>
Tensor<T> total_objective(const LossParts<T>& parts, const LossWeights& weights,
                          ObjectiveMode mode = ObjectiveMode::Full);

}  // namespace pgan
