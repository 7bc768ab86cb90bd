#include "pgan/losses.hpp"

#include <cmath>

#include "pgan/ops.hpp"

namespace pgan {

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma, eta, lambda_base}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractViolation("loss weights must be finite and non-negative");
    }
  }
}

const char* mode_name(ObjectiveMode mode) {
  switch (mode) {
    case ObjectiveMode::Base: return "base";
    case ObjectiveMode::MultiLevel: return "multilevel";
    case ObjectiveMode::Full: return "full";
  }
  return "full";
}

ObjectiveMode parse_mode(const std::string& name) {
  if (name == "base") return ObjectiveMode::Base;
  if (name == "multilevel") return ObjectiveMode::MultiLevel;
  if (name == "full") return ObjectiveMode::Full;
  throw ContractViolation("unknown objective mode '" + name + "' (base|multilevel|full)");
}

template <typename T>
Tensor<T> adv_loss_d(const PatchResponse<T>& real, const PatchResponse<T>& fake) {
  return adv_loss_d(real, std::span<const PatchResponse<T>>(&fake, 1));
}

template <typename T>
Tensor<T> adv_loss_d(const PatchResponse<T>& real, std::span<const PatchResponse<T>> fakes) {
  if (fakes.empty()) throw ContractViolation("adv_loss_d: no fake samples");
  auto real_term = mean(square(add_scalar(real.logits, T(-1))));
  auto fake_term = mean(square(fakes[0].logits));
  for (std::size_t i = 1; i < fakes.size(); ++i) {
    fake_term = add(fake_term, mean(square(fakes[i].logits)));
  }
  fake_term = scale(fake_term, T(1) / static_cast<T>(fakes.size()));
  return scale(add(real_term, fake_term), T(0.5));
}

template <typename T>
Tensor<T> adv_loss_g(const PatchResponse<T>& fake) {
  return mean(square(add_scalar(fake.logits, T(-1))));
}

template <typename T>
Tensor<T> identity_l1(const Tensor<T>& target, const Tensor<T>& generated) {
  return l1_distance(generated, target);
}

template <typename T>
Tensor<T> feature_matching(std::span<const Tensor<T>> features_real,
                           std::span<const Tensor<T>> features_fake) {
  if (features_real.size() != features_fake.size() || features_real.empty()) {
    throw ContractViolation("feature_matching: expected equal, non-empty layer lists (" +
                            std::to_string(features_real.size()) + " vs " +
                            std::to_string(features_fake.size()) + ")");
  }
  Tensor<T> total;
  for (std::size_t i = 0; i < features_real.size(); ++i) {
    auto term = l1_distance(features_fake[i], features_real[i].detach());
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

template <typename T>
std::vector<Tensor<T>> batch_mean_features(std::span<const std::vector<Tensor<T>>> samples) {
  if (samples.empty()) throw ContractViolation("batch_mean_features: no samples");
  std::vector<Tensor<T>> out = samples[0];
  for (std::size_t s = 1; s < samples.size(); ++s) {
    if (samples[s].size() != out.size()) {
      throw ContractViolation("batch_mean_features: layer count differs between samples");
    }
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = add(out[l], samples[s][l]);
  }
  if (samples.size() > 1) {
    for (auto& f : out) f = scale(f, T(1) / static_cast<T>(samples.size()));
  }
  return out;
}

template <typename T>
Tensor<T> gram(const Tensor<T>& features, bool normalize) {
  if (features.rank() < 2 || features.dim(0) == 0) {
    throw ContractViolation("gram: expected kappa x ... features, got " +
                            shape_str(features.shape()));
  }
  const auto kappa = features.dim(0), positions = features.numel() / kappa;
  auto flat = reshape(features, {kappa, positions});
  auto g = matmul(flat, transpose(flat));
  // GEMM accumulates the two triangles in different orders; averaging with
  // the transpose makes the result exactly symmetric.
  g = scale(add(g, transpose(g)), T(0.5));
  if (normalize) g = scale(g, T(1) / static_cast<T>(kappa * positions));
  return g;
}

template <typename T>
TextureNet<T>::TextureNet(std::uint64_t seed, std::vector<std::size_t> channels)
    : channels_(std::move(channels)) {
  if (channels_.empty()) throw ContractViolation("texture net: need at least one block");
  std::mt19937_64 rng(seed);
  std::size_t in = 3;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto name = "block" + std::to_string(i);
    const double he = std::sqrt(2.0 / static_cast<double>(in * 9));
    auto w = normal_tensor<T>({channels_[i], in, 3, 3}, he, rng);
    w.set_requires_grad(false);
    params_.add(name + ".weight", std::move(w));
    params_.add(name + ".bias", Tensor<T>::zeros({channels_[i]}, false));
    in = channels_[i];
  }
}

template <typename T>
std::vector<Tensor<T>> TextureNet<T>::features(const Tensor<T>& image) const {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ContractViolation("texture net: expected a 3 x H x W image, got " +
                            shape_str(image.shape()));
  }
  std::vector<Tensor<T>> taps;
  auto x = image;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (i > 0 && x.dim(1) % 2 == 0 && x.dim(2) % 2 == 0 && x.dim(1) >= 2) x = average_downsample(x);
    const auto name = "block" + std::to_string(i);
    x = relu(conv2d(x, params_.get(name + ".weight"), params_.get(name + ".bias"), 1, 1));
    taps.push_back(x);
  }
  return taps;
}

template <typename T>
Tensor<T> texture_loss_from_features(std::span<const Tensor<T>> features_a,
                                     std::span<const Tensor<T>> features_b) {
  if (features_a.size() != features_b.size() || features_a.empty()) {
    throw ContractViolation("texture_loss: tap count mismatch");
  }
  Tensor<T> total;
  for (std::size_t i = 0; i < features_a.size(); ++i) {
    auto term = sum(square(sub(gram(features_a[i], true), gram(features_b[i], true))));
    total = total.defined() ? add(total, term) : term;
  }
  return scale(total, T(1) / static_cast<T>(features_a.size()));
}

template <typename T>
Tensor<T> texture_loss(const Tensor<T>& image_a, const Tensor<T>& image_b,
                       const TextureNet<T>& net) {
  if (image_a.shape() != image_b.shape()) {
    throw ContractViolation("texture_loss: shape mismatch " + shape_str(image_a.shape()) + " vs " +
                            shape_str(image_b.shape()));
  }
  auto fa = net.features(image_a);
  auto fb = net.features(image_b);
  return texture_loss_from_features<T>(fa, fb);
}

template <typename T>
Tensor<T> cycle_loss(const Tensor<T>& image_a, const Tensor<T>& reconstructed_a,
                     const Tensor<T>& image_b, const Tensor<T>& reconstructed_b) {
  return add(l1_distance(reconstructed_a, image_a), l1_distance(reconstructed_b, image_b));
}

template <typename T>
Tensor<T> total_objective(const LossParts<T>& parts, const LossWeights& weights,
                          ObjectiveMode mode) {
  weights.validate();
  struct Term {
    const char* name;
    const Tensor<T>* value;
    double weight;
  };
  std::vector<Term> terms;
  if (mode == ObjectiveMode::Full) {
    terms = {{"adv_ab", &parts.adv_ab, 1.0},
             {"adv_ba", &parts.adv_ba, 1.0},
             {"cycle", &parts.cycle, weights.alpha},
             {"feature_matching", &parts.feature_matching, weights.beta},
             {"identity", &parts.identity, weights.gamma},
             {"texture", &parts.texture, weights.eta}};
  } else {
    terms = {{"adv_ab", &parts.adv_ab, 1.0}, {"identity", &parts.identity, weights.lambda_base}};
  }
  Tensor<T> total = Tensor<T>::scalar(T(0));
  for (const auto& t : terms) {
    if (!t.value->defined()) continue;
    if (t.value->numel() != 1) {
      throw ContractViolation(std::string("total_objective: term ") + t.name + " is not a scalar");
    }
    if (!t.value->all_finite()) {
      throw NonFiniteError(std::string("total_objective: non-finite ") + t.name + " term");
    }
    total = add(total, scale(*t.value, static_cast<T>(t.weight)));
  }
  return total;
}

#define PGAN_INSTANTIATE_LOSSES(T)                                                              \
  template Tensor<T> adv_loss_d(const PatchResponse<T>&, const PatchResponse<T>&);              \
  template Tensor<T> adv_loss_d(const PatchResponse<T>&, std::span<const PatchResponse<T>>);    \
  template Tensor<T> adv_loss_g(const PatchResponse<T>&);                                       \
  template Tensor<T> identity_l1(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> feature_matching(std::span<const Tensor<T>>, std::span<const Tensor<T>>);  \
  template std::vector<Tensor<T>> batch_mean_features(std::span<const std::vector<Tensor<T>>>); \
  template Tensor<T> gram(const Tensor<T>&, bool);                                              \
  template class TextureNet<T>;                                                                 \
  template Tensor<T> texture_loss_from_features(std::span<const Tensor<T>>,                     \
                                                std::span<const Tensor<T>>);                    \
  template Tensor<T> texture_loss(const Tensor<T>&, const Tensor<T>&, const TextureNet<T>&);    \
  template Tensor<T> cycle_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                const Tensor<T>&);                                              \
  template Tensor<T> total_objective(const LossParts<T>&, const LossWeights&, ObjectiveMode);

PGAN_INSTANTIATE_LOSSES(float)
PGAN_INSTANTIATE_LOSSES(double)

}  // namespace pgan
