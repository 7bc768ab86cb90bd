#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pgan/conditioning.hpp"
#include "pgan/params.hpp"

namespace pgan {

/// Encoder (stem + stride-2 downsampling), residual trunk, and a decoder of
/// stride-2 transpose convolutions with an RGB side branch per stage.
struct GeneratorConfig {
  std::size_t base_channels = 32;
  std::size_t max_channels = 256;
  std::size_t n_down = 4;
  std::size_t n_resblocks = 9;
  std::size_t n_up = 4;
  std::size_t n_modalities = 2;
  std::size_t image_size = 64;
  std::size_t stem_kernel = 7;
  std::size_t down_kernel = 4;

  /// Throws ContractViolation if the configuration is inconsistent.
  void validate() const;
  std::size_t input_channels() const { return 3 + 1 + n_modalities; }
  /// Channel width after encoder stage `level` (0 = stem).
  std::size_t channels_at(std::size_t level) const;
  bool operator==(const GeneratorConfig&) const = default;
};

template <typename T>
struct GeneratorOutput {
  Tensor<T> final;
  /// Side-branch images ordered fine to coarse: H/2, H/4, ..., H/2^(n_up-1).
  std::vector<Tensor<T>> intermediates;
};

template <typename T>
class Generator {
 public:
  Generator(GeneratorConfig config, std::uint64_t seed);

  GeneratorOutput<T> forward(const Tensor<T>& input) const;
  GeneratorOutput<T> operator()(const Tensor<T>& image, const LandmarkSet& landmarks,
                                const ModalityCode& code) const;

  const GeneratorConfig& config() const { return config_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

 private:
  GeneratorConfig config_;
  ParamStore<T> params_;
};

/// Number of scalars a generator with this config holds.
std::size_t generator_parameter_count(const GeneratorConfig& config);

template <typename T>
struct CycleResult {
  GeneratorOutput<T> forward;
  GeneratorOutput<T> reconstructed;
};

/// Any image translator with the generator's conditioning signature.
template <typename T>
using TranslateFn = std::function<GeneratorOutput<T>(const Tensor<T>& image, const LandmarkSet&,
                                                     const ModalityCode&)>;

/// G(I_A | L_B, c_B) followed by G(. | L_A, c_A) through the same translator.
template <typename T>
CycleResult<T> cycle_apply(const TranslateFn<T>& translate, const Tensor<T>& image_a,
                           const LandmarkSet& landmarks_b, const ModalityCode& code_b,
                           const LandmarkSet& landmarks_a, const ModalityCode& code_a);

template <typename T>
CycleResult<T> cycle_apply(const Generator<T>& generator, const Tensor<T>& image_a,
                           const LandmarkSet& landmarks_b, const ModalityCode& code_b,
                           const LandmarkSet& landmarks_a, const ModalityCode& code_a);

}  // namespace pgan
