#include "pgan/generator.hpp"

#include <algorithm>
#include <string>

#include "pgan/ops.hpp"

namespace pgan {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kNormEps = 1e-5;

template <typename T>
void add_conv(ParamStore<T>& p, const std::string& name, std::size_t out, std::size_t in,
              std::size_t k, std::mt19937_64& rng) {
  p.add(name + ".weight", normal_tensor<T>({out, in, k, k}, kInitStd, rng));
  p.add(name + ".bias", Tensor<T>::zeros({out}, true));
}

template <typename T>
void add_deconv(ParamStore<T>& p, const std::string& name, std::size_t in, std::size_t out,
                std::size_t k, std::mt19937_64& rng) {
  p.add(name + ".weight", normal_tensor<T>({in, out, k, k}, kInitStd, rng));
  p.add(name + ".bias", Tensor<T>::zeros({out}, true));
}

template <typename T>
void add_norm(ParamStore<T>& p, const std::string& name, std::size_t channels,
              std::mt19937_64& rng) {
  p.add(name + ".scale", normal_tensor<T>({channels}, kInitStd, rng, 1.0));
  p.add(name + ".shift", Tensor<T>::zeros({channels}, true));
}

template <typename T>
Tensor<T> conv(const ParamStore<T>& p, const std::string& name, const Tensor<T>& x,
               std::size_t stride, std::size_t pad) {
  return conv2d(x, p.get(name + ".weight"), p.get(name + ".bias"), stride, pad);
}

template <typename T>
Tensor<T> norm(const ParamStore<T>& p, const std::string& name, const Tensor<T>& x) {
  return instance_norm(x, p.get(name + ".scale"), p.get(name + ".shift"), T(kNormEps));
}

}  // namespace

void GeneratorConfig::validate() const {
  if (base_channels == 0 || max_channels == 0) {
    throw ContractViolation("generator: channel counts must be positive");
  }
  if (max_channels < base_channels) {
    throw ContractViolation("generator: max_channels below base_channels");
  }
  if (n_up != n_down) throw ContractViolation("generator: n_up must equal n_down");
  if (n_down == 0) throw ContractViolation("generator: n_down must be >= 1");
  if (n_modalities == 0) throw ContractViolation("generator: n_modalities must be >= 1");
  if (image_size % (std::size_t{1} << n_down) != 0) {
    throw ContractViolation("generator: image_size " + std::to_string(image_size) +
                            " not divisible by 2^" + std::to_string(n_down));
  }
  if ((image_size >> n_down) * (image_size >> n_down) < 2) {
    throw ContractViolation("generator: bottleneck too small for instance norm");
  }
  if (stem_kernel % 2 == 0 || down_kernel < 2 || down_kernel % 2 != 0) {
    throw ContractViolation("generator: stem kernel must be odd and down kernel even");
  }
}

std::size_t GeneratorConfig::channels_at(std::size_t level) const {
  std::size_t c = base_channels;
  for (std::size_t i = 0; i < level; ++i) c = std::min(c * 2, max_channels);
  return c;
}

template <typename T>
Generator<T>::Generator(GeneratorConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto& c = config_;
  add_conv(params_, "stem", c.channels_at(0), c.input_channels(), c.stem_kernel, rng);
  add_norm(params_, "stem.norm", c.channels_at(0), rng);
  for (std::size_t i = 0; i < c.n_down; ++i) {
    const auto name = "down" + std::to_string(i);
    add_conv(params_, name, c.channels_at(i + 1), c.channels_at(i), c.down_kernel, rng);
    add_norm(params_, name + ".norm", c.channels_at(i + 1), rng);
  }
  const auto trunk = c.channels_at(c.n_down);
  for (std::size_t i = 0; i < c.n_resblocks; ++i) {
    const auto name = "res" + std::to_string(i);
    add_conv(params_, name + ".conv1", trunk, trunk, 3, rng);
    add_norm(params_, name + ".norm1", trunk, rng);
    add_conv(params_, name + ".conv2", trunk, trunk, 3, rng);
    add_norm(params_, name + ".norm2", trunk, rng);
  }
  for (std::size_t s = 0; s < c.n_up; ++s) {
    const auto name = "up" + std::to_string(s);
    const auto in = c.channels_at(c.n_down - s), out = c.channels_at(c.n_down - s - 1);
    add_deconv(params_, name, in, out, c.down_kernel, rng);
    add_norm(params_, name + ".norm", out, rng);
    if (s + 1 < c.n_up) add_conv(params_, "aux" + std::to_string(s), 3, out, 1, rng);
  }
  add_conv(params_, "head", 3, c.channels_at(0), c.stem_kernel, rng);
}

template <typename T>
GeneratorOutput<T> Generator<T>::forward(const Tensor<T>& input) const {
  const auto& c = config_;
  if (input.rank() != 3 || input.dim(0) != c.input_channels() || input.dim(1) != c.image_size ||
      input.dim(2) != c.image_size) {
    throw ContractViolation("generator: expected input " +
                            shape_str({c.input_channels(), c.image_size, c.image_size}) +
                            ", got " + shape_str(input.shape()));
  }
  const auto& p = params_;
  const std::size_t down_pad = (c.down_kernel - 2) / 2;

  auto x = relu(norm(p, "stem.norm", conv(p, "stem", input, 1, c.stem_kernel / 2)));
  for (std::size_t i = 0; i < c.n_down; ++i) {
    const auto name = "down" + std::to_string(i);
    x = relu(norm(p, name + ".norm", conv(p, name, x, 2, down_pad)));
  }
  for (std::size_t i = 0; i < c.n_resblocks; ++i) {
    const auto name = "res" + std::to_string(i);
    auto h = relu(norm(p, name + ".norm1", conv(p, name + ".conv1", x, 1, 1)));
    h = norm(p, name + ".norm2", conv(p, name + ".conv2", h, 1, 1));
    x = add(x, h);
  }

  GeneratorOutput<T> out;
  for (std::size_t s = 0; s < c.n_up; ++s) {
    const auto name = "up" + std::to_string(s);
    x = conv_transpose2d(x, p.get(name + ".weight"), p.get(name + ".bias"), 2, down_pad);
    x = relu(norm(p, name + ".norm", x));
    if (s + 1 < c.n_up) out.intermediates.push_back(tanh(conv(p, "aux" + std::to_string(s), x, 1, 0)));
  }
  std::reverse(out.intermediates.begin(), out.intermediates.end());
  out.final = tanh(conv(p, "head", x, 1, c.stem_kernel / 2));
  return out;
}

template <typename T>
GeneratorOutput<T> Generator<T>::operator()(const Tensor<T>& image, const LandmarkSet& landmarks,
                                            const ModalityCode& code) const {
  if (code.count() != config_.n_modalities) {
    throw ContractViolation("generator: modality code has " + std::to_string(code.count()) +
                            " entries, model expects " + std::to_string(config_.n_modalities));
  }
  return forward(condition(image, landmarks, code));
}

std::size_t generator_parameter_count(const GeneratorConfig& config) {
  config.validate();
  const auto& c = config;
  auto conv_n = [](std::size_t out, std::size_t in, std::size_t k) { return out * in * k * k + out; };
  std::size_t n = conv_n(c.channels_at(0), c.input_channels(), c.stem_kernel) + 2 * c.channels_at(0);
  for (std::size_t i = 0; i < c.n_down; ++i) {
    n += conv_n(c.channels_at(i + 1), c.channels_at(i), c.down_kernel) + 2 * c.channels_at(i + 1);
  }
  const auto trunk = c.channels_at(c.n_down);
  n += c.n_resblocks * 2 * (conv_n(trunk, trunk, 3) + 2 * trunk);
  for (std::size_t s = 0; s < c.n_up; ++s) {
    const auto in = c.channels_at(c.n_down - s), out = c.channels_at(c.n_down - s - 1);
    n += in * out * c.down_kernel * c.down_kernel + out + 2 * out;
    if (s + 1 < c.n_up) n += conv_n(3, out, 1);
  }
  n += conv_n(3, c.channels_at(0), c.stem_kernel);
  return n;
}

template <typename T>
CycleResult<T> cycle_apply(const TranslateFn<T>& translate, const Tensor<T>& image_a,
                           const LandmarkSet& landmarks_b, const ModalityCode& code_b,
                           const LandmarkSet& landmarks_a, const ModalityCode& code_a) {
  CycleResult<T> r;
  r.forward = translate(image_a, landmarks_b, code_b);
  r.reconstructed = translate(r.forward.final, landmarks_a, code_a);
  return r;
}

template <typename T>
CycleResult<T> cycle_apply(const Generator<T>& generator, const Tensor<T>& image_a,
                           const LandmarkSet& landmarks_b, const ModalityCode& code_b,
                           const LandmarkSet& landmarks_a, const ModalityCode& code_a) {
  TranslateFn<T> fn = [&generator](const Tensor<T>& img, const LandmarkSet& l,
                                   const ModalityCode& m) { return generator(img, l, m); };
  return cycle_apply(fn, image_a, landmarks_b, code_b, landmarks_a, code_a);
}

template class Generator<float>;
template class Generator<double>;
template CycleResult<float> cycle_apply(const TranslateFn<float>&, const Tensor<float>&,
                                        const LandmarkSet&, const ModalityCode&,
                                        const LandmarkSet&, const ModalityCode&);
template CycleResult<double> cycle_apply(const TranslateFn<double>&, const Tensor<double>&,
                                         const LandmarkSet&, const ModalityCode&,
                                         const LandmarkSet&, const ModalityCode&);
template CycleResult<float> cycle_apply(const Generator<float>&, const Tensor<float>&,
                                        const LandmarkSet&, const ModalityCode&,
                                        const LandmarkSet&, const ModalityCode&);
template CycleResult<double> cycle_apply(const Generator<double>&, const Tensor<double>&,
                                         const LandmarkSet&, const ModalityCode&,
                                         const LandmarkSet&, const ModalityCode&);

}  // namespace pgan
