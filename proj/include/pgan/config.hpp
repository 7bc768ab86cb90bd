#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pgan/adam.hpp"
#include "pgan/discriminator.hpp"
#include "pgan/generator.hpp"
#include "pgan/losses.hpp"
#include "pgan/synth.hpp"

namespace pgan {

enum class PoolTarget { Real, Fake };

/// Everything a training run needs. Serialized as flat `key = value` lines;
/// every key has a default, so an empty file describes the reference
/// desk-scale run.
struct TrainConfig {
  TrainConfig() { sync_derived(); }

  LossWeights weights;
  ObjectiveMode mode = ObjectiveMode::Full;
  AdamOptions adam_g;
  AdamOptions adam_d;
  std::size_t batch_size = 1;
  std::size_t total_steps = 2000;
  std::size_t pool_capacity = 50;
  PoolTarget pool_target = PoolTarget::Real;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 500;
  std::size_t log_every = 1;
  std::string output_dir = "run";
  std::size_t landmark_stroke = 1;

  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  std::size_t d_base_channels = 32;
  CorpusConfig corpus;
  std::uint64_t texture_seed = 1234;

  /// Propagates shared keys (image size, modality count, discriminator
  /// width, Adam betas) into the sub-configs.
  void sync_derived();
  void validate() const;
  std::size_t image_size() const { return generator.image_size; }

  std::string to_text() const;
  static TrainConfig from_text(const std::string& text);
  static TrainConfig from_file(const std::string& path);
};

/// Parses `key = value` lines ('#' starts a comment). Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace pgan
