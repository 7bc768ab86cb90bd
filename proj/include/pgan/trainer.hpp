#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgan/adam.hpp"
#include "pgan/config.hpp"
#include "pgan/pool.hpp"

namespace pgan {

/// Loss values reported for one optimization step.
struct StepMetrics {
  std::size_t step = 0;
  double d_loss = 0;
  double g_total = 0;
  double adv_ab = 0;
  double adv_ba = 0;
  double cycle = 0;
  double feature_matching = 0;
  double identity = 0;
  double texture = 0;
  double wall_seconds = 0;

  /// Loss terms in log column order (excludes step and wall time).
  std::vector<std::pair<std::string, double>> named_losses() const;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const StepMetrics& m);

/// Alternating discriminator/generator optimization over the toy corpus.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  /// Draws `batch_size` tuples from the training identities and steps once.
  StepMetrics train_step();
  StepMetrics train_step(const TrainingTuple& tuple);
  /// D update then G update; losses are averaged over the tuples.
  StepMetrics train_step(std::span<const TrainingTuple> tuples);

  TrainingTuple next_tuple();

  const TrainConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  Generator<float>& generator() { return generator_; }
  const Generator<float>& generator() const { return generator_; }
  MultiDiscriminator<float>& discriminators() { return discriminators_; }
  const MultiDiscriminator<float>& discriminators() const { return discriminators_; }
  const TextureNet<float>& texture_net() const { return texture_net_; }
  const ImagePool& pool() const { return pool_; }
  std::size_t step() const { return step_; }

  friend void save_checkpoint(const Trainer& trainer, const std::string& path);
  friend Trainer load_checkpoint(const std::string& path);

 private:
  std::size_t supervised_levels() const;

  TrainConfig config_;
  Corpus corpus_;
  Generator<float> generator_;
  MultiDiscriminator<float> discriminators_;
  TextureNet<float> texture_net_;
  AdamState adam_g_;
  std::vector<AdamState> adam_d_;
  ImagePool pool_;
  std::mt19937_64 data_rng_;
  std::size_t step_ = 0;
};

}  // namespace pgan
