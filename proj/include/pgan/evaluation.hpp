#pragma once

#include <string>
#include <vector>

#include "pgan/checkpoint.hpp"
#include "pgan/metrics.hpp"

namespace pgan {

/// Same identity and emotion rendered in a source and a target modality.
struct TransferPair {
  std::size_t identity = 0;
  std::size_t emotion = 0;
  ToySample source;
  ToySample target;
};

/// Held-out identities, every canonical emotion, `source` -> `target` modality.
std::vector<TransferPair> held_out_pairs(const Corpus& corpus, std::size_t source = 0,
                                         std::size_t target = 1);

struct EvalSample {
  std::size_t identity = 0;
  std::size_t emotion = 0;
  double mse = 0;
  double ssim = 0;
  double seconds = 0;
};

struct EvalReport {
  std::vector<EvalSample> samples;
  double mean_mse = 0;
  double mean_ssim = 0;
  double mean_inference_seconds = 0;
  std::string corpus;
  std::string checkpoint_id;
  SsimOptions ssim_options;

  std::string to_json() const;
  std::string to_table() const;
};

/// Scores translator(I_A, L_A, c_B) against I_B for every pair. Metrics run on
/// images remapped to [0, 1]; timing wraps the translator call only.
EvalReport evaluate_modality_transfer(const TranslateFn<float>& translator,
                                      const std::vector<TransferPair>& pairs,
                                      const std::string& corpus_descriptor,
                                      const std::string& checkpoint_id,
                                      const SsimOptions& ssim_options = {});
EvalReport evaluate_modality_transfer(const InferenceModel& model, const Corpus& held_out);

/// Mean |G(I_A, L_A, c_B) - I_B| over the pairs in model range.
double transfer_l1(const Generator<float>& generator, const std::vector<TransferPair>& pairs,
                   std::size_t landmark_stroke = 1);

struct BenchmarkResult {
  double mean_seconds = 0;
  std::size_t image_size = 0;
  std::size_t repetitions = 0;
  std::string hardware;
};

/// Wall-clock mean of generator forward passes (conditioning included,
/// corpus rendering excluded) after `warmup` untimed passes.
BenchmarkResult benchmark_inference(const Generator<float>& generator,
                                    const std::vector<TransferPair>& pairs,
                                    std::size_t repetitions, std::size_t warmup = 1,
                                    std::size_t landmark_stroke = 1);

std::string hardware_description();

}  // namespace pgan
