#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pgan/trainer.hpp"

namespace pgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Raised for unreadable, truncated, corrupted or version-mismatched files.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary layout: "PGANCKPT", u32 version, u64 payload size, payload, u64
/// FNV-1a of the payload. The payload holds the config text, step counter,
/// data RNG, generator and per-level discriminator parameters, Adam moments
/// and the image pool (buffer and RNG).
void save_checkpoint(const Trainer& trainer, const std::string& path);
Trainer load_checkpoint(const std::string& path);

/// Generator-only view of a checkpoint for inference and evaluation.
struct InferenceModel {
  TrainConfig config;
  Generator<float> generator;
  /// Hex digest of the payload; stable across loads of the same file.
  std::string checkpoint_id;
};

InferenceModel load_inference_model(const std::string& path);

}  // namespace pgan
