#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pgan/conditioning.hpp"

namespace pgan {

struct Emotion {
  double mouth_curvature = 0.0;  // [-1, 1]; +1 smiles and opens the mouth
  double eye_openness = 0.6;     // [0, 1]
  double brow_raise = 0.0;       // [-1, 1]
  bool operator==(const Emotion&) const = default;
};

/// Eight canonical expressions used to build training tuples.
const std::array<Emotion, 8>& canonical_emotions();
const std::array<const char*, 8>& canonical_emotion_names();

/// Identity geometry and colouring of one toy face plus its current emotion.
struct FaceSpec {
  double face_half_width = 0.32;   // [0.28, 0.36]
  double face_half_height = 0.39;  // [0.36, 0.42]
  double eye_spacing = 0.26;       // [0.22, 0.30]
  std::array<double, 3> skin{0.85, 0.7, 0.6};  // each in [0.45, 0.95]
  std::array<double, 3> hair{0.25, 0.15, 0.1}; // each in [0.05, 0.4]
  double hair_band = 0.12;         // [0.08, 0.18]
  Emotion emotion;

  void validate() const;
  FaceSpec with_emotion(const Emotion& e) const;
  bool operator==(const FaceSpec&) const = default;
};

/// Deterministic identity from a seed; emotion drawn from the same stream.
FaceSpec sample_identity(std::uint64_t seed);

/// Exact landmark geometry of a face.
LandmarkSet face_landmarks(const FaceSpec& spec);

enum class Region : std::uint8_t { Background, Skin, Hair, Brow, Nose, Eye, Lip, MouthInterior };

/// Per-pixel region labels (sampled at pixel centres).
std::vector<Region> render_regions(const FaceSpec& spec, std::size_t size);

inline constexpr std::size_t kMaxModalities = 3;

struct ToySample {
  TensorF image;  // 3 x H x W in [-1, 1]
  LandmarkSet landmarks;
  ModalityCode modality{0, 2};
  std::uint64_t identity_id = 0;
};

/// Modality 0: flat shading; 1: diagonal stripes; 2: noise grain.
ToySample render(const FaceSpec& spec, const ModalityCode& modality, std::size_t size,
                 std::uint64_t identity_id = 0);

struct TrainingTuple {
  TensorF image_a;
  TensorF image_b;
  LandmarkSet landmarks_a;
  LandmarkSet landmarks_b;
  ModalityCode code_a{0, 2};
  ModalityCode code_b{0, 2};
};

TrainingTuple make_tuple(const FaceSpec& spec, const Emotion& emotion_a, const Emotion& emotion_b,
                         const ModalityCode& modality_a, const ModalityCode& modality_b,
                         std::size_t size);

/// Reproducible corpus: identity i uses seed (seed * 1000003 + i). Training
/// identities are [0, train_identities); held-out ones follow.
struct CorpusConfig {
  std::uint64_t seed = 1;
  std::size_t train_identities = 32;
  std::size_t held_out_identities = 8;
  std::size_t n_modalities = 2;
  std::size_t image_size = 64;
};

class Corpus {
 public:
  explicit Corpus(CorpusConfig config);

  const CorpusConfig& config() const { return config_; }
  const FaceSpec& identity(std::size_t i) const { return identities_.at(i); }
  std::size_t size() const { return identities_.size(); }

  /// Random tuple from a training identity: random emotions and modalities.
  template <typename Rng>
  TrainingTuple sample_training_tuple(Rng& rng) const;

  /// The sample at (identity, emotion index, modality).
  ToySample sample(std::size_t identity, std::size_t emotion, std::size_t modality) const;

 private:
  CorpusConfig config_;
  std::vector<FaceSpec> identities_;
};

template <typename Rng>
TrainingTuple Corpus::sample_training_tuple(Rng& rng) const {
  const auto id = static_cast<std::size_t>(rng() % config_.train_identities);
  const auto& emotions = canonical_emotions();
  const auto ea = static_cast<std::size_t>(rng() % emotions.size());
  const auto eb = static_cast<std::size_t>(rng() % emotions.size());
  const auto ma = static_cast<std::size_t>(rng() % config_.n_modalities);
  const auto mb = static_cast<std::size_t>(rng() % config_.n_modalities);
  return make_tuple(identities_[id], emotions[ea], emotions[eb],
                    ModalityCode(ma, config_.n_modalities), ModalityCode(mb, config_.n_modalities),
                    config_.image_size);
}

}  // namespace pgan
