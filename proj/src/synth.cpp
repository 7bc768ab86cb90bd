#include "pgan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pgan {

namespace {

constexpr double kCenterX = 0.5;
constexpr double kCenterY = 0.52;
constexpr double kEyeOffsetY = -0.08;
constexpr double kEyeHalfWidth = 0.055;
constexpr double kMouthOffsetY = 0.2;
constexpr double kMouthHalfWidth = 0.13;
constexpr double kLipThickness = 0.02;
constexpr double kBrowHalfWidth = 0.012;
constexpr double kNoseHalfWidth = 0.01;
constexpr std::size_t kSuperSample = 4;

struct Geometry {
  double eye_y, eye_half_height, brow_y, mouth_y, mouth_open, corner_lift;
  std::array<double, 2> eye_x;
};

Geometry geometry(const FaceSpec& s) {
  Geometry g{};
  g.eye_y = kCenterY + kEyeOffsetY;
  g.eye_half_height = 0.012 + 0.03 * s.emotion.eye_openness;
  g.eye_x = {kCenterX - s.eye_spacing / 2, kCenterX + s.eye_spacing / 2};
  g.brow_y = g.eye_y - 0.075 - 0.035 * s.emotion.brow_raise;
  g.mouth_y = kCenterY + kMouthOffsetY;
  g.mouth_open = 0.008 + 0.05 * (s.emotion.mouth_curvature + 1.0) / 2.0;
  g.corner_lift = -0.05 * s.emotion.mouth_curvature;
  return g;
}

double mouth_line(const Geometry& g, double u) { return g.mouth_y + g.corner_lift * u * u; }

bool inside_polygon(std::span<const Point2> poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

double segment_distance(Point2 a, Point2 b, double x, double y) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((x - a.x) * dx + (y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double px = a.x + t * dx - x, py = a.y + t * dy - y;
  return std::sqrt(px * px + py * py);
}

double polyline_distance(std::span<const Point2> pts, double x, double y) {
  double d = 1e9;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) d = std::min(d, segment_distance(pts[i], pts[i + 1], x, y));
  return d;
}

class RegionClassifier {
 public:
  explicit RegionClassifier(const FaceSpec& spec) : spec_(spec) {
    const auto lm = face_landmarks(spec);
    const auto& p = lm.points();
    auto take = [&](std::size_t a, std::size_t b) {
      return std::vector<Point2>(p.begin() + static_cast<long>(a), p.begin() + static_cast<long>(b) + 1);
    };
    eyes_ = {take(36, 41), take(42, 47)};
    brows_ = {take(17, 21), take(22, 26)};
    nose_ = {take(27, 30), take(31, 35)};
    outer_lips_ = take(48, 59);
    inner_lips_ = take(60, 67);
  }

  Region at(double x, double y) const {
    const double nx = (x - kCenterX) / spec_.face_half_width;
    const double ny = (y - kCenterY) / spec_.face_half_height;
    if (nx * nx + ny * ny > 1.0) return Region::Background;
    if (y < kCenterY - spec_.face_half_height + spec_.hair_band) return Region::Hair;
    if (inside_polygon(inner_lips_, x, y)) return Region::MouthInterior;
    if (inside_polygon(outer_lips_, x, y)) return Region::Lip;
    for (const auto& e : eyes_) {
      if (inside_polygon(e, x, y)) return Region::Eye;
    }
    for (const auto& b : brows_) {
      if (polyline_distance(b, x, y) < kBrowHalfWidth) return Region::Brow;
    }
    for (const auto& n : nose_) {
      if (polyline_distance(n, x, y) < kNoseHalfWidth) return Region::Nose;
    }
    return Region::Skin;
  }

 private:
  const FaceSpec& spec_;
  std::array<std::vector<Point2>, 2> eyes_, brows_, nose_;
  std::vector<Point2> outer_lips_, inner_lips_;
};

std::array<double, 3> region_color(const FaceSpec& s, Region r) {
  switch (r) {
    case Region::Background: return {0.55, 0.62, 0.7};
    case Region::Skin: return s.skin;
    case Region::Hair: return s.hair;
    case Region::Brow: return {s.hair[0] * 0.8, s.hair[1] * 0.8, s.hair[2] * 0.8};
    case Region::Nose: return {s.skin[0] * 0.8, s.skin[1] * 0.8, s.skin[2] * 0.8};
    case Region::Eye: return {0.1, 0.1, 0.12};
    case Region::Lip: return {0.75, 0.25, 0.3};
    case Region::MouthInterior: return {0.15, 0.05, 0.05};
  }
  return {0, 0, 0};
}

// Resolution-independent value noise in [0, 1) on a 64 x 64 lattice.
double grain(double x, double y) {
  auto ix = static_cast<std::uint64_t>(std::floor(x * 64.0));
  auto iy = static_cast<std::uint64_t>(std::floor(y * 64.0));
  std::uint64_t h = ix * 0x9E3779B97F4A7C15ULL ^ (iy + 0x632BE59BD9B4E019ULL) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 31;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 29;
  return static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
}

double texture_gain(std::size_t modality, double x, double y) {
  switch (modality) {
    case 1: return std::sin(2.0 * std::numbers::pi * (x + y) / 0.125) >= 0 ? 1.2 : 0.8;
    case 2: return 0.82 + 0.36 * grain(x, y);
    default: return 1.0;
  }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

const std::array<Emotion, 8>& canonical_emotions() {
  static const std::array<Emotion, 8> emotions{{
      {0.0, 0.6, 0.0},    // neutral
      {1.0, 0.5, 0.2},    // happiness
      {-0.8, 0.4, -0.4},  // sadness
      {0.2, 1.0, 1.0},    // surprise
      {-0.6, 0.5, -1.0},  // anger
      {-0.4, 0.3, -0.6},  // disgust
      {-0.2, 0.9, 0.7},   // fear
      {0.4, 0.5, -0.2},   // contempt
  }};
  return emotions;
}

const std::array<const char*, 8>& canonical_emotion_names() {
  static const std::array<const char*, 8> names{
      "neutral", "happiness", "sadness", "surprise", "anger", "disgust", "fear", "contempt"};
  return names;
}

void FaceSpec::validate() const {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  bool ok = in(face_half_width, 0.28, 0.36) && in(face_half_height, 0.36, 0.42) &&
            in(eye_spacing, 0.22, 0.30) && in(hair_band, 0.08, 0.18) &&
            in(emotion.mouth_curvature, -1, 1) && in(emotion.eye_openness, 0, 1) &&
            in(emotion.brow_raise, -1, 1);
  for (double c : skin) ok = ok && in(c, 0.45, 0.95);
  for (double c : hair) ok = ok && in(c, 0.05, 0.4);
  if (!ok) throw ContractViolation("face spec: parameter outside its documented range");
}

FaceSpec FaceSpec::with_emotion(const Emotion& e) const {
  FaceSpec copy = *this;
  copy.emotion = e;
  copy.validate();
  return copy;
}

FaceSpec sample_identity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FaceSpec s;
  s.face_half_width = uniform(rng, 0.28, 0.36);
  s.face_half_height = uniform(rng, 0.36, 0.42);
  s.eye_spacing = uniform(rng, 0.22, 0.30);
  for (auto& c : s.skin) c = uniform(rng, 0.45, 0.95);
  for (auto& c : s.hair) c = uniform(rng, 0.05, 0.4);
  s.hair_band = uniform(rng, 0.08, 0.18);
  s.emotion = canonical_emotions()[rng() % canonical_emotions().size()];
  s.validate();
  return s;
}

LandmarkSet face_landmarks(const FaceSpec& spec) {
  const auto g = geometry(spec);
  std::vector<Point2> p;
  p.reserve(kNumLandmarks);
  for (int i = 0; i <= 16; ++i) {
    const double theta = std::numbers::pi - std::numbers::pi * i / 16.0;
    p.push_back({kCenterX + spec.face_half_width * std::cos(theta),
                 kCenterY + spec.face_half_height * std::sin(theta)});
  }
  for (double ex : g.eye_x) {
    for (int i = 0; i < 5; ++i) {
      const double u = -1.0 + 0.5 * i;
      p.push_back({ex + 0.07 * u, g.brow_y - 0.015 * (1 - u * u)});
    }
  }
  for (int i = 0; i < 4; ++i) p.push_back({kCenterX, g.eye_y + 0.02 + 0.04 * i});
  for (int i = 0; i < 5; ++i) {
    const double u = -1.0 + 0.5 * i;
    p.push_back({kCenterX + 0.05 * u, g.eye_y + 0.15 + 0.01 * (1 - u * u)});
  }
  for (double ex : g.eye_x) {
    const double w = kEyeHalfWidth, h = g.eye_half_height, y = g.eye_y;
    p.push_back({ex - w, y});
    p.push_back({ex - w / 3, y - h});
    p.push_back({ex + w / 3, y - h});
    p.push_back({ex + w, y});
    p.push_back({ex + w / 3, y + h});
    p.push_back({ex - w / 3, y + h});
  }
  const double outer = kLipThickness + g.mouth_open / 2, inner = g.mouth_open / 2;
  auto lip = [&](double u, double half) {
    return Point2{kCenterX + kMouthHalfWidth * u, mouth_line(g, u) + half * (1 - u * u)};
  };
  p.push_back(lip(-1, 0));
  for (int i = 0; i < 5; ++i) p.push_back(lip(-2.0 / 3 + i / 3.0, -outer));
  p.push_back(lip(1, 0));
  for (int i = 0; i < 5; ++i) p.push_back(lip(2.0 / 3 - i / 3.0, outer));
  p.push_back(lip(-0.8, 0));
  for (int i = 0; i < 3; ++i) p.push_back(lip(-0.4 + 0.4 * i, -inner));
  p.push_back(lip(0.8, 0));
  for (int i = 0; i < 3; ++i) p.push_back(lip(0.4 - 0.4 * i, inner));
  return LandmarkSet::from_points(p);
}

std::vector<Region> render_regions(const FaceSpec& spec, std::size_t size) {
  RegionClassifier cls(spec);
  std::vector<Region> out(size * size);
  const double inv = 1.0 / static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      out[y * size + x] = cls.at((static_cast<double>(x) + 0.5) * inv, (static_cast<double>(y) + 0.5) * inv);
    }
  }
  return out;
}

ToySample render(const FaceSpec& spec, const ModalityCode& modality, std::size_t size,
                 std::uint64_t identity_id) {
  if (size < 32 || (size & (size - 1)) != 0) {
    throw ContractViolation("render: size must be a power of two >= 32, got " + std::to_string(size));
  }
  if (modality.index() >= kMaxModalities) {
    throw ContractViolation("render: unsupported modality " + std::to_string(modality.index()));
  }
  spec.validate();
  RegionClassifier cls(spec);
  std::vector<float> data(3 * size * size);
  const double inv = 1.0 / static_cast<double>(size * kSuperSample);
  const double weight = 1.0 / static_cast<double>(kSuperSample * kSuperSample);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      std::array<double, 3> acc{0, 0, 0};
      for (std::size_t sy = 0; sy < kSuperSample; ++sy) {
        for (std::size_t sx = 0; sx < kSuperSample; ++sx) {
          const double fx = (static_cast<double>(x * kSuperSample + sx) + 0.5) * inv;
          const double fy = (static_cast<double>(y * kSuperSample + sy) + 0.5) * inv;
          const auto c = region_color(spec, cls.at(fx, fy));
          const double gain = texture_gain(modality.index(), fx, fy);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += std::clamp(c[ch] * gain, 0.0, 1.0) * weight;
        }
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        data[(ch * size + y) * size + x] = static_cast<float>(acc[ch] * 2.0 - 1.0);
      }
    }
  }
  return {TensorF::from_data({3, size, size}, std::move(data)), face_landmarks(spec), modality,
          identity_id};
}

TrainingTuple make_tuple(const FaceSpec& spec, const Emotion& emotion_a, const Emotion& emotion_b,
                         const ModalityCode& modality_a, const ModalityCode& modality_b,
                         std::size_t size) {
  auto a = render(spec.with_emotion(emotion_a), modality_a, size);
  auto b = render(spec.with_emotion(emotion_b), modality_b, size);
  return {a.image, b.image, a.landmarks, b.landmarks, modality_a, modality_b};
}

Corpus::Corpus(CorpusConfig config) : config_(config) {
  if (config_.train_identities == 0) throw ContractViolation("corpus: need training identities");
  if (config_.n_modalities == 0 || config_.n_modalities > kMaxModalities) {
    throw ContractViolation("corpus: n_modalities must be in [1, 3]");
  }
  const auto total = config_.train_identities + config_.held_out_identities;
  for (std::size_t i = 0; i < total; ++i) {
    identities_.push_back(sample_identity(config_.seed * 1000003ULL + i));
  }
}

ToySample Corpus::sample(std::size_t identity, std::size_t emotion, std::size_t modality) const {
  const auto& emotions = canonical_emotions();
  return render(identities_.at(identity).with_emotion(emotions.at(emotion)),
                ModalityCode(modality, config_.n_modalities), config_.image_size, identity);
}

}  // namespace pgan
