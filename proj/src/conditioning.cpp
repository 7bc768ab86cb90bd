#include "pgan/conditioning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include "json.hpp"

#include "pgan/ops.hpp"

namespace pgan {

namespace {

constexpr std::array<LandmarkGroup, 9> kGroups{{
    {"jaw", 0, 16, false},
    {"right_brow", 17, 21, false},
    {"left_brow", 22, 26, false},
    {"nose_bridge", 27, 30, false},
    {"nose_base", 31, 35, false},
    {"right_eye", 36, 41, true},
    {"left_eye", 42, 47, true},
    {"outer_lips", 48, 59, true},
    {"inner_lips", 60, 67, true},
}};

}  // namespace

std::span<const LandmarkGroup> landmark_groups() { return kGroups; }

LandmarkSet LandmarkSet::from_points(std::span<const Point2> points) {
  if (points.size() != kNumLandmarks) {
    throw ContractViolation("landmarks: expected 68 points, got " + std::to_string(points.size()));
  }
  LandmarkSet set;
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    const auto& p = points[i];
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw ContractViolation("landmarks: point " + std::to_string(i) + " outside [0,1]^2");
    }
    set.points_[i] = p;
  }
  return set;
}

std::string LandmarkSet::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points_) pts.push_back({p.x, p.y});
  return nlohmann::json{{"points", pts}}.dump();
}

LandmarkSet LandmarkSet::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("landmarks: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array()) {
    throw ContractViolation("landmarks: expected an object with a \"points\" array");
  }
  std::vector<Point2> points;
  for (const auto& entry : doc["points"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number()) {
      throw ContractViolation("landmarks: each point must be a pair of numbers");
    }
    points.push_back({entry[0].get<double>(), entry[1].get<double>()});
  }
  return from_points(points);
}

ModalityCode::ModalityCode(std::size_t index, std::size_t count) : index_(index), count_(count) {
  if (count == 0 || index >= count) {
    throw ContractViolation("modality: index " + std::to_string(index) + " invalid for " +
                            std::to_string(count) + " modalities");
  }
}

std::vector<double> ModalityCode::one_hot() const {
  std::vector<double> v(count_, 0.0);
  v[index_] = 1.0;
  return v;
}

std::size_t to_pixel(double coord, std::size_t extent) {
  const auto p = static_cast<long>(std::floor(coord * static_cast<double>(extent)));
  return static_cast<std::size_t>(std::clamp<long>(p, 0, static_cast<long>(extent) - 1));
}

void draw_segment(std::span<float> plane, std::size_t height, std::size_t width, Point2 a,
                  Point2 b, std::size_t stroke) {
  const double span_px = std::max(std::abs(b.x - a.x) * static_cast<double>(width),
                                  std::abs(b.y - a.y) * static_cast<double>(height));
  const std::size_t steps = std::bit_ceil(static_cast<std::size_t>(std::ceil(4.0 * span_px)) + 1);
  const long lo = -static_cast<long>((stroke - 1) / 2);
  const long hi = static_cast<long>(stroke / 2);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const double x = a.x * (1.0 - t) + b.x * t;
    const double y = a.y * (1.0 - t) + b.y * t;
    const long px = static_cast<long>(to_pixel(x, width));
    const long py = static_cast<long>(to_pixel(y, height));
    for (long dy = lo; dy <= hi; ++dy) {
      for (long dx = lo; dx <= hi; ++dx) {
        const long yy = py + dy, xx = px + dx;
        if (yy < 0 || xx < 0 || yy >= static_cast<long>(height) || xx >= static_cast<long>(width)) {
          continue;
        }
        plane[static_cast<std::size_t>(yy) * width + static_cast<std::size_t>(xx)] = 1.0f;
      }
    }
  }
}

template <typename T>
Tensor<T> rasterize_landmarks(const LandmarkSet& landmarks, std::size_t height, std::size_t width,
                              std::size_t stroke) {
  if (height < 8 || width < 8) throw ContractViolation("rasterize_landmarks: H and W must be >= 8");
  if (stroke < 1) throw ContractViolation("rasterize_landmarks: stroke must be >= 1");
  std::vector<float> plane(height * width, 0.0f);
  const auto& pts = landmarks.points();
  for (const auto& g : kGroups) {
    for (std::size_t i = g.first; i < g.last; ++i) {
      draw_segment(plane, height, width, pts[i], pts[i + 1], stroke);
    }
    if (g.closed) draw_segment(plane, height, width, pts[g.last], pts[g.first], stroke);
  }
  return Tensor<T>::from_data({1, height, width}, std::vector<T>(plane.begin(), plane.end()));
}

template <typename T>
Tensor<T> broadcast_modality(const ModalityCode& code, std::size_t height, std::size_t width) {
  std::vector<T> planes(code.count() * height * width, T(0));
  std::fill_n(planes.begin() + static_cast<long>(code.index() * height * width), height * width,
              T(1));
  return Tensor<T>::from_data({code.count(), height, width}, std::move(planes));
}

template <typename T>
Tensor<T> assemble_input(const Tensor<T>& image, const Tensor<T>& heatmap,
                         const Tensor<T>& modality_planes) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ContractViolation("assemble_input: image must be 3 x H x W, got " +
                            shape_str(image.shape()));
  }
  if (heatmap.rank() != 3 || heatmap.dim(0) != 1) {
    throw ContractViolation("assemble_input: heatmap must be 1 x H x W, got " +
                            shape_str(heatmap.shape()));
  }
  if (modality_planes.rank() != 3) {
    throw ContractViolation("assemble_input: modality planes must be n x H x W");
  }
  for (const auto* t : {&heatmap, &modality_planes}) {
    if (t->dim(1) != image.dim(1) || t->dim(2) != image.dim(2)) {
      throw ContractViolation("assemble_input: spatial size mismatch " + shape_str(image.shape()) +
                              " vs " + shape_str(t->shape()));
    }
  }
  return channel_concat<T>({image, heatmap, modality_planes});
}

template <typename T>
Tensor<T> condition(const Tensor<T>& image, const LandmarkSet& landmarks, const ModalityCode& code,
                    std::size_t stroke) {
  const auto h = image.dim(1), w = image.dim(2);
  return assemble_input(image, rasterize_landmarks<T>(landmarks, h, w, stroke),
                        broadcast_modality<T>(code, h, w));
}

#define PGAN_INSTANTIATE_CONDITIONING(T)                                                     \
  template Tensor<T> rasterize_landmarks<T>(const LandmarkSet&, std::size_t, std::size_t,    \
                                            std::size_t);                                    \
  template Tensor<T> broadcast_modality<T>(const ModalityCode&, std::size_t, std::size_t);   \
  template Tensor<T> assemble_input<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> condition<T>(const Tensor<T>&, const LandmarkSet&, const ModalityCode&, \
                                  std::size_t);

PGAN_INSTANTIATE_CONDITIONING(float)
PGAN_INSTANTIATE_CONDITIONING(double)

}  // namespace pgan
