#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgan/tensor.hpp"

namespace pgan {

inline constexpr std::size_t kNumLandmarks = 68;

struct Point2 {
  double x = 0;
  double y = 0;
  bool operator==(const Point2&) const = default;
};

/// A run of landmark indices drawn as a polyline; closed groups wrap around.
struct LandmarkGroup {
  const char* name;
  std::size_t first;
  std::size_t last;  // inclusive
  bool closed;
};

/// Standard 68-point facial topology: jaw, brows, nose, eyes, lips.
std::span<const LandmarkGroup> landmark_groups();

/// Exactly 68 points with coordinates normalized to [0,1].
class LandmarkSet {
 public:
  LandmarkSet() = default;
  /// Throws ContractViolation on a wrong count or out-of-range coordinate.
  static LandmarkSet from_points(std::span<const Point2> points);

  const std::array<Point2, kNumLandmarks>& points() const { return points_; }
  const Point2& operator[](std::size_t i) const { return points_.at(i); }

  /// {"points": [[x,y], ...]}
  std::string to_json() const;
  static LandmarkSet from_json(const std::string& text);

  bool operator==(const LandmarkSet&) const = default;

 private:
  std::array<Point2, kNumLandmarks> points_{};
};

/// One-hot modality selector.
class ModalityCode {
 public:
  ModalityCode(std::size_t index, std::size_t count);
  std::size_t index() const { return index_; }
  std::size_t count() const { return count_; }
  std::vector<double> one_hot() const;
  bool operator==(const ModalityCode&) const = default;

 private:
  std::size_t index_;
  std::size_t count_;
};

/// Sets pixels along the segment a-b (normalized coordinates) to 1.
/// Samples the segment at dyadic parameters, so a 2x finer raster of the
/// same segment covers a superset of this one's pixels after downsampling.
void draw_segment(std::span<float> plane, std::size_t height, std::size_t width, Point2 a,
                  Point2 b, std::size_t stroke);

/// Pixel index for a normalized coordinate.
std::size_t to_pixel(double coord, std::size_t extent);

template <typename T>
Tensor<T> rasterize_landmarks(const LandmarkSet& landmarks, std::size_t height, std::size_t width,
                              std::size_t stroke = 1);

template <typename T>
Tensor<T> broadcast_modality(const ModalityCode& code, std::size_t height, std::size_t width);

/// Channel concatenation [image(3), heatmap(1), modality(n)].
template <typename T>
Tensor<T> assemble_input(const Tensor<T>& image, const Tensor<T>& heatmap,
                         const Tensor<T>& modality_planes);

/// Builds the full (3+1+n) x H x W generator input for `image`.
template <typename T>
Tensor<T> condition(const Tensor<T>& image, const LandmarkSet& landmarks, const ModalityCode& code,
                    std::size_t stroke = 1);

}  // namespace pgan
