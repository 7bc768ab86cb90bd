#include <set>

#include "doctest.h"
#include "pgan/conditioning.hpp"
#include "pgan/synth.hpp"
#include "support.hpp"

using namespace pgan;

namespace {

LandmarkSet all_at(Point2 p) {
  std::vector<Point2> pts(kNumLandmarks, p);
  return LandmarkSet::from_points(pts);
}

}  // namespace

TEST_CASE("landmark groups partition the 68 indices") {
  std::multiset<std::size_t> seen;
  for (const auto& g : landmark_groups()) {
    for (auto i = g.first; i <= g.last; ++i) seen.insert(i);
  }
  CHECK(seen.size() == kNumLandmarks);
  for (std::size_t i = 0; i < kNumLandmarks; ++i) CHECK(seen.count(i) == 1);
}

TEST_CASE("a horizontal segment covers the floor-mapped pixel run") {
  std::vector<float> plane(16 * 16, 0.0f);
  draw_segment(plane, 16, 16, {0.25, 0.5}, {0.75, 0.5}, 1);
  // floor(0.25 * 16) = 4 .. floor(0.75 * 16) = 12 on row floor(0.5 * 16) = 8.
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      const bool on = r == 8 && c >= 4 && c <= 12;
      CHECK(plane[r * 16 + c] == (on ? 1.0f : 0.0f));
    }
  }
}

TEST_CASE("a diagonal segment is 8-connected and hits both endpoints") {
  std::vector<float> plane(32 * 32, 0.0f);
  draw_segment(plane, 32, 32, {0.1, 0.2}, {0.8, 0.6}, 1);
  CHECK(plane[to_pixel(0.2, 32) * 32 + to_pixel(0.1, 32)] == 1.0f);
  CHECK(plane[to_pixel(0.6, 32) * 32 + to_pixel(0.8, 32)] == 1.0f);
  // Every column between the endpoints holds at least one pixel.
  for (std::size_t c = to_pixel(0.1, 32); c <= to_pixel(0.8, 32); ++c) {
    float col = 0;
    for (std::size_t r = 0; r < 32; ++r) col += plane[r * 32 + c];
    CHECK(col >= 1.0f);
  }
}

TEST_CASE("stroke width grows the footprint symmetrically") {
  std::vector<float> thin(16 * 16, 0.0f), thick(16 * 16, 0.0f);
  draw_segment(thin, 16, 16, {0.5, 0.5}, {0.5, 0.5}, 1);
  draw_segment(thick, 16, 16, {0.5, 0.5}, {0.5, 0.5}, 3);
  float a = 0, b = 0;
  for (auto v : thin) a += v;
  for (auto v : thick) b += v;
  CHECK(a == 1.0f);
  CHECK(b == 9.0f);
}

TEST_CASE("coarse rasters are covered by the 2x finer raster") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto lm = face_landmarks(sample_identity(seed));
    const auto fine = rasterize_landmarks<float>(lm, 64, 64);
    const auto coarse = rasterize_landmarks<float>(lm, 32, 32);
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 32; ++c) {
        if (coarse.at(r * 32 + c) == 0.0f) continue;
        float block = 0;
        for (std::size_t dr = 0; dr < 2; ++dr)
          for (std::size_t dc = 0; dc < 2; ++dc) block += fine.at((2 * r + dr) * 64 + 2 * c + dc);
        CHECK(block > 0.0f);
      }
    }
  }
}

TEST_CASE("landmarks reject wrong counts and out-of-range coordinates") {
  std::vector<Point2> pts(67, {0.5, 0.5});
  try {
    LandmarkSet::from_points(pts);
    FAIL("expected a contract violation");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("67") != std::string::npos);
  }
  pts.resize(68, {0.5, 0.5});
  pts[3] = {1.2, 0.5};
  CHECK_THROWS_AS(LandmarkSet::from_points(pts), ContractViolation);
}

TEST_CASE("landmark JSON round-trips exactly") {
  const auto lm = face_landmarks(sample_identity(42));
  CHECK(LandmarkSet::from_json(lm.to_json()) == lm);
  CHECK_THROWS_AS(LandmarkSet::from_json("{\"points\": 3}"), ContractViolation);
  CHECK_THROWS_AS(LandmarkSet::from_json("not json"), ContractViolation);
}

TEST_CASE("conditioned input stacks image, heatmap and one-hot planes") {
  std::mt19937_64 rng(3);
  const auto image = pgan::testing::random_tensor<float>({3, 16, 16}, rng);
  for (std::size_t n = 1; n <= 3; ++n) {
    const ModalityCode code(n - 1, n);
    const auto x = condition(image, all_at({0.5, 0.5}), code);
    REQUIRE(x.shape() == Shape{3 + 1 + n, 16, 16});
    for (std::size_t i = 0; i < 3 * 256; ++i) CHECK(x.at(i) == image.at(i));
    for (std::size_t m = 0; m < n; ++m) {
      const float expected = m == n - 1 ? 1.0f : 0.0f;
      for (std::size_t i = 0; i < 256; ++i) CHECK(x.at((4 + m) * 256 + i) == expected);
    }
  }
  CHECK_THROWS_AS(ModalityCode(2, 2), ContractViolation);
  CHECK_THROWS_AS(rasterize_landmarks<float>(all_at({0.5, 0.5}), 4, 4), ContractViolation);
}
