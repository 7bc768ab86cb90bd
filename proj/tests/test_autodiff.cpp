#include <cmath>

#include "doctest.h"
#include "pgan/gradcheck.hpp"
#include "pgan/ops.hpp"
#include "support.hpp"

using namespace pgan;
using pgan::testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

// Contracts an arbitrary output with fixed random weights so every output
// element contributes a distinct gradient.
TensorD project(const TensorD& y, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  auto w = random_tensor<double>(y.shape(), rng);
  return sum(mul(y, w));
}

// Values bounded away from zero so |x| and relu stay differentiable under
// finite differences.
TensorD away_from_zero(Shape shape, std::mt19937_64& rng) {
  auto t = random_tensor<double>(shape, rng, 0.2, 1.0);
  std::bernoulli_distribution sign(0.5);
  auto d = t.mutable_data();
  for (auto& v : d) v = sign(rng) ? v : -v;
  return t;
}

}  // namespace

TEST_CASE("elementwise ops pass finite-difference checks") {
  std::mt19937_64 rng(1);
  const Shape s{2, 3, 4};
  const auto b = random_tensor<double>(s, rng);
  const auto x = away_from_zero(s, rng);
  CHECK(grad_check([&](const TensorD& t) { return project(add(t, b)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(sub(b, t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(mul(t, t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(scale(t, -2.5)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(add_scalar(t, 0.3)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(square(t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(abs(t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(relu(t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(leaky_relu(t, 0.2)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(pgan::tanh(t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return mean(square(t)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return l1_distance(t, b); }, x) < kTol);
}

TEST_CASE("matrix and layout ops pass finite-difference checks") {
  std::mt19937_64 rng(2);
  const auto a = random_tensor<double>({3, 4}, rng);
  const auto b = random_tensor<double>({4, 2}, rng);
  CHECK(grad_check([&](const TensorD& t) { return project(matmul(t, b)); }, a) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(matmul(a, t)); }, b) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(transpose(t)); }, a) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(reshape(t, {2, 6})); }, a) < kTol);

  const auto img = random_tensor<double>({3, 4, 4}, rng);
  const auto other = random_tensor<double>({2, 4, 4}, rng);
  CHECK(grad_check([&](const TensorD& t) { return project(channel_concat({other, t, other})); }, img) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(channel_slice(t, 1, 3)); }, img) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(average_downsample(t)); }, img) < kTol);
}

TEST_CASE("convolutions and instance norm pass finite-difference checks") {
  std::mt19937_64 rng(3);
  const auto x = random_tensor<double>({2, 6, 6}, rng);
  const auto w = random_tensor<double>({3, 2, 3, 3}, rng);
  const auto bias = random_tensor<double>({3}, rng);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t pad : {0u, 1u, 2u}) {
      CAPTURE(stride);
      CAPTURE(pad);
      CHECK(grad_check([&](const TensorD& t) { return project(conv2d(t, w, bias, stride, pad)); }, x) < kTol);
      CHECK(grad_check([&](const TensorD& t) { return project(conv2d(x, t, bias, stride, pad)); }, w) < kTol);
      CHECK(grad_check([&](const TensorD& t) { return project(conv2d(x, w, t, stride, pad)); }, bias) < kTol);
    }
  }
  const auto xt = random_tensor<double>({3, 3, 3}, rng);
  const auto wt = random_tensor<double>({3, 2, 4, 4}, rng);
  const auto bt = random_tensor<double>({2}, rng);
  CHECK(grad_check([&](const TensorD& t) { return project(conv_transpose2d(t, wt, bt, 2, 1)); }, xt) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(conv_transpose2d(xt, t, bt, 2, 1)); }, wt) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(conv_transpose2d(xt, wt, t, 2, 1)); }, bt) < kTol);

  const auto g = random_tensor<double>({2}, rng, 0.5, 1.5);
  const auto sh = random_tensor<double>({2}, rng);
  CHECK(grad_check([&](const TensorD& t) { return project(instance_norm(t, g, sh, 1e-5)); }, x) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(instance_norm(x, t, sh, 1e-5)); }, g) < kTol);
  CHECK(grad_check([&](const TensorD& t) { return project(instance_norm(x, g, t, 1e-5)); }, sh) < kTol);
}

TEST_CASE("conv2d matches a direct nested-loop correlation") {
  std::mt19937_64 rng(4);
  const std::size_t cin = 2, cout = 3, h = 7, w = 5, k = 3;
  const auto x = random_tensor<double>({cin, h, w}, rng);
  const auto wt = random_tensor<double>({cout, cin, k, k}, rng);
  const auto b = random_tensor<double>({cout}, rng);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t pad : {0u, 1u}) {
      std::size_t oh = 0, ow = 0;
      const auto ref = pgan::testing::naive_conv2d(pgan::testing::values(x), cin, h, w,
                                                   pgan::testing::values(wt), cout, k,
                                                   pgan::testing::values(b), stride, pad, oh, ow);
      const auto y = conv2d(x, wt, b, stride, pad);
      REQUIRE(y.shape() == Shape{cout, oh, ow});
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(y.at(i) == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, convT(y)> with the same kernel and zero bias.
  std::mt19937_64 rng(5);
  const auto x = random_tensor<double>({2, 8, 8}, rng);
  const auto w = random_tensor<double>({3, 2, 4, 4}, rng);
  const auto zero3 = TensorD::zeros({3});
  const auto zero2 = TensorD::zeros({2});
  const auto cx = conv2d(x, w, zero3, 2, 1);
  const auto y = random_tensor<double>(cx.shape(), rng);
  const auto ty = conv_transpose2d(y, w, zero2, 2, 1);
  REQUIRE(ty.shape() == x.shape());
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < y.numel(); ++i) lhs += cx.at(i) * y.at(i);
  for (std::size_t i = 0; i < x.numel(); ++i) rhs += x.at(i) * ty.at(i);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(conv_transpose_output_size(4, 4, 2, 1) == 8);
  CHECK(conv_output_size(8, 4, 2, 1) == 4);
}

TEST_CASE("instance norm output has zero mean and unit variance per channel") {
  std::mt19937_64 rng(6);
  const auto x = random_tensor<double>({3, 5, 5}, rng, -3, 7);
  const auto y = instance_norm(x, TensorD::full({3}, 1.0), TensorD::zeros({3}), 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 25; ++i) m += y.at(c * 25 + i);
    m /= 25;
    for (std::size_t i = 0; i < 25; ++i) v += std::pow(y.at(c * 25 + i) - m, 2);
    CHECK(std::abs(m) < 1e-12);
    CHECK(v / 25 == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("leaf gradients accumulate and non-leaf graphs are rebuilt") {
  auto x = TensorD::from_data({2}, {1.0, -2.0}, true);
  sum(square(x)).backward();
  CHECK(x.grad()[0] == 2.0);
  CHECK(x.grad()[1] == -4.0);
  sum(square(x)).backward();
  CHECK(x.grad()[0] == 4.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("shared subexpressions receive the sum of both paths") {
  auto x = TensorD::from_data({1}, {3.0}, true);
  auto y = mul(x, x);
  sum(add(y, y)).backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("no-grad mode records no graph") {
  auto x = TensorD::from_data({2}, {1.0, 2.0}, true);
  TensorD y;
  {
    NoGradGuard guard;
    y = sum(square(x));
  }
  CHECK_FALSE(y.requires_grad());
  CHECK(y.is_leaf());
  CHECK(grad_mode_enabled());
}

TEST_CASE("detach cuts the graph") {
  auto x = TensorD::from_data({2}, {1.0, 2.0}, true);
  auto d = square(x).detach();
  CHECK_FALSE(d.requires_grad());
  auto loss = sum(mul(d, x));
  loss.backward();
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("contract violations are explicit") {
  const auto a = TensorD::zeros({2, 3});
  const auto b = TensorD::zeros({3, 2});
  CHECK_THROWS_AS(add(a, b), ContractViolation);
  CHECK_THROWS_AS(matmul(a, a), ContractViolation);
  CHECK_THROWS_AS(a.backward(), ContractViolation);
  CHECK_THROWS_AS(average_downsample(TensorD::zeros({1, 3, 3})), ContractViolation);
  CHECK_THROWS_AS(reshape(a, {4}), ContractViolation);
}

TEST_CASE("grad_check reports non-finite evaluations") {
  const auto x = TensorD::from_data({1}, {0.0});
  auto bad = [](const TensorD& t) {
    return sum(mul(t, TensorD::from_data({1}, {std::numeric_limits<double>::infinity()})));
  };
  CHECK_THROWS_AS(grad_check(bad, x), NonFiniteError);
}

TEST_CASE("float and double evaluate the same graph") {
  std::mt19937_64 rng(7);
  const auto xd = random_tensor<double>({2, 6, 6}, rng);
  const auto wd = random_tensor<double>({2, 2, 3, 3}, rng);
  std::vector<float> xf(xd.data().begin(), xd.data().end());
  std::vector<float> wf(wd.data().begin(), wd.data().end());
  const auto yd = conv2d(xd, wd, TensorD::zeros({2}), 1, 1);
  const auto yf = conv2d(TensorF::from_data({2, 6, 6}, xf), TensorF::from_data({2, 2, 3, 3}, wf),
                         TensorF::zeros({2}), 1, 1);
  for (std::size_t i = 0; i < yd.numel(); ++i) CHECK(yf.at(i) == doctest::Approx(yd.at(i)).epsilon(1e-5));
}
