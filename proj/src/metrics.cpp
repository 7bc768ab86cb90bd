#include "pgan/metrics.hpp"

#include <cmath>

namespace pgan {

namespace {

template <typename T>
void require_same_image_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ContractViolation(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                            shape_str(b.shape()));
  }
}

}  // namespace

template <typename T>
Tensor<T> to_unit_range(const Tensor<T>& image) {
  std::vector<T> out(image.data().begin(), image.data().end());
  for (auto& v : out) v = (v + T(1)) / T(2);
  return Tensor<T>::from_data(image.shape(), std::move(out));
}

template <typename T>
double mse(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_image_shape(a, b, "mse");
  if (a.numel() == 0) throw ContractViolation("mse: empty tensors");
  double acc = 0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

template <typename T>
std::vector<double> grayscale(const Tensor<T>& image) {
  if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1)) {
    throw ContractViolation("grayscale: expected 3xHxW or 1xHxW, got " + shape_str(image.shape()));
  }
  const std::size_t plane = image.dim(1) * image.dim(2);
  auto d = image.data();
  std::vector<double> out(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = image.dim(0) == 1 ? static_cast<double>(d[i])
                               : 0.299 * d[i] + 0.587 * d[plane + i] + 0.114 * d[2 * plane + i];
  }
  return out;
}

std::vector<double> gaussian_window(std::size_t window, double sigma) {
  if (window == 0 || window % 2 == 0) throw ContractViolation("ssim: window must be odd");
  if (!(sigma > 0)) throw ContractViolation("ssim: sigma must be > 0");
  const double c = static_cast<double>(window / 2);
  std::vector<double> g1(window);
  double s = 0;
  for (std::size_t i = 0; i < window; ++i) {
    const double x = static_cast<double>(i) - c;
    g1[i] = std::exp(-x * x / (2 * sigma * sigma));
    s += g1[i];
  }
  for (auto& v : g1) v /= s;
  std::vector<double> w(window * window);
  for (std::size_t i = 0; i < window; ++i) {
    for (std::size_t j = 0; j < window; ++j) w[i * window + j] = g1[i] * g1[j];
  }
  return w;
}

template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b, const SsimOptions& options) {
  require_same_image_shape(a, b, "ssim");
  const auto x = grayscale(a);
  const auto y = grayscale(b);
  const std::size_t h = a.dim(1), w = a.dim(2), n = options.window;
  const auto g = gaussian_window(n, options.sigma);
  if (h < n || w < n) {
    throw ContractViolation("ssim: image " + std::to_string(h) + "x" + std::to_string(w) +
                            " is smaller than the " + std::to_string(n) + "x" + std::to_string(n) +
                            " window");
  }
  const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
  const double c2 = std::pow(options.k2 * options.dynamic_range, 2);
  double total = 0;
  for (std::size_t r = 0; r + n <= h; ++r) {
    for (std::size_t c = 0; c + n <= w; ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double wt = g[i * n + j];
          const double px = x[(r + i) * w + c + j], py = y[(r + i) * w + c + j];
          mx += wt * px;
          my += wt * py;
          sxx += wt * px * px;
          syy += wt * py * py;
          sxy += wt * px * py;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return total / static_cast<double>((h - n + 1) * (w - n + 1));
}

#define PGAN_INSTANTIATE_METRICS(T)                                              \
  template Tensor<T> to_unit_range(const Tensor<T>&);                            \
  template double mse(const Tensor<T>&, const Tensor<T>&);                       \
  template std::vector<double> grayscale(const Tensor<T>&);                      \
  template double ssim(const Tensor<T>&, const Tensor<T>&, const SsimOptions&);

PGAN_INSTANTIATE_METRICS(float)
PGAN_INSTANTIATE_METRICS(double)

}  // namespace pgan
