#include "pgan/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace pgan {

namespace {

template <typename T>
using Node = TensorNode<T>;
template <typename T>
using NodePtr = std::shared_ptr<TensorNode<T>>;
template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

// Builds an op result; records the graph edge only when some input needs grad.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::vector<NodePtr<T>> parents,
                      std::function<void(Node<T>&)> backward_fn, const char* op) {
  auto out = Tensor<T>::from_data(std::move(shape), std::move(data));
  bool needs = grad_mode_enabled() &&
               std::any_of(parents.begin(), parents.end(),
                           [](const NodePtr<T>& p) { return p->requires_grad; });
  auto node = out.node_ptr();
  node->op = op;
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return out;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                      " vs " + shape_str(b.shape()));
}

template <typename T>
void require_chw(const Tensor<T>& a, const char* op) {
  require(a.rank() == 3, std::string(op) + ": expected C x H x W, got " + shape_str(a.shape()));
}

template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const Tensor<T>& a, Fwd fwd, Deriv deriv, const char* op) {
  auto in = a.data();
  std::vector<T> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), fwd);
  auto pa = a.node_ptr();
  // deriv(x, y) returns dy/dx given input x and output y.
  return make_result<T>(
      a.shape(), std::move(out), {pa},
      [pa, deriv](Node<T>& self) {
        auto& g = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += self.grad[i] * deriv(pa->data[i], self.data[i]);
        }
      },
      op);
}

// Column matrix of k x k patches: rows (c, ki, kj), columns (oy, ox).
template <typename T>
void im2col(const T* in, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* cols) {
  const std::size_t plane = oh * ow;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        T* row = cols + ((c * k + ki) * k + kj) * plane;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * stride + ki) - static_cast<long>(pad);
          T* dst = row + oy * ow;
          if (iy < 0 || iy >= static_cast<long>(h)) {
            std::fill(dst, dst + ow, T(0));
            continue;
          }
          const T* src = in + (c * h + static_cast<std::size_t>(iy)) * w;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * stride + kj) - static_cast<long>(pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(w)) ? T(0)
                                                             : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds columns back into an image buffer.
template <typename T>
void col2im(const T* cols, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* img) {
  const std::size_t plane = oh * ow;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const T* row = cols + ((c * k + ki) * k + kj) * plane;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * stride + ki) - static_cast<long>(pad);
          if (iy < 0 || iy >= static_cast<long>(h)) continue;
          T* dst = img + (c * h + static_cast<std::size_t>(iy)) * w;
          const T* src = row + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * stride + kj) - static_cast<long>(pad);
            if (ix >= 0 && ix < static_cast<long>(w)) dst[static_cast<std::size_t>(ix)] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  require(kernel >= 1 && stride >= 1, "conv: kernel and stride must be >= 1");
  require(in + 2 * padding >= kernel, "conv: input " + std::to_string(in) + " with padding " +
                                          std::to_string(padding) + " smaller than kernel " +
                                          std::to_string(kernel));
  return (in + 2 * padding - kernel) / stride + 1;
}

std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                                       std::size_t padding) {
  require(kernel >= 1 && stride >= 1 && in >= 1, "conv_transpose: invalid geometry");
  const std::size_t full = (in - 1) * stride + kernel;
  require(full > 2 * padding, "conv_transpose: padding consumes the whole output");
  return full - 2 * padding;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result<T>(
      a.shape(), std::move(out), {pa, pb},
      [pa, pb](Node<T>& self) {
        for (auto* p : {pa.get(), pb.get()}) {
          if (!p->requires_grad) continue;
          auto& g = p->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
      },
      "add");
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result<T>(
      a.shape(), std::move(out), {pa, pb},
      [pa, pb](Node<T>& self) {
        if (pa->requires_grad) {
          auto& g = pa->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (pb->requires_grad) {
          auto& g = pb->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
      },
      "sub");
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result<T>(
      a.shape(), std::move(out), {pa, pb},
      [pa, pb](Node<T>& self) {
        if (pa->requires_grad) {
          auto& g = pa->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->data[i];
        }
        if (pb->requires_grad) {
          auto& g = pb->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->data[i];
        }
      },
      "mul");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  return unary<T>(
      a, [factor](T x) { return x * factor; }, [factor](T, T) { return factor; }, "scale");
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T offset) {
  return unary<T>(
      a, [offset](T x) { return x + offset; }, [](T, T) { return T(1); }, "add_scalar");
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
  return unary<T>(
      a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; }, "square");
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  return unary<T>(
      a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); }, "abs");
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary<T>(
      a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); },
      "relu");
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
  return unary<T>(
      a, [slope](T x) { return x > T(0) ? x : slope * x; },
      [slope](T x, T) { return x > T(0) ? T(1) : slope; }, "leaky_relu");
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return unary<T>(
      a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; }, "tanh");
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  auto in = a.data();
  T total = std::accumulate(in.begin(), in.end(), T(0));
  auto pa = a.node_ptr();
  return make_result<T>(
      {}, {total}, {pa},
      [pa](Node<T>& self) {
        auto& g = pa->ensure_grad();
        for (auto& v : g) v += self.grad[0];
      },
      "sum");
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  require(a.numel() > 0, "mean: empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> l1_distance(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "l1_distance");
  return mean(abs(sub(a, b)));
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
          "matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> out(m * n);
  MatMap<T>(out.data(), m, n).noalias() =
      ConstMatMap<T>(a.data().data(), m, k) * ConstMatMap<T>(b.data().data(), k, n);
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result<T>(
      {m, n}, std::move(out), {pa, pb},
      [pa, pb, m, k, n](Node<T>& self) {
        ConstMatMap<T> dy(self.grad.data(), m, n);
        if (pa->requires_grad) {
          MatMap<T>(pa->ensure_grad().data(), m, k).noalias() +=
              dy * ConstMatMap<T>(pb->data.data(), k, n).transpose();
        }
        if (pb->requires_grad) {
          MatMap<T>(pb->ensure_grad().data(), k, n).noalias() +=
              ConstMatMap<T>(pa->data.data(), m, k).transpose() * dy;
        }
      },
      "matmul");
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require(a.rank() == 2, "transpose: expected a matrix, got " + shape_str(a.shape()));
  const auto m = a.dim(0), n = a.dim(1);
  std::vector<T> out(m * n);
  MatMap<T>(out.data(), n, m) = ConstMatMap<T>(a.data().data(), m, n).transpose();
  auto pa = a.node_ptr();
  return make_result<T>(
      {n, m}, std::move(out), {pa},
      [pa, m, n](Node<T>& self) {
        MatMap<T>(pa->ensure_grad().data(), m, n) +=
            ConstMatMap<T>(self.grad.data(), n, m).transpose();
      },
      "transpose");
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  require(shape_numel(shape) == a.numel(),
          "reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  std::vector<T> out(a.data().begin(), a.data().end());
  auto pa = a.node_ptr();
  return make_result<T>(
      std::move(shape), std::move(out), {pa},
      [pa](Node<T>& self) {
        auto& g = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      },
      "reshape");
}

template <typename T>
Tensor<T> channel_concat(std::span<const Tensor<T>> parts) {
  require(!parts.empty(), "channel_concat: no inputs");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t channels = 0;
  std::vector<NodePtr<T>> parents;
  std::vector<T> out;
  for (const auto& p : parts) {
    require(p.rank() >= 1 && Shape(p.shape().begin() + 1, p.shape().end()) == tail,
            "channel_concat: trailing dims differ: " + shape_str(parts[0].shape()) + " vs " +
                shape_str(p.shape()));
    channels += p.dim(0);
    out.insert(out.end(), p.data().begin(), p.data().end());
    parents.push_back(p.node_ptr());
  }
  Shape shape{channels};
  shape.insert(shape.end(), tail.begin(), tail.end());
  auto captured = parents;
  return make_result<T>(
      std::move(shape), std::move(out), std::move(parents),
      [captured](Node<T>& self) {
        std::size_t offset = 0;
        for (const auto& p : captured) {
          if (p->requires_grad) {
            auto& g = p->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offset + i];
          }
          offset += p->data.size();
        }
      },
      "channel_concat");
}

template <typename T>
Tensor<T> channel_slice(const Tensor<T>& a, std::size_t begin, std::size_t end) {
  require(a.rank() >= 1 && begin < end && end <= a.dim(0),
          "channel_slice: invalid range [" + std::to_string(begin) + ", " + std::to_string(end) +
              ") for " + shape_str(a.shape()));
  const std::size_t per = a.numel() / a.dim(0);
  std::vector<T> out(a.data().begin() + begin * per, a.data().begin() + end * per);
  Shape shape = a.shape();
  shape[0] = end - begin;
  auto pa = a.node_ptr();
  return make_result<T>(
      std::move(shape), std::move(out), {pa},
      [pa, begin, per](Node<T>& self) {
        auto& g = pa->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * per + i] += self.grad[i];
      },
      "channel_slice");
}

template <typename T>
Tensor<T> average_downsample(const Tensor<T>& a) {
  require_chw(a, "average_downsample");
  const auto c = a.dim(0), h = a.dim(1), w = a.dim(2);
  require(h % 2 == 0 && w % 2 == 0 && h >= 2 && w >= 2,
          "average_downsample: spatial dims must be even, got " + shape_str(a.shape()));
  const auto oh = h / 2, ow = w / 2;
  std::vector<T> out(c * oh * ow);
  auto in = a.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const T* r0 = &in[(ch * h + 2 * y) * w + 2 * x];
        const T* r1 = r0 + w;
        out[(ch * oh + y) * ow + x] = T(0.25) * (r0[0] + r0[1] + r1[0] + r1[1]);
      }
    }
  }
  auto pa = a.node_ptr();
  return make_result<T>(
      {c, oh, ow}, std::move(out), {pa},
      [pa, c, h, w, oh, ow](Node<T>& self) {
        auto& g = pa->ensure_grad();
        for (std::size_t ch = 0; ch < c; ++ch) {
          for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
              const T d = T(0.25) * self.grad[(ch * oh + y) * ow + x];
              T* r0 = &g[(ch * h + 2 * y) * w + 2 * x];
              r0[0] += d;
              r0[1] += d;
              r0[w] += d;
              r0[w + 1] += d;
            }
          }
        }
      },
      "average_downsample");
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
  require_chw(input, "conv2d");
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3),
          "conv2d: weight must be C_out x C_in x k x k, got " + shape_str(weight.shape()));
  require(weight.dim(1) == input.dim(0),
          "conv2d: weight expects " + std::to_string(weight.dim(1)) + " input channels, input has " +
              std::to_string(input.dim(0)));
  require(bias.rank() == 1 && bias.dim(0) == weight.dim(0), "conv2d: bias must have C_out entries");
  const auto cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const auto cout = weight.dim(0), k = weight.dim(2);
  const auto oh = conv_output_size(h, k, stride, padding);
  const auto ow = conv_output_size(w, k, stride, padding);
  const auto rows = cin * k * k, plane = oh * ow;

  auto cols = std::make_shared<std::vector<T>>(rows * plane);
  im2col(input.data().data(), cin, h, w, k, stride, padding, oh, ow, cols->data());

  std::vector<T> out(cout * plane);
  MatMap<T> y(out.data(), cout, plane);
  y.noalias() = ConstMatMap<T>(weight.data().data(), cout, rows) * ConstMatMap<T>(cols->data(), rows, plane);
  auto b = bias.data();
  for (std::size_t o = 0; o < cout; ++o) y.row(o).array() += b[o];

  auto px = input.node_ptr(), pw = weight.node_ptr(), pb = bias.node_ptr();
  return make_result<T>(
      {cout, oh, ow}, std::move(out), {px, pw, pb},
      [=](Node<T>& self) {
        ConstMatMap<T> dy(self.grad.data(), cout, plane);
        if (pb->requires_grad) {
          auto& gb = pb->ensure_grad();
          for (std::size_t o = 0; o < cout; ++o) gb[o] += dy.row(o).sum();
        }
        if (pw->requires_grad) {
          MatMap<T>(pw->ensure_grad().data(), cout, rows).noalias() +=
              dy * ConstMatMap<T>(cols->data(), rows, plane).transpose();
        }
        if (px->requires_grad) {
          std::vector<T> dcols(rows * plane);
          MatMap<T>(dcols.data(), rows, plane).noalias() =
              ConstMatMap<T>(pw->data.data(), cout, rows).transpose() * dy;
          col2im(dcols.data(), cin, h, w, k, stride, padding, oh, ow, px->ensure_grad().data());
        }
      },
      "conv2d");
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                           std::size_t stride, std::size_t padding) {
  require_chw(input, "conv_transpose2d");
  require(weight.rank() == 4 && weight.dim(2) == weight.dim(3),
          "conv_transpose2d: weight must be C_in x C_out x k x k, got " +
              shape_str(weight.shape()));
  require(weight.dim(0) == input.dim(0),
          "conv_transpose2d: weight expects " + std::to_string(weight.dim(0)) +
              " input channels, input has " + std::to_string(input.dim(0)));
  require(bias.rank() == 1 && bias.dim(0) == weight.dim(1),
          "conv_transpose2d: bias must have C_out entries");
  const auto cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const auto cout = weight.dim(1), k = weight.dim(2);
  const auto oh = conv_transpose_output_size(h, k, stride, padding);
  const auto ow = conv_transpose_output_size(w, k, stride, padding);
  const auto rows = cout * k * k, plane = h * w;

  // Columns of the output image indexed like conv2d's im2col over (oh, ow),
  // so the forward pass is col2im(W^T x).
  std::vector<T> cols(rows * plane);
  MatMap<T>(cols.data(), rows, plane).noalias() =
      ConstMatMap<T>(weight.data().data(), cin, rows).transpose() *
      ConstMatMap<T>(input.data().data(), cin, plane);
  std::vector<T> out(cout * oh * ow, T(0));
  col2im(cols.data(), cout, oh, ow, k, stride, padding, h, w, out.data());
  auto b = bias.data();
  for (std::size_t o = 0; o < cout; ++o) {
    std::for_each(out.begin() + o * oh * ow, out.begin() + (o + 1) * oh * ow,
                  [&](T& v) { v += b[o]; });
  }

  auto px = input.node_ptr(), pw = weight.node_ptr(), pb = bias.node_ptr();
  return make_result<T>(
      {cout, oh, ow}, std::move(out), {px, pw, pb},
      [=](Node<T>& self) {
        if (pb->requires_grad) {
          auto& gb = pb->ensure_grad();
          for (std::size_t o = 0; o < cout; ++o) {
            gb[o] += std::accumulate(self.grad.begin() + o * oh * ow,
                                     self.grad.begin() + (o + 1) * oh * ow, T(0));
          }
        }
        if (!px->requires_grad && !pw->requires_grad) return;
        std::vector<T> dcols(rows * plane);
        im2col(self.grad.data(), cout, oh, ow, k, stride, padding, h, w, dcols.data());
        ConstMatMap<T> dc(dcols.data(), rows, plane);
        if (px->requires_grad) {
          MatMap<T>(px->ensure_grad().data(), cin, plane).noalias() +=
              ConstMatMap<T>(pw->data.data(), cin, rows) * dc;
        }
        if (pw->requires_grad) {
          MatMap<T>(pw->ensure_grad().data(), cin, rows).noalias() +=
              ConstMatMap<T>(px->data.data(), cin, plane) * dc.transpose();
        }
      },
      "conv_transpose2d");
}

template <typename T>
Tensor<T> instance_norm(const Tensor<T>& input, const Tensor<T>& scale_t, const Tensor<T>& shift_t,
                        T eps) {
  require_chw(input, "instance_norm");
  const auto c = input.dim(0), n = input.dim(1) * input.dim(2);
  require(n >= 2, "instance_norm: need H*W >= 2, got " + shape_str(input.shape()));
  require(scale_t.shape() == Shape{c} && shift_t.shape() == Shape{c},
          "instance_norm: scale/shift must have C entries");
  auto in = input.data();
  auto gamma = scale_t.data(), beta = shift_t.data();
  auto xhat = std::make_shared<std::vector<T>>(c * n);
  auto inv_std = std::make_shared<std::vector<T>>(c);
  std::vector<T> out(c * n);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T* x = &in[ch * n];
    T mu = std::accumulate(x, x + n, T(0)) / static_cast<T>(n);
    T var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i] - mu) * (x[i] - mu);
    var /= static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_std)[ch] = is;
    for (std::size_t i = 0; i < n; ++i) {
      const T xh = (x[i] - mu) * is;
      (*xhat)[ch * n + i] = xh;
      out[ch * n + i] = gamma[ch] * xh + beta[ch];
    }
  }
  auto px = input.node_ptr(), ps = scale_t.node_ptr(), pt = shift_t.node_ptr();
  return make_result<T>(
      input.shape(), std::move(out), {px, ps, pt},
      [=](Node<T>& self) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T* dy = &self.grad[ch * n];
          const T* xh = &(*xhat)[ch * n];
          T sum_dy = 0, sum_dy_xh = 0;
          for (std::size_t i = 0; i < n; ++i) {
            sum_dy += dy[i];
            sum_dy_xh += dy[i] * xh[i];
          }
          if (ps->requires_grad) ps->ensure_grad()[ch] += sum_dy_xh;
          if (pt->requires_grad) pt->ensure_grad()[ch] += sum_dy;
          if (px->requires_grad) {
            auto& g = px->ensure_grad();
            const T k = ps->data[ch] * (*inv_std)[ch] / static_cast<T>(n);
            for (std::size_t i = 0; i < n; ++i) {
              g[ch * n + i] += k * (static_cast<T>(n) * dy[i] - sum_dy - xh[i] * sum_dy_xh);
            }
          }
        }
      },
      "instance_norm");
}

#define PGAN_INSTANTIATE_OPS(T)                                                                 \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> scale(const Tensor<T>&, T);                                                \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                           \
  template Tensor<T> square(const Tensor<T>&);                                                  \
  template Tensor<T> abs(const Tensor<T>&);                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                    \
  template Tensor<T> leaky_relu(const Tensor<T>&, T);                                           \
  template Tensor<T> tanh(const Tensor<T>&);                                                    \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> mean(const Tensor<T>&);                                                    \
  template Tensor<T> l1_distance(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> transpose(const Tensor<T>&);                                               \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                          \
  template Tensor<T> channel_concat(std::span<const Tensor<T>>);                                \
  template Tensor<T> channel_slice(const Tensor<T>&, std::size_t, std::size_t);                 \
  template Tensor<T> average_downsample(const Tensor<T>&);                                      \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,  \
                            std::size_t);                                                       \
  template Tensor<T> conv_transpose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                      std::size_t, std::size_t);                                \
  template Tensor<T> instance_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);

PGAN_INSTANTIATE_OPS(float)
PGAN_INSTANTIATE_OPS(double)

}  // namespace pgan
