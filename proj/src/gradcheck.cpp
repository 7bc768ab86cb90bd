#include "pgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pgan {

namespace {

double eval_scalar(const std::function<TensorD(const TensorD&)>& fn, const TensorD& x) {
  NoGradGuard no_grad;
  auto y = fn(x);
  if (y.numel() != 1) throw ContractViolation("grad_check: function must return a scalar");
  const double v = y.item();
  if (!std::isfinite(v)) throw NonFiniteError("grad_check: non-finite function value");
  return v;
}

}  // namespace

double grad_check(const std::function<TensorD(const TensorD&)>& fn, const TensorD& point,
                  double eps) {
  if (!(eps > 0)) throw ContractViolation("grad_check: eps must be positive");

  auto x = TensorD::from_data(point.shape(), {point.data().begin(), point.data().end()}, true);
  auto y = fn(x);
  if (!y.all_finite()) throw NonFiniteError("grad_check: non-finite function value");
  y.backward();
  std::vector<double> analytic(x.numel(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());

  double worst = 0.0;
  auto probe = TensorD::from_data(point.shape(), {point.data().begin(), point.data().end()});
  auto buf = probe.mutable_data();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double saved = buf[i];
    buf[i] = saved + eps;
    const double up = eval_scalar(fn, probe);
    buf[i] = saved - eps;
    const double down = eval_scalar(fn, probe);
    buf[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i])));
  }
  return worst;
}

}  // namespace pgan
