#include "pgan/params.hpp"

#include <algorithm>
#include <cstring>

namespace pgan {

template <typename T>
const Tensor<T>& ParamStore<T>::add(std::string name, Tensor<T> value) {
  if (contains(name)) throw ContractViolation("params: duplicate parameter " + name);
  if (!value.is_leaf()) throw ContractViolation("params: " + name + " is not a leaf");
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

template <typename T>
const Tensor<T>& ParamStore<T>::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ContractViolation("params: no parameter named " + name);
}

template <typename T>
Tensor<T>& ParamStore<T>::get_mut(const std::string& name) {
  for (auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw ContractViolation("params: no parameter named " + name);
}

template <typename T>
bool ParamStore<T>::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.first == name; });
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

template <typename T>
void ParamStore<T>::set_requires_grad(bool flag) {
  for (auto& e : entries_) e.second.set_requires_grad(flag);
}

template <typename T>
bool ParamStore<T>::grads_are_zero() const {
  for (const auto& e : entries_) {
    auto g = e.second.grad();
    if (std::any_of(g.begin(), g.end(), [](T v) { return v != T(0); })) return false;
  }
  return true;
}

template <typename T>
std::uint64_t ParamStore<T>::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, t] : entries_) {
    mix(name.data(), name.size());
    for (auto d : t.shape()) mix(&d, sizeof d);
    mix(t.data().data(), t.numel() * sizeof(T));
  }
  return h;
}

template <typename T>
Tensor<T> normal_tensor(Shape shape, double stddev, std::mt19937_64& rng, double mean) {
  std::normal_distribution<double> dist(mean, stddev);
  std::vector<T> data(shape_numel(shape));
  for (auto& v : data) v = static_cast<T>(dist(rng));
  return Tensor<T>::from_data(std::move(shape), std::move(data), true);
}

template class ParamStore<float>;
template class ParamStore<double>;
template Tensor<float> normal_tensor<float>(Shape, double, std::mt19937_64&, double);
template Tensor<double> normal_tensor<double>(Shape, double, std::mt19937_64&, double);

}  // namespace pgan
