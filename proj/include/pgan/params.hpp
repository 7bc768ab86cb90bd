#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pgan/tensor.hpp"

namespace pgan {

/// Ordered, named collection of trainable leaves.
template <typename T>
class ParamStore {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  /// Registers a leaf; throws on duplicate names.
  const Tensor<T>& add(std::string name, Tensor<T> value);
  const Tensor<T>& get(const std::string& name) const;
  Tensor<T>& get_mut(const std::string& name);
  bool contains(const std::string& name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  void set_requires_grad(bool flag);
  /// True when no parameter holds a nonzero gradient.
  bool grads_are_zero() const;
  /// FNV-1a over names, shapes and values.
  std::uint64_t hash() const;

  /// Copies values (by name and shape) from another store of any precision.
  template <typename U>
  void assign_from(const ParamStore<U>& other);

 private:
  std::vector<Entry> entries_;
};

/// Weight initializers (DCGAN-style normal for convs, unit scale for norms).
template <typename T>
Tensor<T> normal_tensor(Shape shape, double stddev, std::mt19937_64& rng, double mean = 0.0);

template <typename T>
template <typename U>
void ParamStore<T>::assign_from(const ParamStore<U>& other) {
  for (const auto& [name, src] : other.entries()) {
    auto& dst = get_mut(name);
    if (dst.shape() != src.shape()) {
      throw ContractViolation("params: shape mismatch for " + name + ": " + shape_str(dst.shape()) +
                              " vs " + shape_str(src.shape()));
    }
    auto out = dst.mutable_data();
    auto in = src.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(in[i]);
  }
}

}  // namespace pgan
