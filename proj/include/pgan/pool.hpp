#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pgan/tensor.hpp"

namespace pgan {

/// Bounded history of detached images. Once full, each query returns the
/// candidate or, with probability 1/2, swaps it for a uniformly chosen
/// stored image.
class ImagePool {
 public:
  struct Decision {
    bool swap = false;
    std::size_t slot = 0;
  };

  ImagePool(std::size_t capacity, std::uint64_t seed);

  TensorF query(const TensorF& candidate);
  /// Applies an explicit decision instead of drawing one (ignored while filling).
  TensorF query(const TensorF& candidate, Decision decision);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return buffer_.size(); }
  const std::vector<TensorF>& buffer() const { return buffer_; }

  std::string rng_state() const;
  void restore(std::vector<TensorF> buffer, const std::string& rng_state);

 private:
  std::size_t capacity_;
  std::vector<TensorF> buffer_;
  std::mt19937_64 rng_;
};

}  // namespace pgan
