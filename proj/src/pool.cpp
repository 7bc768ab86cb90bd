#include "pgan/pool.hpp"

#include <sstream>

namespace pgan {

ImagePool::ImagePool(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {}

TensorF ImagePool::query(const TensorF& candidate) {
  if (capacity_ == 0 || buffer_.size() < capacity_) return query(candidate, Decision{});
  Decision d;
  d.swap = (rng_() & 1ULL) != 0;
  d.slot = static_cast<std::size_t>(rng_() % buffer_.size());
  return query(candidate, d);
}

TensorF ImagePool::query(const TensorF& candidate, Decision decision) {
  if (candidate.requires_grad()) {
    throw ContractViolation("image pool: candidate must be detached from the graph");
  }
  if (capacity_ == 0) return candidate;
  if (buffer_.size() < capacity_) {
    buffer_.push_back(candidate);
    return candidate;
  }
  if (!decision.swap) return candidate;
  if (decision.slot >= buffer_.size()) throw ContractViolation("image pool: slot out of range");
  TensorF stored = buffer_[decision.slot];
  buffer_[decision.slot] = candidate;
  return stored;
}

std::string ImagePool::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void ImagePool::restore(std::vector<TensorF> buffer, const std::string& rng_state) {
  if (buffer.size() > capacity_) throw ContractViolation("image pool: restored buffer over capacity");
  buffer_ = std::move(buffer);
  std::istringstream is(rng_state);
  is >> rng_;
  if (!is) throw ContractViolation("image pool: malformed RNG state");
}

}  // namespace pgan
