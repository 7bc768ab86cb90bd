#pragma once

#include <string>

#include "pgan/tensor.hpp"

namespace pgan {

/// 3 x H x W in [-1, 1] to 8-bit RGB PNG bytes; v -> round((v + 1) / 2 * 255).
std::string encode_png(const TensorF& image);
/// PNG bytes (any color type) to a 3 x H x W tensor in [-1, 1].
TensorF decode_png(const std::string& bytes);

void write_png(const std::string& path, const TensorF& image);
TensorF read_png(const std::string& path);

std::string base64_encode(const std::string& bytes);
/// Throws ContractViolation on characters outside the standard alphabet.
std::string base64_decode(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace pgan
