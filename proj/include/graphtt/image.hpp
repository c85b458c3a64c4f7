#pragma once

#include <string>

#include "graphtt/tensor.hpp"

namespace graphtt {

/// Reads a PNG file into an H x W x C tensor with values in [0, 1].
/// Grayscale images yield C = 1, color images C = 3 (alpha is dropped).
DenseTensor read_png(const std::string& path);

/// Writes an H x W x C tensor (C = 1 or 3) as an 8-bit PNG. Values are
/// clamped to [0, 1] before quantization.
void write_png(const std::string& path, const DenseTensor& t);

}  // namespace graphtt
