#pragma once

#include <string>

#include "wnn/tensor.hpp"

namespace wnn {

// Binary PGM (P5) and PPM (P6), 8-bit, maxval 255 only. Pixels map to
// [0, 1] as v/255 on read; writes quantize with round(clamp(x, 0, 1) * 255).
// Tensors are channel-first [C, H, W] with C = 1 for PGM and 3 for PPM.
Tensor read_image(const std::string& path);
void write_image(const std::string& path, const Tensor& x);

}  // namespace wnn
