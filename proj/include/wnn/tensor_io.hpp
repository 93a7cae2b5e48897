#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wnn/tensor.hpp"

namespace wnn {

// Binary container for named tensors. Layout, all integers little-endian:
//   "WTNS" | version u8 = 1 | dtype u8 (0 = f32, 1 = f64) | count u32
//   then per record: name_len u16 | name bytes | rank u8 | dims u64 each |
//   row-major payload.
// Doubles survive a dtype-1 round trip bit for bit.
enum class TensorDType : std::uint8_t { F32 = 0, F64 = 1 };

// Ordered map; order is preserved on disk. Names must be unique.
using TensorMap = std::vector<std::pair<std::string, Tensor>>;

void write_tensors(const std::string& path, const TensorMap& tensors,
                   TensorDType dtype = TensorDType::F64);

TensorMap read_tensors(const std::string& path);

// Lookup helper; throws Error when the name is absent.
const Tensor& find_tensor(const TensorMap& tensors, const std::string& name);

}  // namespace wnn
