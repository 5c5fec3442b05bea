// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace readapt {

// Storage element types. Checkpoints in the wild are float32 or one of the
// two 16-bit float formats; arithmetic always happens in float32 or wider.
enum class DType : std::uint8_t {
  f32,
  f16,
  bf16,
};

constexpr std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32:
      return 4;
    case DType::f16:
    case DType::bf16:
      return 2;
  }
  return 0;
}

// Container dtype strings ("F32", "F16", "BF16").
std::string_view dtype_name(DType t);
std::optional<DType> dtype_from_name(std::string_view name);

// Scalar conversions, IEEE round-to-nearest-even. Overflow rounds to
// infinity per IEEE; infinities are preserved; NaNs stay NaN (quieted).
std::uint16_t f32_to_f16_bits(float v);
float f16_bits_to_f32(std::uint16_t bits);
std::uint16_t f32_to_bf16_bits(float v);
float bf16_bits_to_f32(std::uint16_t bits);

// Round-trips a value through the storage representation of `t`.
float quantize_to(DType t, float v);

// Distance in representable steps between a and b when both are stored as
// `t`. 0 means bit-identical after quantization (+0 and -0 count as equal).
// Only meaningful for finite values.
std::int64_t ulp_distance(DType t, float a, float b);

}  // namespace readapt
