// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/dtype.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>

namespace readapt {

std::string_view dtype_name(DType t) {
  switch (t) {
    case DType::f32:
      return "F32";
    case DType::f16:
      return "F16";
    case DType::bf16:
      return "BF16";
  }
  return "?";
}

std::optional<DType> dtype_from_name(std::string_view name) {
  if (name == "F32") return DType::f32;
  if (name == "F16") return DType::f16;
  if (name == "BF16") return DType::bf16;
  return std::nullopt;
}

std::uint16_t f32_to_f16_bits(float v) {
  const std::uint32_t x = std::bit_cast<std::uint32_t>(v);
  const std::uint16_t sign = static_cast<std::uint16_t>((x >> 16) & 0x8000u);
  const std::uint32_t mant = x & 0x7FFFFFu;
  const int exp = static_cast<int>((x >> 23) & 0xFFu);

  if (exp == 0xFF) {
    if (mant == 0) return sign | 0x7C00u;  // infinity
    // NaN: keep the top payload bits, force the quiet bit so the mantissa
    // cannot collapse to zero (which would read back as infinity).
    return static_cast<std::uint16_t>(sign | 0x7C00u | 0x200u | (mant >> 13));
  }
  if (exp == 0) return sign;  // f32 subnormals are far below the f16 range

  const int e16 = exp - 112;  // rebias 127 -> 15
  if (e16 >= 31) return sign | 0x7C00u;

  if (e16 <= 0) {
    // Subnormal half. Shift the full 24-bit significand down to the 10-bit
    // subnormal position and round to nearest even; a carry out of the
    // mantissa lands on the smallest normal, which is correct.
    const int shift = 14 - e16;
    if (shift > 24) return sign;
    const std::uint32_t full = mant | 0x800000u;
    std::uint32_t out = full >> shift;
    const std::uint32_t rem = full & ((1u << shift) - 1u);
    const std::uint32_t half = 1u << (shift - 1);
    if (rem > half || (rem == half && (out & 1u))) ++out;
    return static_cast<std::uint16_t>(sign | out);
  }

  std::uint32_t out = (static_cast<std::uint32_t>(e16) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1FFFu;
  if (rem > 0x1000u || (rem == 0x1000u && (out & 1u))) ++out;  // may carry to inf
  return static_cast<std::uint16_t>(sign | out);
}

float f16_bits_to_f32(std::uint16_t bits) {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000u) << 16;
  const std::uint32_t exp = (bits >> 10) & 0x1Fu;
  std::uint32_t mant = bits & 0x3FFu;

  if (exp == 0) {
    if (mant == 0) return std::bit_cast<float>(sign);
    // Normalize the subnormal significand.
    int shift = 0;
    while (!(mant & 0x400u)) {
      mant <<= 1;
      ++shift;
    }
    mant &= 0x3FFu;
    const std::uint32_t e32 = 113u - static_cast<std::uint32_t>(shift);
    return std::bit_cast<float>(sign | (e32 << 23) | (mant << 13));
  }
  if (exp == 31) {
    return std::bit_cast<float>(sign | 0x7F800000u | (mant << 13));
  }
  return std::bit_cast<float>(sign | ((exp + 112u) << 23) | (mant << 13));
}

std::uint16_t f32_to_bf16_bits(float v) {
  std::uint32_t x = std::bit_cast<std::uint32_t>(v);
  if (std::isnan(v)) {
    return static_cast<std::uint16_t>((x >> 16) | 0x0040u);  // keep quiet
  }
  const std::uint32_t lsb = (x >> 16) & 1u;
  x += 0x7FFFu + lsb;
  return static_cast<std::uint16_t>(x >> 16);
}

float bf16_bits_to_f32(std::uint16_t bits) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
}

float quantize_to(DType t, float v) {
  switch (t) {
    case DType::f32:
      return v;
    case DType::f16:
      return f16_bits_to_f32(f32_to_f16_bits(v));
    case DType::bf16:
      return bf16_bits_to_f32(f32_to_bf16_bits(v));
  }
  return v;
}

namespace {

// Maps a sign-magnitude bit pattern to a signed ordinal so that adjacent
// representable values differ by one and -0 == +0.
std::int64_t ordinal(std::uint64_t bits, std::uint64_t sign_mask) {
  const std::uint64_t mag = bits & (sign_mask - 1);
  return (bits & sign_mask) ? -static_cast<std::int64_t>(mag)
                            : static_cast<std::int64_t>(mag);
}

}  // namespace

std::int64_t ulp_distance(DType t, float a, float b) {
  std::int64_t oa = 0;
  std::int64_t ob = 0;
  switch (t) {
    case DType::f32:
      oa = ordinal(std::bit_cast<std::uint32_t>(a), 0x80000000u);
      ob = ordinal(std::bit_cast<std::uint32_t>(b), 0x80000000u);
      break;
    case DType::f16:
      oa = ordinal(f32_to_f16_bits(a), 0x8000u);
      ob = ordinal(f32_to_f16_bits(b), 0x8000u);
      break;
    case DType::bf16:
      oa = ordinal(f32_to_bf16_bits(a), 0x8000u);
      ob = ordinal(f32_to_bf16_bits(b), 0x8000u);
      break;
  }
  return std::llabs(oa - ob);
}

}  // namespace readapt
