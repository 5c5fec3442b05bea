// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "readapt/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor buffers are little-endian on disk and in memory");

namespace readapt {

namespace {

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) n *= d;
  return n;
}

void check_shape(const std::string& name,
                 const std::vector<std::int64_t>& shape) {
  for (std::int64_t d : shape) {
    if (d <= 0) {
      throw FormatError("tensor '" + name + "': non-positive dimension " +
                        std::to_string(d));
    }
  }
}

}  // namespace

NamedTensor::NamedTensor(std::string name, std::vector<std::int64_t> shape,
                         DType dtype, std::vector<std::byte> data)
    : name_(std::move(name)),
      shape_(std::move(shape)),
      dtype_(dtype),
      data_(std::move(data)) {
  if (name_.empty()) throw FormatError("tensor with empty name");
  check_shape(name_, shape_);
  const std::size_t expected =
      static_cast<std::size_t>(shape_product(shape_)) * dtype_size(dtype_);
  if (data_.size() != expected) {
    throw FormatError("tensor '" + name_ + "': buffer holds " +
                      std::to_string(data_.size()) + " bytes, shape needs " +
                      std::to_string(expected));
  }
}

NamedTensor NamedTensor::from_floats(std::string name,
                                     std::vector<std::int64_t> shape,
                                     DType dtype,
                                     std::span<const float> values) {
  std::vector<std::byte> data(values.size() * dtype_size(dtype));
  switch (dtype) {
    case DType::f32:
      std::memcpy(data.data(), values.data(), data.size());
      break;
    case DType::f16: {
      auto* out = reinterpret_cast<std::uint16_t*>(data.data());
      for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = f32_to_f16_bits(values[i]);
      break;
    }
    case DType::bf16: {
      auto* out = reinterpret_cast<std::uint16_t*>(data.data());
      for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = f32_to_bf16_bits(values[i]);
      break;
    }
  }
  return NamedTensor(std::move(name), std::move(shape), dtype,
                     std::move(data));
}

NamedTensor NamedTensor::filled(std::string name,
                                std::vector<std::int64_t> shape, DType dtype,
                                float value) {
  std::vector<float> values(static_cast<std::size_t>(shape_product(shape)),
                            value);
  return from_floats(std::move(name), std::move(shape), dtype, values);
}

std::int64_t NamedTensor::element_count() const {
  return shape_product(shape_);
}

std::vector<float> NamedTensor::to_floats() const {
  const std::size_t n = static_cast<std::size_t>(element_count());
  std::vector<float> out(n);
  switch (dtype_) {
    case DType::f32:
      std::memcpy(out.data(), data_.data(), data_.size());
      break;
    case DType::f16: {
      const auto* in = reinterpret_cast<const std::uint16_t*>(data_.data());
      for (std::size_t i = 0; i < n; ++i) out[i] = f16_bits_to_f32(in[i]);
      break;
    }
    case DType::bf16: {
      const auto* in = reinterpret_cast<const std::uint16_t*>(data_.data());
      for (std::size_t i = 0; i < n; ++i) out[i] = bf16_bits_to_f32(in[i]);
      break;
    }
  }
  return out;
}

float NamedTensor::value_at(std::int64_t i) const {
  switch (dtype_) {
    case DType::f32: {
      float v;
      std::memcpy(&v, data_.data() + i * 4, 4);
      return v;
    }
    case DType::f16: {
      std::uint16_t b;
      std::memcpy(&b, data_.data() + i * 2, 2);
      return f16_bits_to_f32(b);
    }
    case DType::bf16: {
      std::uint16_t b;
      std::memcpy(&b, data_.data() + i * 2, 2);
      return bf16_bits_to_f32(b);
    }
  }
  return 0.0f;
}

NamedTensor NamedTensor::renamed(std::string new_name) const {
  return NamedTensor(std::move(new_name), shape_, dtype_, data_);
}

namespace {

void require_same_shape(const NamedTensor& a, const NamedTensor& b,
                        const char* op) {
  if (a.shape() != b.shape()) {
    auto fmt = [](const std::vector<std::int64_t>& s) {
      std::string r = "(";
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) r += ",";
        r += std::to_string(s[i]);
      }
      return r + ")";
    };
    throw ShapeMismatch(std::string(op) + ": '" + a.name() + "' " +
                        fmt(a.shape()) + " vs '" + b.name() + "' " +
                        fmt(b.shape()));
  }
}

}  // namespace

NamedTensor add_scaled(const NamedTensor& a, const NamedTensor& b,
                       float scale) {
  require_same_shape(a, b, "add_scaled");
  std::vector<float> av = a.to_floats();
  if (scale != 0.0f) {
    const std::vector<float> bv = b.to_floats();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += scale * bv[i];
  }
  return NamedTensor::from_floats(a.name(), a.shape(), a.dtype(), av);
}

NamedTensor subtract(const NamedTensor& a, const NamedTensor& b) {
  require_same_shape(a, b, "subtract");
  std::vector<float> av = a.to_floats();
  const std::vector<float> bv = b.to_floats();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] -= bv[i];
  return NamedTensor::from_floats(a.name(), a.shape(), DType::f32, av);
}

double frobenius_norm(const NamedTensor& t) {
  double acc = 0.0;
  for (float v : t.to_floats()) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

NamedTensor cast(const NamedTensor& t, DType dtype) {
  return NamedTensor::from_floats(t.name(), t.shape(), dtype, t.to_floats());
}

}  // namespace readapt
