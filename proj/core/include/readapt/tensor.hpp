// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "readapt/dtype.hpp"

namespace readapt {

// A named, shaped, dtype-tagged dense array. Data is a contiguous row-major
// little-endian buffer in the storage dtype. Immutable after construction
// and safe to share across threads.
class NamedTensor {
 public:
  NamedTensor() = default;
  // Throws FormatError when the name is empty, a dimension is not positive,
  // or the buffer size does not match shape x dtype width.
  NamedTensor(std::string name, std::vector<std::int64_t> shape, DType dtype,
              std::vector<std::byte> data);

  // Encodes float32 values into the storage dtype (round-to-nearest-even
  // for the 16-bit formats).
  static NamedTensor from_floats(std::string name,
                                 std::vector<std::int64_t> shape, DType dtype,
                                 std::span<const float> values);
  static NamedTensor filled(std::string name, std::vector<std::int64_t> shape,
                            DType dtype, float value);

  const std::string& name() const { return name_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  std::span<const std::byte> bytes() const { return data_; }
  std::size_t byte_size() const { return data_.size(); }
  std::int64_t element_count() const;

  bool is_matrix() const { return shape_.size() == 2; }
  std::int64_t rows() const { return shape_.at(0); }
  std::int64_t cols() const { return shape_.at(1); }

  // Decodes the buffer into float32.
  std::vector<float> to_floats() const;
  // Decoded single element (linear row-major index); for small fixtures.
  float value_at(std::int64_t i) const;

  NamedTensor renamed(std::string new_name) const;

 private:
  std::string name_;
  std::vector<std::int64_t> shape_;
  DType dtype_ = DType::f32;
  std::vector<std::byte> data_;
};

// result[i] = a[i] + scale * b[i], accumulated in float32, stored in
// a's dtype under a's name. scale == 0 is an exact re-encode of a.
// Throws ShapeMismatch when shapes differ.
NamedTensor add_scaled(const NamedTensor& a, const NamedTensor& b, float scale);

// result[i] = a[i] - b[i] in float32; the result is stored as float32 so
// downstream SVD sees the unquantized difference.
NamedTensor subtract(const NamedTensor& a, const NamedTensor& b);

// sqrt(sum of squares), accumulated in float64.
double frobenius_norm(const NamedTensor& t);

NamedTensor cast(const NamedTensor& t, DType dtype);

}  // namespace readapt
