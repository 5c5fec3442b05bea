// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "readapt/tensor.hpp"

namespace readapt {

// An in-memory model checkpoint: a set of uniquely named tensors plus a
// free-form string metadata map. Tensors are kept in lexicographic name
// order so that serialization, sharding and digests are deterministic.
class Checkpoint {
 public:
  Checkpoint() = default;

  // Inserts a tensor; throws Error if the name is already present.
  void add(NamedTensor tensor);
  // Replaces an existing tensor of the same name, or inserts a new one.
  void put(NamedTensor tensor);

  bool has(std::string_view name) const;
  const NamedTensor& get(std::string_view name) const;
  NamedTensor& get(std::string_view name);

  size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }

  // Tensors in lexicographic name order.
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  std::vector<std::string> names() const;

  // Sum of raw tensor payload sizes in bytes.
  size_t total_bytes() const;

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const {
    return metadata_;
  }

  // SHA-256 over the raw tensor payloads concatenated in name order.
  // Metadata does not contribute, so the digest identifies the weights.
  std::string digest() const;

 private:
  void reindex();

  std::vector<NamedTensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace readapt
