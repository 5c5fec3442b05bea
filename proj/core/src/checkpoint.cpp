// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/checkpoint.hpp"

#include <algorithm>

#include "readapt/digest.hpp"
#include "readapt/errors.hpp"

namespace readapt {

void Checkpoint::add(NamedTensor tensor) {
  if (index_.count(tensor.name()) != 0) {
    throw Error("duplicate tensor name: " + tensor.name());
  }
  auto pos = std::lower_bound(
      tensors_.begin(), tensors_.end(), tensor.name(),
      [](const NamedTensor& t, const std::string& name) {
        return t.name() < name;
      });
  tensors_.insert(pos, std::move(tensor));
  reindex();
}

void Checkpoint::put(NamedTensor tensor) {
  auto it = index_.find(tensor.name());
  if (it != index_.end()) {
    tensors_[it->second] = std::move(tensor);
    return;
  }
  add(std::move(tensor));
}

bool Checkpoint::has(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

const NamedTensor& Checkpoint::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error("no tensor named '" + std::string(name) + "' in checkpoint");
  }
  return tensors_[it->second];
}

NamedTensor& Checkpoint::get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error("no tensor named '" + std::string(name) + "' in checkpoint");
  }
  return tensors_[it->second];
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.push_back(t.name());
  return out;
}

size_t Checkpoint::total_bytes() const {
  size_t total = 0;
  for (const auto& t : tensors_) total += t.bytes().size();
  return total;
}

std::string Checkpoint::digest() const {
  Sha256 h;
  for (const auto& t : tensors_) h.update(t.bytes());
  return h.hex_digest();
}

void Checkpoint::reindex() {
  index_.clear();
  index_.reserve(tensors_.size());
  for (size_t i = 0; i < tensors_.size(); ++i) {
    index_.emplace(tensors_[i].name(), i);
  }
}

}  // namespace readapt
