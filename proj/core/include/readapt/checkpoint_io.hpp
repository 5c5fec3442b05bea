// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "readapt/checkpoint.hpp"

namespace readapt {

// Result of comparing two checkpoints for architecture alignment.
// `missing_in_a` holds names present only in the second argument, and
// vice versa; the four lists partition the union of both name sets.
struct AlignmentReport {
  struct ShapeMismatchEntry {
    std::string name;
    std::vector<std::int64_t> shape_a;
    std::vector<std::int64_t> shape_b;
  };

  std::vector<std::string> matched;
  std::vector<std::string> missing_in_a;
  std::vector<std::string> missing_in_b;
  std::vector<ShapeMismatchEntry> shape_mismatches;

  // A pair is diffable when only `matched` is populated.
  bool diffable() const {
    return missing_in_a.empty() && missing_in_b.empty() &&
           shape_mismatches.empty();
  }
  std::string summary() const;
};

// Loads a checkpoint from a single container file, a shard-index manifest
// (*.index.json), or a directory containing either. Tensors end up in
// lexicographic name order regardless of on-disk layout.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Saves a checkpoint. Without max_shard_bytes a single container file is
// written at `path`. With it, `path` is a directory receiving greedily
// first-fit-packed shards (in tensor name order) named
// model-0000i-of-0000n.safetensors plus a model.safetensors.index.json
// manifest. Throws ShardTooSmall when one tensor alone exceeds the cap.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                     std::optional<std::uint64_t> max_shard_bytes = {});

// Compares name/shape sets. Never throws on mismatches; problems are
// reported, not raised.
AlignmentReport validate_pair(const Checkpoint& a, const Checkpoint& b);

}  // namespace readapt
