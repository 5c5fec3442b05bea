// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "readapt/delta.hpp"
#include "readapt/tensor.hpp"

namespace readapt {

// One LoRA-adapted module: the target's weight tensor name plus the low-rank
// pair. a is r x n, b is m x r, and b*a must match the target's m x n shape.
struct LoraModule {
  std::string target_name;
  NamedTensor a;
  NamedTensor b;
  std::int64_t rank = 0;
  double alpha = 0.0;
  double dropout = 0.0;  // training-time metadata, unused at merge time
};

// DoRA adds a per-slice magnitude vector on top of the LoRA pair. The
// magnitude's length picks the normalization axis: whichever weight axis
// has that length is sliced, and each slice is renormalized.
struct DoraModule {
  LoraModule lora;
  NamedTensor magnitude;
};

// Dense LoRA update: (alpha / r) * b * a, float32, named after the target.
NamedTensor densify_lora(const LoraModule& mod);

// Dense DoRA update against the pretrained weight W:
//   V' = W + (alpha/r) b a;  W' = m ⊙ V'/|V'|  (per magnitude slice);
//   returns W' - W in float32.
// Throws DegenerateColumn when a slice of V' has numerically zero norm.
NamedTensor densify_dora(const DoraModule& mod, const NamedTensor& base_tensor);

// A parsed adapter directory: config values plus one module per adapted
// target. Exactly one of `lora` / `dora` is populated, per use_dora.
struct PeftAdapter {
  std::int64_t rank = 0;
  double alpha = 0.0;
  double dropout = 0.0;
  bool use_dora = false;
  std::vector<std::string> target_patterns;
  std::vector<LoraModule> lora;
  std::vector<DoraModule> dora;

  std::size_t module_count() const {
    return use_dora ? dora.size() : lora.size();
  }
};

// Reads adapter_config.json + adapter_model.safetensors. Tensor names may
// carry the conventional "base_model.model." prefix; it is stripped. Every
// config target pattern must match at least one module in the weights, or
// UnresolvedTarget is thrown naming the pattern.
PeftAdapter load_peft_dir(const std::filesystem::path& dir);

// Densifies every module against the base checkpoint into a dense adapter
// (the knowledge adapter). Module targets absent from the base raise
// UnresolvedTarget.
DeltaAdapter densify_adapter(const PeftAdapter& adapter, const Checkpoint& base,
                             unsigned threads = 0);

}  // namespace readapt
