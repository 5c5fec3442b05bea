// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "readapt/checkpoint.hpp"
#include "readapt/checkpoint_io.hpp"
#include "readapt/errors.hpp"

namespace readapt {

// Raised when extract_delta is asked to diff two checkpoints that are not
// architecture-aligned (and skipping was not requested). Carries the full
// report so callers can print what exactly disagreed.
class NotDiffable : public Error {
 public:
  explicit NotDiffable(AlignmentReport report)
      : Error("checkpoints are not diffable: " + report.summary()),
        report_(std::move(report)) {}
  const AlignmentReport& report() const { return report_; }

 private:
  AlignmentReport report_;
};

// A dense additive adapter: one float32 difference tensor per matched base
// tensor, plus provenance digests of the checkpoints it was extracted from.
struct DeltaAdapter {
  Checkpoint tensors;
  std::string base_digest;
  std::string instruct_digest;
  std::map<std::string, std::string> metadata;
};

// Computes instruct - base per matched tensor. Strict by default: any
// missing tensor or shape mismatch raises NotDiffable. With skip_unmatched,
// only the matched intersection is diffed.
DeltaAdapter extract_delta(const Checkpoint& base, const Checkpoint& instruct,
                           bool skip_unmatched = false, unsigned threads = 0);

// base + scale * delta, per tensor, in float32, re-encoded to each base
// tensor's dtype. Base tensors the adapter does not name pass through
// unchanged; scale == 0 returns the base bitwise. With verify_digest, the
// base checkpoint's digest must equal delta.base_digest.
Checkpoint apply_delta(const Checkpoint& base, const DeltaAdapter& delta,
                       float scale, bool verify_digest = false,
                       unsigned threads = 0);

// DeltaAdapter container serialization. Metadata keys written: kind
// ("re-adapter"), base_digest, instruct_digest, version, plus any
// user-supplied entries.
void save_delta(const DeltaAdapter& delta, const std::filesystem::path& path);
DeltaAdapter load_delta(const std::filesystem::path& path);

}  // namespace readapt
