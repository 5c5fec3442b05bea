// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "readapt/delta.hpp"
#include "readapt/spectra.hpp"

namespace readapt {

enum class TermKind { dense_delta, lore };

// One additive term of a merge: an adapter file plus its partial-adaptation
// scale (alpha for knowledge adapters, beta for instruction adapters).
struct MergeTerm {
  std::filesystem::path path;
  double scale = 0.5;
  TermKind kind = TermKind::dense_delta;
};

struct MergeRecipe {
  std::filesystem::path base;
  std::vector<MergeTerm> terms;
  // When unset, every tensor keeps the base's dtype and untouched tensors
  // pass through bitwise; when set, everything is re-encoded.
  std::optional<DType> out_dtype;
  bool verify_digests = false;
  // Scales outside [0,1] are rejected unless explicitly allowed.
  bool allow_out_of_range = false;
};

// Recipe file: JSON {"base": path, "terms": [{"path","scale","kind"}],
// "dtype": optional}. Relative paths resolve against the recipe file's
// directory.
MergeRecipe parse_recipe_file(const std::filesystem::path& path);

// In-memory composition: per tensor a single float32 accumulation of
// base + sum(scale_i * delta_i), then one encode to the output dtype.
// Tensors no term touches (or touched only at scale 0 with default dtype)
// pass through bitwise.
Checkpoint compose(
    const Checkpoint& base,
    const std::vector<std::pair<const DeltaAdapter*, double>>& terms,
    std::optional<DType> out_dtype = {}, bool verify_digests = false,
    unsigned threads = 0);

// Loads everything a recipe references (materializing lore terms) and
// composes. Validates scale ranges per the recipe's allow_out_of_range.
Checkpoint compose(const MergeRecipe& recipe, unsigned threads = 0);

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::filesystem::path path;
  std::size_t tensor_count = 0;
  std::string digest;
};

// Writes one merged checkpoint per (alpha, beta) grid point into out_dir
// plus a manifest.csv, and returns the manifest rows. Either adapter may be
// null; its grid is then pinned to {0}.
std::vector<SweepRow> sweep(const Checkpoint& base,
                            const DeltaAdapter* knowledge,
                            const DeltaAdapter* re_adapter,
                            std::vector<double> alpha_grid,
                            std::vector<double> beta_grid,
                            const std::filesystem::path& out_dir,
                            unsigned threads = 0);

// Manifest columns: alpha,beta,path,tensor_count,digest.
void write_sweep_manifest(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace readapt
