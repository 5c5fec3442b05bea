// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "readapt/delta.hpp"
#include "readapt/tensor.hpp"

namespace readapt {

// Singular-value spectrum of one delta tensor plus the cumulative explained
// variance curve v_k = (sum of the top-k squared singular values) / (sum of
// all squared singular values), 1-indexed with v_0 defined as 0.
struct Spectrum {
  std::string tensor_name;
  std::vector<double> singular_values;
  std::vector<double> cumulative_variance;
};

// Throws AllZero when every singular value is zero (variance undefined).
std::vector<double> explained_variance(const std::vector<double>& s);

// Smallest 1-based k with v_k >= tau; clamps to the full rank, which always
// satisfies tau <= 1.
std::size_t select_rank(const std::vector<double>& v, double tau);

Spectrum spectrum_of(const NamedTensor& matrix);

// One compressed 2-D tensor: delta ~= factor_b * factor_a with factor_b of
// shape m x k and factor_a of shape k x n, both float32.
struct LowRankFactor {
  std::string name;
  std::int64_t rank = 0;
  NamedTensor factor_b;
  NamedTensor factor_a;
  double retained_variance = 0.0;
};

// A compressed RE-Adapter: truncated-SVD factors for the compressible 2-D
// tensors, everything else kept dense. Factor and dense name sets are
// disjoint and together cover the source adapter's names.
struct LoreAdapter {
  std::map<std::string, LowRankFactor> factors;
  Checkpoint dense;
  double tau = 0.0;
  std::string base_digest;
  std::string instruct_digest;
  std::map<std::string, std::string> metadata;
};

struct CompressOptions {
  double tau = 0.5;
  // 2-D tensors whose smaller dimension is below this stay dense.
  std::int64_t min_dim = 2;
  // Keep a tensor dense when k(m+n) >= mn, i.e. when factoring would not
  // save storage. Disable only for testing reconstruction identities.
  bool storage_guard = true;
  // Use the deterministic dense SVD when min(m,n) <= this; larger matrices
  // go through the randomized solver.
  std::int64_t dense_max_dim = 512;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

// Per-tensor truncated SVD at the cumulative-explained-variance threshold
// tau. Factors use the symmetric split B = U_k sqrt(S_k),
// A = sqrt(S_k) Vt_k.
LoreAdapter compress(const DeltaAdapter& delta,
                     const CompressOptions& opts = {});

// Expands factors back to dense tensors; dense entries pass through.
DeltaAdapter materialize(const LoreAdapter& lore, unsigned threads = 0);

// Storage accounting: factored tensors cost k(m+n) parameters, dense ones
// their element count; the percentage is relative to the base checkpoint's
// total element count.
struct ParamReport {
  struct Row {
    std::string name;
    std::int64_t rank = 0;  // 0 for dense entries
    std::uint64_t params = 0;
    double retained_variance = 1.0;
  };
  std::uint64_t lore_params = 0;
  std::uint64_t base_params = 0;
  double percent_of_base = 0.0;
  std::vector<Row> rows;
};

ParamReport param_report(const LoreAdapter& lore, const Checkpoint& base);

// Compresses the same delta at each tau and reports the resulting
// parameter percentage; the curve is monotone non-decreasing in tau.
std::vector<std::pair<double, double>> tau_sweep(const DeltaAdapter& delta,
                                                 const std::vector<double>& taus,
                                                 const Checkpoint& base,
                                                 CompressOptions opts = {});

// CSV writers. Spectrum rows are "index,variance"; sweep rows are
// "tau,percent".
void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum);
void write_tau_sweep_csv(std::ostream& os,
                         const std::vector<std::pair<double, double>>& rows);

// Container serialization: factors stored as "<name>.lore_b" /
// "<name>.lore_a", dense tensors verbatim; tau and per-tensor retained
// variance recorded in the metadata map.
void save_lore(const LoreAdapter& lore, const std::filesystem::path& path);
LoreAdapter load_lore(const std::filesystem::path& path);

}  // namespace readapt
