// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "readapt/tensor.hpp"

namespace readapt {

// Thin SVD factors in float64: a = u * s.asDiagonal() * vt, with u of size
// m x r, s descending of length r, vt of size r x n.
struct SvdResult {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd vt;
};

// Deterministic dense thin SVD (divide-and-conquer). `label` names the
// tensor in a ConvergenceFailure message.
SvdResult dense_svd(const Eigen::MatrixXd& a, const std::string& label = {});

struct RandomizedSvdOptions {
  int oversample = 10;
  int power_iterations = 2;
  std::uint64_t seed = 0;
};

// Halko-style randomized thin SVD of rank `rank`: Gaussian sketch, QR range
// finder, power iterations, then an exact SVD of the small projected matrix.
// Every returned singular value is <= the corresponding exact one, so
// variance-threshold decisions made on these values are conservative.
// Falls back to dense_svd when the sketch would not be smaller than the
// matrix.
SvdResult randomized_svd(const Eigen::MatrixXd& a, int rank,
                         const RandomizedSvdOptions& opts = {},
                         const std::string& label = {});

// Per-tensor seed derivation (FNV-1a of the name, mixed with the global
// seed) so parallel compression runs are reproducible.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name);

// Front door for rank-2 tensors; computation happens in float64.
SvdResult svd(const NamedTensor& matrix);

// Row-major decode of a rank-2 tensor into a float64 matrix and back.
Eigen::MatrixXd to_matrix(const NamedTensor& t);
NamedTensor from_matrix(std::string name, const Eigen::MatrixXd& m,
                        DType dtype = DType::f32);

}  // namespace readapt
