// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/svd.hpp"

#include <algorithm>
#include <random>

#include "readapt/errors.hpp"

namespace readapt {

SvdResult dense_svd(const Eigen::MatrixXd& a, const std::string& label) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(a,
                                        Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("svd failed to converge" +
                             (label.empty() ? std::string()
                                            : " for tensor '" + label + "'"));
  }
  SvdResult r;
  r.u = solver.matrixU();
  r.s = solver.singularValues();
  r.vt = solver.matrixV().transpose();
  return r;
}

SvdResult randomized_svd(const Eigen::MatrixXd& a, int rank,
                         const RandomizedSvdOptions& opts,
                         const std::string& label) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index min_dim = std::min(m, n);
  rank = static_cast<int>(std::min<Eigen::Index>(std::max(rank, 1), min_dim));
  const Eigen::Index sketch =
      std::min<Eigen::Index>(rank + std::max(opts.oversample, 0), min_dim);

  // A sketch as wide as the matrix buys nothing; use the exact path.
  if (sketch >= min_dim) {
    SvdResult full = dense_svd(a, label);
    SvdResult r;
    r.u = full.u.leftCols(rank);
    r.s = full.s.head(rank);
    r.vt = full.vt.topRows(rank);
    return r;
  }

  std::mt19937_64 eng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd omega(n, sketch);
  for (Eigen::Index j = 0; j < sketch; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = gauss(eng);
  }

  auto thin_q = [](const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return Eigen::MatrixXd(qr.householderQ() *
                           Eigen::MatrixXd::Identity(y.rows(), y.cols()));
  };

  Eigen::MatrixXd q = thin_q(a * omega);
  for (int it = 0; it < opts.power_iterations; ++it) {
    const Eigen::MatrixXd z = thin_q(a.transpose() * q);
    q = thin_q(a * z);
  }

  // Exact SVD of the small projection Q^T A; singular values of the
  // projection never exceed those of A.
  const Eigen::MatrixXd b = q.transpose() * a;
  SvdResult small = dense_svd(b, label);
  SvdResult r;
  r.u = q * small.u.leftCols(rank);
  r.s = small.s.head(rank);
  r.vt = small.vt.topRows(rank);
  return r;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name) {
  // FNV-1a over the tensor name, then a splitmix64 finalization of the
  // hash xor'ed with the global seed.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = h ^ (global_seed + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SvdResult svd(const NamedTensor& matrix) {
  if (!matrix.is_matrix()) {
    throw ShapeMismatch("svd requires a rank-2 tensor; '" + matrix.name() +
                        "' has rank " +
                        std::to_string(matrix.shape().size()));
  }
  return dense_svd(to_matrix(matrix), matrix.name());
}

Eigen::MatrixXd to_matrix(const NamedTensor& t) {
  if (!t.is_matrix()) {
    throw ShapeMismatch("expected a rank-2 tensor, got '" + t.name() + "'");
  }
  const std::vector<float> vals = t.to_floats();
  Eigen::MatrixXd m(t.rows(), t.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = vals[static_cast<size_t>(i) * m.cols() + j];
    }
  }
  return m;
}

NamedTensor from_matrix(std::string name, const Eigen::MatrixXd& m,
                        DType dtype) {
  std::vector<float> vals(static_cast<size_t>(m.rows()) * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      vals[static_cast<size_t>(i) * m.cols() + j] =
          static_cast<float>(m(i, j));
    }
  }
  return NamedTensor::from_floats(std::move(name), {m.rows(), m.cols()},
                                  dtype, vals);
}

}  // namespace readapt
