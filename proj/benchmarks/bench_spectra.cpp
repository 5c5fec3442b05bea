// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
//
// Compression cost: the deterministic dense SVD against the randomized
// range finder at growing matrix sizes.

#include <cstdint>
#include <random>

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "readapt/spectra.hpp"
#include "readapt/svd.hpp"

namespace {

using namespace readapt;

Eigen::MatrixXd low_rank_plus_noise(int dim, int rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd u(dim, rank), v(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) {
      u(i, j) = dist(rng);
      v(i, j) = dist(rng);
    }
  }
  Eigen::MatrixXd noise(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) noise(i, j) = 0.01 * dist(rng);
  return u * v.transpose() + noise;
}

void BM_DenseSvd(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  auto a = low_rank_plus_noise(dim, 16, 11);
  for (auto _ : state) {
    auto r = dense_svd(a);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_DenseSvd)->Arg(64)->Arg(128)->Arg(256)->Unit(
    benchmark::kMillisecond);

void BM_RandomizedSvd(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  auto a = low_rank_plus_noise(dim, 16, 12);
  RandomizedSvdOptions opts;
  opts.seed = 42;
  for (auto _ : state) {
    auto r = randomized_svd(a, 32, opts);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_RandomizedSvd)->Arg(256)->Arg(512)->Arg(1024)->Unit(
    benchmark::kMillisecond);

void BM_CompressDelta(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  DeltaAdapter delta;
  for (int i = 0; i < 4; ++i) {
    auto m = low_rank_plus_noise(dim, 8, 100 + static_cast<std::uint64_t>(i));
    delta.tensors.add(from_matrix("block." + std::to_string(i) + ".weight",
                                  m));
  }
  CompressOptions opts;
  opts.tau = 0.9;
  for (auto _ : state) {
    auto lore = compress(delta, opts);
    benchmark::DoNotOptimize(lore);
  }
}
BENCHMARK(BM_CompressDelta)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
