// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
//
// Hot inner loops of the weight arithmetic: dtype transcoding and the fused
// scaled add that every merge reduces to.

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "readapt/dtype.hpp"
#include "readapt/tensor.hpp"

namespace {

using namespace readapt;

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::vector<float> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

NamedTensor square(std::size_t dim, DType dtype, std::uint64_t seed) {
  auto vals = random_floats(dim * dim, seed);
  return NamedTensor::from_floats(
      "w", {static_cast<std::int64_t>(dim), static_cast<std::int64_t>(dim)},
      dtype, vals);
}

void BM_AddScaledF32(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto a = square(dim, DType::f32, 1);
  auto b = square(dim, DType::f32, 2);
  for (auto _ : state) {
    auto out = add_scaled(a, b, 0.5f);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(dim * dim));
}
BENCHMARK(BM_AddScaledF32)->Arg(64)->Arg(256)->Arg(1024);

void BM_AddScaledBf16(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto a = square(dim, DType::bf16, 1);
  auto b = square(dim, DType::bf16, 2);
  for (auto _ : state) {
    auto out = add_scaled(a, b, 0.5f);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(dim * dim));
}
BENCHMARK(BM_AddScaledBf16)->Arg(64)->Arg(256)->Arg(1024);

void BM_EncodeF16(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto vals = random_floats(n, 3);
  for (auto _ : state) {
    auto t = NamedTensor::from_floats(
        "x", {static_cast<std::int64_t>(n)}, DType::f16, vals);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EncodeF16)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

void BM_DecodeF16(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto vals = random_floats(n, 4);
  auto t = NamedTensor::from_floats("x", {static_cast<std::int64_t>(n)},
                                    DType::f16, vals);
  for (auto _ : state) {
    auto decoded = t.to_floats();
    benchmark::DoNotOptimize(decoded);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DecodeF16)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
