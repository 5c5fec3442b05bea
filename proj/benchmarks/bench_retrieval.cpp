// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
//
// Retrieval and scoring throughput on synthetic corpora.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "readapt/evalkit.hpp"
#include "readapt/retrieval.hpp"

namespace {

using namespace readapt;

std::vector<std::string> make_vocab(std::size_t n) {
  std::vector<std::string> vocab(n);
  for (std::size_t i = 0; i < n; ++i) vocab[i] = "w" + std::to_string(i);
  return vocab;
}

std::string random_text(std::mt19937_64& rng,
                        const std::vector<std::string>& vocab, int words) {
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

std::vector<Passage> make_corpus(std::size_t docs, int words_per_doc) {
  auto vocab = make_vocab(2000);
  std::mt19937_64 rng(5);
  std::vector<Passage> corpus;
  corpus.reserve(docs);
  for (std::size_t i = 0; i < docs; ++i) {
    corpus.push_back({"p" + std::to_string(i),
                      random_text(rng, vocab, words_per_doc)});
  }
  return corpus;
}

void BM_Bm25Build(benchmark::State& state) {
  auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)), 80);
  for (auto _ : state) {
    auto index = Bm25Index::build(corpus);
    benchmark::DoNotOptimize(index);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bm25Build)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Bm25Query(benchmark::State& state) {
  auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)), 80);
  auto index = Bm25Index::build(corpus);
  auto vocab = make_vocab(2000);
  std::mt19937_64 rng(7);
  for (auto _ : state) {
    auto hits = index.query(random_text(rng, vocab, 8), 10);
    benchmark::DoNotOptimize(hits);
  }
}
BENCHMARK(BM_Bm25Query)->Arg(1000)->Arg(10000);

void BM_RougeLRecall(benchmark::State& state) {
  auto vocab = make_vocab(50);
  std::mt19937_64 rng(9);
  auto reference = random_text(rng, vocab, static_cast<int>(state.range(0)));
  auto response = random_text(rng, vocab, 4 * static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double r = rouge_l_recall(reference, response);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_RougeLRecall)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
