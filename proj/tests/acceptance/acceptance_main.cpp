// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Each criterion prints exactly one [PASS]/[FAIL] line;
// the binary exits nonzero if any required criterion fails. The last check
// needs a real pretrained/instruct checkpoint pair and is skipped unless
// READAPT_REAL_MODEL_BASE and READAPT_REAL_MODEL_INSTRUCT are set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "readapt/checkpoint_io.hpp"
#include "readapt/delta.hpp"
#include "readapt/evalkit.hpp"
#include "readapt/merge.hpp"
#include "readapt/peft.hpp"
#include "readapt/retrieval.hpp"
#include "readapt/spectra.hpp"
#include "readapt/svd.hpp"
#include "readapt/tensor.hpp"

#include "../testutil.hpp"

namespace {

using namespace readapt;
namespace tu = readapt::testutil;

struct Failure {
  std::string what;
};

#define REQUIRE(cond, msg)                  \
  do {                                      \
    if (!(cond)) {                          \
      std::ostringstream os_;               \
      os_ << msg;                           \
      throw ::Failure{os_.str()};           \
    }                                       \
  } while (0)

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

int g_failures = 0;

void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    std::cout << "[PASS] " << name << "\n";
  } catch (const Failure& f) {
    ++g_failures;
    std::cout << "[FAIL] " << name << ": " << f.what << "\n";
  } catch (const std::exception& e) {
    ++g_failures;
    std::cout << "[FAIL] " << name << ": unexpected exception: " << e.what()
              << "\n";
  }
}

// ---------------------------------------------------------------------------
// Small numeric helpers.

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

Eigen::MatrixXd random_orthonormal(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXd g = gaussian(rng, rows, cols);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
         Eigen::MatrixXd::Identity(rows, cols);
}

// Matrix with a planted geometric singular spectrum s_i = top * decay^i.
Eigen::MatrixXd planted_spectrum(std::mt19937_64& rng, int m, int n,
                                 double top, double decay) {
  int r = std::min(m, n);
  Eigen::MatrixXd qu = random_orthonormal(rng, m, r);
  Eigen::MatrixXd qv = random_orthonormal(rng, n, r);
  Eigen::VectorXd s(r);
  for (int i = 0; i < r; ++i) s[i] = top * std::pow(decay, i);
  return qu * s.asDiagonal() * qv.transpose();
}

// ---------------------------------------------------------------------------
// 1. Round-trip identity.

void check_round_trip() {
  Stopwatch timer;
  std::mt19937_64 rng(101);
  for (int c = 0; c < 50; ++c) {
    auto base = tu::random_checkpoint(rng, 6, 64, {DType::f32, DType::bf16});
    auto instruct = tu::perturbed_checkpoint(rng, base);
    auto delta = extract_delta(base, instruct);
    auto rebuilt = apply_delta(base, delta, 1.0f);
    for (const auto& want : instruct.tensors()) {
      const auto& got = rebuilt.get(want.name());
      REQUIRE(got.dtype() == want.dtype(),
              "dtype changed for " << want.name());
      auto wv = want.to_floats();
      auto gv = got.to_floats();
      for (std::size_t i = 0; i < wv.size(); ++i) {
        auto ulps = ulp_distance(want.dtype(), wv[i], gv[i]);
        REQUIRE(ulps <= 1, "checkpoint " << c << " tensor " << want.name()
                                         << "[" << i << "] off by " << ulps
                                         << " ulps");
      }
    }
  }
  REQUIRE(timer.seconds() < 10.0,
          "took " << timer.seconds() << " s (budget 10 s)");
}

// ---------------------------------------------------------------------------
// 2. Partial-adaptation endpoints.

void check_endpoints() {
  std::mt19937_64 rng(202);

  // beta = 0 and beta = 1 across all storage dtypes.
  auto base = tu::random_checkpoint(rng, 8, 24,
                                    {DType::f32, DType::f16, DType::bf16});
  auto instruct = tu::perturbed_checkpoint(rng, base);
  auto delta = extract_delta(base, instruct);

  auto at0 = compose(base, {{&delta, 0.0}});
  REQUIRE(at0.digest() == base.digest(), "beta=0 is not bitwise the base");

  auto at1 = compose(base, {{&delta, 1.0}});
  for (const auto& want : instruct.tensors()) {
    auto wv = want.to_floats();
    auto gv = at1.get(want.name()).to_floats();
    for (std::size_t i = 0; i < wv.size(); ++i) {
      auto ulps = ulp_distance(want.dtype(), wv[i], gv[i]);
      REQUIRE(ulps <= 1, "beta=1 tensor " << want.name() << "[" << i
                                          << "] off by " << ulps << " ulps");
    }
  }

  // beta = 0.5 on the float32 path. The fine-tune-sized update keeps every
  // rounding error proportional to the midpoint, so the relative bound
  // holds at any magnitude.
  auto f32_base_pos = tu::random_checkpoint(rng, 8, 24, {DType::f32});
  auto f32_instruct = tu::perturbed_checkpoint(rng, f32_base_pos);
  auto d32 = extract_delta(f32_base_pos, f32_instruct);
  auto mid = compose(f32_base_pos, {{&d32, 0.5}});
  for (const auto& bt : f32_base_pos.tensors()) {
    auto bv = bt.to_floats();
    auto iv = f32_instruct.get(bt.name()).to_floats();
    auto gv = mid.get(bt.name()).to_floats();
    for (std::size_t i = 0; i < bv.size(); ++i) {
      double want = 0.5 * (static_cast<double>(bv[i]) + iv[i]);
      REQUIRE(std::abs(gv[i] - want) <= 1e-6 * std::abs(want),
              "beta=0.5 tensor " << bt.name() << "[" << i << "]: got "
                                 << gv[i] << " want " << want);
    }
  }
}

// ---------------------------------------------------------------------------
// 3. Eckart-Young property of the truncated SVD.

void check_eckart_young() {
  Stopwatch timer;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> dim(8, 64);
  const std::vector<int> ranks = {1, 2, 4};

  for (int trial = 0; trial < 100; ++trial) {
    int m = dim(rng);
    int n = dim(rng);
    Eigen::MatrixXd a = gaussian(rng, m, n);
    double total = a.squaredNorm();
    auto svd = dense_svd(a);
    std::vector<double> spectrum(svd.s.data(), svd.s.data() + svd.s.size());
    auto v = explained_variance(spectrum);

    for (int k : ranks) {
      if (k > std::min(m, n)) continue;
      Eigen::MatrixXd rec = svd.u.leftCols(k) * svd.s.head(k).asDiagonal() *
                            svd.vt.topRows(k);
      double err2 = (a - rec).squaredNorm();

      // Variance identity: error^2 == (1 - v_k) * |A|_F^2.
      double rhs = (1.0 - v[static_cast<std::size_t>(k) - 1]) * total;
      REQUIRE(std::abs(err2 - rhs) <= 1e-6 * std::max(rhs, 1e-6 * total),
              "trial " << trial << " k=" << k << ": err2 " << err2
                       << " vs (1-v_k)|A|^2 " << rhs);

      // Against 100 random rank-k baselines, each the best approximation
      // within a random k-dimensional column space.
      for (int b = 0; b < 100; ++b) {
        Eigen::MatrixXd q = random_orthonormal(rng, m, k);
        double base_err2 = (a - q * (q.transpose() * a)).squaredNorm();
        REQUIRE(err2 <= base_err2 + 1e-12 * total,
                "trial " << trial << " k=" << k << " baseline " << b
                         << ": svd err2 " << err2 << " > baseline "
                         << base_err2);
      }
    }
  }
  REQUIRE(timer.seconds() < 60.0,
          "took " << timer.seconds() << " s (budget 60 s)");
}

// ---------------------------------------------------------------------------
// 4. Rank-selection rule.

void check_rank_selection() {
  auto v = explained_variance({2.0, 1.0, 1.0});
  REQUIRE(select_rank(v, 0.5) == 1, "sigma=[2,1,1] tau=0.5 picked "
                                        << select_rank(v, 0.5));
  REQUIRE(select_rank(v, 0.9) == 3, "sigma=[2,1,1] tau=0.9 picked "
                                        << select_rank(v, 0.9));
  REQUIRE(select_rank(v, 5.0 / 6.0) == 2,
          "threshold equal to v_k must already satisfy it");

  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_real_distribution<double> mag(0.01, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(len(rng)));
    for (auto& x : s) x = mag(rng);
    std::sort(s.rbegin(), s.rend());
    auto curve = explained_variance(s);

    std::size_t prev = 1;
    for (int step = 0; step <= 20; ++step) {
      double tau = step / 20.0;
      std::size_t k = select_rank(curve, tau);
      REQUIRE(k >= 1 && k <= curve.size(), "k out of range");
      REQUIRE(k >= prev, "not monotone in tau at trial " << trial);
      REQUIRE(curve[k - 1] >= tau || k == curve.size(),
              "selected k does not reach tau");
      REQUIRE(k == 1 || curve[k - 2] < tau,
              "k is not the smallest admissible rank");
      prev = k;
    }
  }
}

// ---------------------------------------------------------------------------
// 5. LoRE storage accounting.

void check_storage_accounting() {
  std::mt19937_64 rng(505);
  DeltaAdapter delta;
  Checkpoint base;
  const std::vector<std::pair<int, int>> dims = {
      {24, 16}, {16, 24}, {32, 32}, {12, 20}, {20, 12}, {28, 16}};
  for (std::size_t i = 0; i < dims.size(); ++i) {
    auto [m, n] = dims[i];
    Eigen::MatrixXd a = planted_spectrum(rng, m, n, 3.0, 0.55);
    std::string name = "block." + std::to_string(i) + ".weight";
    delta.tensors.add(from_matrix(name, a));
    base.add(tu::random_tensor(rng, name, {m, n}));
  }
  // 1-D and thin tensors always stay dense.
  delta.tensors.add(tu::random_tensor(rng, "bias", {48}));
  base.add(tu::random_tensor(rng, "bias", {48}));
  delta.tensors.add(tu::random_tensor(rng, "thin", {1, 32}));
  base.add(tu::random_tensor(rng, "thin", {1, 32}));

  std::uint64_t base_total = 0;
  for (const auto& t : base.tensors())
    base_total += static_cast<std::uint64_t>(t.to_floats().size());

  for (double tau : {0.3, 0.5, 0.7, 0.9, 1.0}) {
    CompressOptions opts;
    opts.tau = tau;
    auto lore = compress(delta, opts);

    // Independent recount straight off the stored shapes.
    std::uint64_t expect = 0;
    for (const auto& [name, f] : lore.factors) {
      auto bs = f.factor_b.shape();
      auto as = f.factor_a.shape();
      REQUIRE(bs.size() == 2 && as.size() == 2 && bs[1] == as[0] &&
                  bs[1] == f.rank,
              "inconsistent factor shapes for " << name);
      expect += static_cast<std::uint64_t>(bs[0] * bs[1] + as[0] * as[1]);
    }
    for (const auto& t : lore.dense.tensors())
      expect += static_cast<std::uint64_t>(t.to_floats().size());

    auto report = param_report(lore, base);
    REQUIRE(report.lore_params == expect,
            "tau " << tau << ": reported " << report.lore_params
                   << " params, recounted " << expect);
    REQUIRE(report.base_params == base_total, "base param count wrong");
    double percent = 100.0 * static_cast<double>(expect) /
                     static_cast<double>(base_total);
    REQUIRE(std::abs(report.percent_of_base - percent) < 1e-9,
            "percent mismatch at tau " << tau);
  }

  std::vector<double> taus;
  for (int i = 1; i <= 20; ++i) taus.push_back(i / 20.0);
  auto curve = tau_sweep(delta, taus, base);
  REQUIRE(curve.size() == taus.size(), "sweep row count");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    REQUIRE(curve[i].second >= curve[i - 1].second,
            "sweep curve decreases at tau " << curve[i].first);
  }
  REQUIRE(curve.back().second > curve.front().second,
          "sweep curve is flat; expected storage to grow with tau");
}

// ---------------------------------------------------------------------------
// 6. DoRA densification.

void check_dora() {
  std::mt19937_64 rng(606);
  const int dim = 16, r = 4;
  const double alpha = 8.0;

  auto w = tu::random_tensor(rng, "w.weight", {dim, dim});
  auto a = NamedTensor::from_floats("a", {r, dim}, DType::f32,
                                    tu::random_floats(rng, r * dim, -0.05f,
                                                      0.05f));
  auto b = NamedTensor::from_floats("b", {dim, r}, DType::f32,
                                    tu::random_floats(rng, dim * r, -0.05f,
                                                      0.05f));
  auto mags = tu::random_floats(rng, dim, 0.5f, 2.0f);
  auto magnitude =
      NamedTensor::from_floats("m", {dim}, DType::f32, mags);

  DoraModule mod{LoraModule{"w.weight", a, b, r, alpha, 0.0}, magnitude};
  auto delta = densify_dora(mod, w);

  auto wv = w.to_floats();
  auto dv = delta.to_floats();
  auto mv = magnitude.to_floats();
  for (int i = 0; i < dim; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      double x = static_cast<double>(wv[i * dim + j]) + dv[i * dim + j];
      norm2 += x * x;
    }
    double norm = std::sqrt(norm2);
    REQUIRE(std::abs(norm - mv[i]) <= 1e-6 * (1.0 + std::abs(mv[i])),
            "slice " << i << ": norm " << norm << " vs magnitude " << mv[i]);
  }

  // Zero low-rank update plus native magnitudes: numerically a no-op.
  auto b0 = NamedTensor::filled("b", {dim, r}, DType::f32, 0.0f);
  std::vector<float> native(dim);
  for (int i = 0; i < dim; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      double x = wv[i * dim + j];
      norm2 += x * x;
    }
    native[static_cast<std::size_t>(i)] =
        static_cast<float>(std::sqrt(norm2));
  }
  DoraModule noop{LoraModule{"w.weight", a, b0, r, alpha, 0.0},
                  NamedTensor::from_floats("m", {dim}, DType::f32, native)};
  auto zero_delta = densify_dora(noop, w);
  double dn = frobenius_norm(zero_delta);
  double wn = frobenius_norm(w);
  REQUIRE(dn < 1e-5 * wn,
          "zero-update delta norm " << dn << " vs 1e-5*|W| " << 1e-5 * wn);
}

// ---------------------------------------------------------------------------
// 7. Metric oracles.

int lcs_oracle(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  std::vector<std::vector<int>> dp(a.size() + 1,
                                   std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  return dp[a.size()][b.size()];
}

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

void check_metric_oracles() {
  std::mt19937_64 rng(707);
  const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee",
                                          "ff", "gg", "hh", "ii", "jj"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);

  auto random_tokens = [&](int n) {
    std::vector<std::string> t(static_cast<std::size_t>(n));
    for (auto& x : t) x = vocab[pick(rng)];
    return t;
  };

  int em_seen = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto ref = random_tokens(len(rng));
    auto resp = random_tokens(len(rng));
    // A third of the trials plant the reference inside the response so the
    // exact-match implication is genuinely exercised.
    if (trial % 3 == 0 && !ref.empty()) {
      auto pre = random_tokens(len(rng) / 4);
      auto post = random_tokens(len(rng) / 4);
      resp = pre;
      resp.insert(resp.end(), ref.begin(), ref.end());
      resp.insert(resp.end(), post.begin(), post.end());
    }
    std::string ref_s = join(ref), resp_s = join(resp);

    double got = rouge_l_recall(ref_s, resp_s);
    double want = ref.empty() ? 0.0
                              : static_cast<double>(lcs_oracle(ref, resp)) /
                                    static_cast<double>(ref.size());
    REQUIRE(got == want, "trial " << trial << ": rouge " << got
                                  << " oracle " << want);

    int em = exact_match_anywhere(ref_s, resp_s);
    if (em == 1 && !ref.empty()) {
      ++em_seen;
      REQUIRE(got == 1.0, "trial " << trial
                                   << ": exact match but rouge " << got);
    }
  }
  REQUIRE(em_seen >= 100, "too few exact-match cases (" << em_seen
                                                        << ") to trust the "
                                                           "implication");

  const std::string response =
      "There are a total of 291 episodes in the original Japanese version "
      "of Dragon Ball Z. However, the episode count can vary depending on "
      "the version and the country.";
  REQUIRE(exact_match_anywhere("291", response) == 1,
          "episode-count fixture: exact match is not 1");
  REQUIRE(rouge_l_recall("291", response) == 1.0,
          "episode-count fixture: recall is not 1");
}

// ---------------------------------------------------------------------------
// 8. BM25 exactness.

void check_bm25() {
  const std::vector<Passage> corpus = {
      {"d1", "the cat sat on the mat"},
      {"d2", "cat cat whiskers"},
      {"d3", "dogs bark loudly"},
  };
  auto index = Bm25Index::build(corpus);

  // Closed form, k1=1.5, b=0.75, avgdl=4. "cat" has df=2 of N=3.
  const double idf_cat = std::log(1.0 + (3.0 - 2.0 + 0.5) / (2.0 + 0.5));
  const double s_d1 = idf_cat * (1.0 * 2.5) / 3.0625;
  const double s_d2 = idf_cat * (2.0 * 2.5) / 3.21875;

  auto hits = index.query("cat", 10);
  REQUIRE(hits.size() == 2, "expected 2 hits, got " << hits.size());
  REQUIRE(hits[0].first == "d2" && hits[1].first == "d1",
          "ranking is " << hits[0].first << "," << hits[1].first);
  REQUIRE(std::abs(hits[0].second - s_d2) <= 1e-9,
          "d2 score " << hits[0].second << " want " << s_d2);
  REQUIRE(std::abs(hits[1].second - s_d1) <= 1e-9,
          "d1 score " << hits[1].second << " want " << s_d1);

  const double idf_mat = std::log(1.0 + (3.0 - 1.0 + 0.5) / (1.0 + 0.5));
  auto multi = index.query("cat mat", 10);
  REQUIRE(multi[0].first == "d1", "multi-term top hit is " << multi[0].first);
  REQUIRE(std::abs(multi[0].second - (s_d1 + idf_mat * 2.5 / 3.0625)) <= 1e-9,
          "multi-term d1 score " << multi[0].second);

  // Determinism under corpus permutation: same ids, identical doubles.
  std::vector<Passage> more = corpus;
  more.push_back({"d4", "the cat chased the dog on the mat"});
  more.push_back({"d5", "whiskers and tails"});
  auto reference = Bm25Index::build(more).query("cat mat whiskers", 10);
  std::mt19937_64 rng(808);
  for (int round = 0; round < 10; ++round) {
    std::shuffle(more.begin(), more.end(), rng);
    auto shuffled = Bm25Index::build(more).query("cat mat whiskers", 10);
    REQUIRE(shuffled.size() == reference.size(), "hit count changed");
    for (std::size_t i = 0; i < reference.size(); ++i) {
      REQUIRE(shuffled[i].first == reference[i].first,
              "round " << round << " rank " << i << " id changed");
      REQUIRE(shuffled[i].second == reference[i].second,
              "round " << round << " rank " << i << " score changed");
    }
  }
}

// ---------------------------------------------------------------------------
// 9. Container serialization.

void check_serialization() {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<std::int64_t> dim(1, 8);
  std::uniform_int_distribution<int> rank2(0, 1);
  const DType dtypes[] = {DType::f32, DType::f16, DType::bf16};

  Checkpoint ckpt;
  for (int i = 0; i < 1000; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "t.%04d", i);
    std::vector<std::int64_t> shape =
        rank2(rng) ? std::vector<std::int64_t>{dim(rng), dim(rng)}
                   : std::vector<std::int64_t>{dim(rng)};
    ckpt.add(tu::random_tensor(rng, name, std::move(shape), dtypes[i % 3]));
  }
  ckpt.metadata()["purpose"] = "acceptance";

  tu::TempDir tmp;
  save_checkpoint(ckpt, tmp / "single.safetensors");
  auto single = load_checkpoint(tmp / "single.safetensors");
  REQUIRE(single.digest() == ckpt.digest(), "single-file digest changed");
  for (const auto& t : ckpt.tensors()) {
    REQUIRE(tu::bitwise_equal(t, single.get(t.name())),
            "single-file payload changed for " << t.name());
  }

  save_checkpoint(ckpt, tmp / "sharded", std::uint64_t{8192});
  REQUIRE(std::filesystem::exists(tmp.path() / "sharded" /
                                  "model.safetensors.index.json"),
          "shard index manifest missing");
  std::size_t shards = 0;
  for (const auto& e :
       std::filesystem::directory_iterator(tmp.path() / "sharded")) {
    if (e.path().extension() == ".safetensors") ++shards;
  }
  REQUIRE(shards >= 2, "expected multiple shards, got " << shards);
  auto resharded = load_checkpoint(tmp / "sharded");
  REQUIRE(resharded.digest() == ckpt.digest(), "sharded digest changed");
  for (const auto& t : ckpt.tensors()) {
    REQUIRE(tu::bitwise_equal(t, resharded.get(t.name())),
            "sharded payload changed for " << t.name());
  }
}

// ---------------------------------------------------------------------------
// Optional: real-model compression band.

void check_real_model(const char* base_path, const char* instruct_path) {
  auto base = load_checkpoint(base_path);
  auto instruct = load_checkpoint(instruct_path);
  auto delta = extract_delta(base, instruct, /*skip_unmatched=*/true);
  CompressOptions opts;
  opts.tau = 0.5;
  auto lore = compress(delta, opts);
  auto report = param_report(lore, base);
  REQUIRE(report.percent_of_base >= 10.0 && report.percent_of_base <= 40.0,
          "lore fraction " << report.percent_of_base
                           << "% outside the 10-40% band");
}

}  // namespace

int main() {
  criterion("round-trip identity over 50 mixed-dtype checkpoints (<=1 ulp, "
            "<10 s)",
            check_round_trip);
  criterion("partial adaptation endpoints (beta 0 bitwise, 1 within 1 ulp, "
            "0.5 within 1e-6)",
            check_endpoints);
  criterion("truncated svd beats random rank-k baselines and matches the "
            "variance identity (<60 s)",
            check_eckart_young);
  criterion("rank selection returns the smallest admissible k and is "
            "monotone in tau",
            check_rank_selection);
  criterion("low-rank storage accounting is exact and the tau sweep is "
            "monotone",
            check_storage_accounting);
  criterion("dora merge matches magnitudes; zero update is a numerical "
            "no-op",
            check_dora);
  criterion("rouge-l recall equals a brute-force lcs oracle; exact match "
            "implies full recall",
            check_metric_oracles);
  criterion("bm25 matches the closed form and ignores corpus order",
            check_bm25);
  criterion("container round trip is bitwise for 1000 tensors, sharded and "
            "unsharded",
            check_serialization);

  const char* real_base = std::getenv("READAPT_REAL_MODEL_BASE");
  const char* real_instruct = std::getenv("READAPT_REAL_MODEL_INSTRUCT");
  if (real_base && real_instruct) {
    criterion("real-model compression lands in the expected parameter band",
              [&] { check_real_model(real_base, real_instruct); });
  } else {
    std::cout << "[SKIP] real-model compression band (set "
                 "READAPT_REAL_MODEL_BASE and READAPT_REAL_MODEL_INSTRUCT "
                 "to run)\n";
  }

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
