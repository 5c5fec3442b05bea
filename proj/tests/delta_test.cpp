// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0

#include "readapt/delta.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "readapt/errors.hpp"
#include "testutil.hpp"

namespace readapt {
namespace {

using testutil::TempDir;
using testutil::bitwise_equal;

TEST(ExtractDelta, IdenticalCheckpointsGiveZero) {
  std::mt19937_64 rng(23);
  auto base = testutil::random_checkpoint(rng, 6, 12,
                                          {DType::f32, DType::bf16});
  auto delta = extract_delta(base, base);
  ASSERT_EQ(delta.tensors.size(), base.size());
  for (const auto& t : delta.tensors.tensors()) {
    EXPECT_EQ(frobenius_norm(t), 0.0) << t.name();
    EXPECT_EQ(t.dtype(), DType::f32);
  }
  EXPECT_EQ(delta.base_digest, base.digest());
  EXPECT_EQ(delta.instruct_digest, base.digest());
}

TEST(ExtractDelta, HandExample) {
  Checkpoint base;
  base.add(NamedTensor::from_floats("w", {2}, DType::f32,
                                    std::vector<float>{1.0f, 1.0f}));
  Checkpoint inst;
  inst.add(NamedTensor::from_floats("w", {2}, DType::f32,
                                    std::vector<float>{2.0f, 3.0f}));
  auto delta = extract_delta(base, inst);
  EXPECT_EQ(delta.tensors.get("w").to_floats(),
            (std::vector<float>{1.0f, 2.0f}));
}

TEST(ExtractDelta, StrictMismatchRaisesNotDiffable) {
  Checkpoint base;
  base.add(NamedTensor::filled("w", {2}, DType::f32, 1.0f));
  base.add(NamedTensor::filled("only_base", {2}, DType::f32, 1.0f));
  Checkpoint inst;
  inst.add(NamedTensor::filled("w", {2}, DType::f32, 2.0f));

  try {
    extract_delta(base, inst);
    FAIL() << "expected NotDiffable";
  } catch (const NotDiffable& e) {
    ASSERT_EQ(e.report().missing_in_b.size(), 1u);
    EXPECT_EQ(e.report().missing_in_b[0], "only_base");
  }

  // Skipping diffs the matched intersection only.
  auto delta = extract_delta(base, inst, /*skip_unmatched=*/true);
  EXPECT_EQ(delta.tensors.size(), 1u);
  EXPECT_TRUE(delta.tensors.has("w"));
}

TEST(ExtractDelta, ShapeMismatchRaisesNotDiffable) {
  Checkpoint base;
  base.add(NamedTensor::filled("w", {2, 3}, DType::f32, 1.0f));
  Checkpoint inst;
  inst.add(NamedTensor::filled("w", {3, 2}, DType::f32, 1.0f));
  EXPECT_THROW(extract_delta(base, inst), NotDiffable);
  // A shape mismatch is not skippable damage; the tensor is simply not
  // matched, leaving nothing to diff.
  auto delta = extract_delta(base, inst, /*skip_unmatched=*/true);
  EXPECT_TRUE(delta.tensors.empty());
}

TEST(ApplyDelta, RoundTripWithinOneUlp) {
  std::mt19937_64 rng(29);
  for (DType dt : {DType::f32, DType::f16, DType::bf16}) {
    auto base = testutil::random_checkpoint(rng, 4, 16, {dt});
    // An instruct checkpoint a small relative step away, like a fine-tune.
    auto aligned = testutil::perturbed_checkpoint(rng, base);
    auto delta = extract_delta(base, aligned);
    auto rebuilt = apply_delta(base, delta, 1.0f);
    for (const auto& t : aligned.tensors()) {
      const auto& r = rebuilt.get(t.name());
      auto want = t.to_floats();
      auto got = r.to_floats();
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_LE(ulp_distance(dt, want[i], got[i]), 1)
            << t.name() << "[" << i << "] want " << want[i] << " got "
            << got[i];
      }
    }
  }
}

TEST(ApplyDelta, ScaleZeroIsBitwiseBase) {
  std::mt19937_64 rng(31);
  auto base = testutil::random_checkpoint(rng, 5, 16,
                                          {DType::f16, DType::bf16});
  auto inst = base;
  inst.put(NamedTensor::filled(base.names()[0], base.tensors()[0].shape(),
                               base.tensors()[0].dtype(), 9.0f));
  auto delta = extract_delta(base, inst);
  auto out = apply_delta(base, delta, 0.0f);
  EXPECT_EQ(out.digest(), base.digest());
}

TEST(ApplyDelta, LinearInScaleOnFloat32) {
  std::mt19937_64 rng(37);
  auto base = testutil::random_checkpoint(rng, 3, 8, {DType::f32});
  Checkpoint inst;
  for (const auto& t : base.tensors()) {
    auto vals = testutil::random_floats(rng, t.to_floats().size());
    inst.add(NamedTensor::from_floats(t.name(), t.shape(), DType::f32, vals));
  }
  auto delta = extract_delta(base, inst);

  auto once = apply_delta(apply_delta(base, delta, 0.25f), delta, 0.5f);
  auto direct = apply_delta(base, delta, 0.75f);
  for (const auto& t : direct.tensors()) {
    auto a = t.to_floats();
    auto b = once.get(t.name()).to_floats();
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-6 * (1.0 + std::abs(a[i])));
    }
  }
}

TEST(ApplyDelta, UnmatchedBaseTensorsPassThrough) {
  Checkpoint base;
  base.add(NamedTensor::filled("w", {2}, DType::f32, 1.0f));
  base.add(NamedTensor::from_floats("frozen", {2}, DType::f16,
                                    std::vector<float>{0.1f, 0.2f}));
  Checkpoint inst;
  inst.add(NamedTensor::filled("w", {2}, DType::f32, 3.0f));

  auto delta = extract_delta(base, inst, /*skip_unmatched=*/true);
  auto out = apply_delta(base, delta, 1.0f);
  EXPECT_TRUE(bitwise_equal(out.get("frozen"), base.get("frozen")));
  EXPECT_EQ(out.get("w").to_floats(), (std::vector<float>{3.0f, 3.0f}));
}

TEST(ApplyDelta, DeltaNamingUnknownTensorThrows) {
  Checkpoint base;
  base.add(NamedTensor::filled("w", {2}, DType::f32, 1.0f));
  DeltaAdapter delta;
  delta.tensors.add(NamedTensor::filled("ghost", {2}, DType::f32, 1.0f));
  EXPECT_THROW(apply_delta(base, delta, 1.0f), ShapeMismatch);
}

TEST(ApplyDelta, DigestVerification) {
  std::mt19937_64 rng(41);
  auto base = testutil::random_checkpoint(rng, 3, 8);
  auto delta = extract_delta(base, base);
  EXPECT_NO_THROW(apply_delta(base, delta, 1.0f, /*verify_digest=*/true));

  auto other = testutil::random_checkpoint(rng, 3, 8);
  EXPECT_THROW(apply_delta(other, delta, 1.0f, /*verify_digest=*/true),
               DigestMismatch);
  // Without verification the shape-compatible apply is allowed... only if
  // names/shapes align, which they may not here; so just re-check base.
  EXPECT_NO_THROW(apply_delta(base, delta, 1.0f, /*verify_digest=*/false));
}

TEST(DeltaSerialization, RoundTrip) {
  std::mt19937_64 rng(43);
  auto base = testutil::random_checkpoint(rng, 4, 10);
  Checkpoint inst;
  for (const auto& t : base.tensors()) {
    auto vals = testutil::random_floats(rng, t.to_floats().size());
    inst.add(NamedTensor::from_floats(t.name(), t.shape(), t.dtype(), vals));
  }
  auto delta = extract_delta(base, inst);
  delta.metadata["note"] = "fixture";

  TempDir tmp;
  auto path = tmp / "delta.safetensors";
  save_delta(delta, path);
  auto loaded = load_delta(path);

  EXPECT_EQ(loaded.base_digest, delta.base_digest);
  EXPECT_EQ(loaded.instruct_digest, delta.instruct_digest);
  EXPECT_EQ(loaded.metadata.at("note"), "fixture");
  ASSERT_EQ(loaded.tensors.size(), delta.tensors.size());
  for (const auto& t : delta.tensors.tensors()) {
    EXPECT_TRUE(bitwise_equal(t, loaded.tensors.get(t.name())));
  }
}

TEST(DeltaSerialization, RejectsForeignKind) {
  std::mt19937_64 rng(47);
  auto ckpt = testutil::random_checkpoint(rng, 2, 4);
  TempDir tmp;
  auto path = tmp / "plain.safetensors";
  save_checkpoint(ckpt, path);  // no adapter metadata
  EXPECT_THROW(load_delta(path), FormatError);
}

}  // namespace
}  // namespace readapt
