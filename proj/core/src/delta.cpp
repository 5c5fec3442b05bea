// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/delta.hpp"

#include "readapt/parallel.hpp"
#include "readapt/version.hpp"

namespace readapt {

DeltaAdapter extract_delta(const Checkpoint& base, const Checkpoint& instruct,
                           bool skip_unmatched, unsigned threads) {
  AlignmentReport report = validate_pair(base, instruct);
  if (!report.diffable() && !skip_unmatched) {
    throw NotDiffable(std::move(report));
  }

  std::vector<NamedTensor> diffs(report.matched.size());
  parallel_for(report.matched.size(), threads, [&](size_t i) {
    const std::string& name = report.matched[i];
    diffs[i] = subtract(instruct.get(name), base.get(name));
  });

  DeltaAdapter delta;
  for (auto& d : diffs) delta.tensors.add(std::move(d));
  delta.base_digest = base.digest();
  delta.instruct_digest = instruct.digest();
  return delta;
}

Checkpoint apply_delta(const Checkpoint& base, const DeltaAdapter& delta,
                       float scale, bool verify_digest, unsigned threads) {
  if (verify_digest) {
    const std::string actual = base.digest();
    if (actual != delta.base_digest) {
      throw DigestMismatch("base checkpoint digest " + actual +
                           " does not match adapter's recorded base digest " +
                           delta.base_digest);
    }
  }
  for (const auto& d : delta.tensors.tensors()) {
    if (!base.has(d.name())) {
      throw ShapeMismatch("delta tensor '" + d.name() +
                          "' has no counterpart in the base checkpoint");
    }
  }

  std::vector<NamedTensor> out(base.size());
  parallel_for(base.size(), threads, [&](size_t i) {
    const NamedTensor& t = base.tensors()[i];
    if (scale != 0.0f && delta.tensors.has(t.name())) {
      out[i] = add_scaled(t, delta.tensors.get(t.name()), scale);
    } else {
      out[i] = t;  // untouched (or scale 0): bitwise pass-through
    }
  });

  Checkpoint result;
  for (auto& t : out) result.add(std::move(t));
  result.metadata() = base.metadata();
  return result;
}

void save_delta(const DeltaAdapter& delta, const std::filesystem::path& path) {
  Checkpoint ckpt = delta.tensors;
  ckpt.metadata() = delta.metadata;
  ckpt.metadata()["kind"] = "re-adapter";
  ckpt.metadata()["base_digest"] = delta.base_digest;
  ckpt.metadata()["instruct_digest"] = delta.instruct_digest;
  ckpt.metadata()["version"] = std::string(kVersion);
  save_checkpoint(ckpt, path);
}

DeltaAdapter load_delta(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  DeltaAdapter delta;
  auto take = [&](const char* key, std::string& out) {
    auto it = ckpt.metadata().find(key);
    if (it != ckpt.metadata().end()) {
      out = it->second;
      ckpt.metadata().erase(it);
    }
  };
  take("base_digest", delta.base_digest);
  take("instruct_digest", delta.instruct_digest);
  std::string kind;
  take("kind", kind);
  if (kind != "re-adapter") {
    throw FormatError(path.string() + ": container kind '" + kind +
                      "' is not a dense delta adapter");
  }
  delta.metadata = ckpt.metadata();
  ckpt.metadata().clear();
  delta.tensors = std::move(ckpt);
  return delta;
}

}  // namespace readapt
