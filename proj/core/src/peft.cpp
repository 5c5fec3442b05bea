// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/peft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "readapt/checkpoint_io.hpp"
#include "readapt/errors.hpp"
#include "readapt/parallel.hpp"
#include "readapt/svd.hpp"

namespace readapt {
namespace {

using nlohmann::json;

constexpr std::string_view kAName = ".lora_A.weight";
constexpr std::string_view kBName = ".lora_B.weight";
constexpr std::string_view kMagName = ".lora_magnitude_vector";
constexpr std::string_view kBasePrefix = "base_model.model.";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// (alpha/r) * b * a in float64, validated against the declared rank.
Eigen::MatrixXd scaled_update(const LoraModule& mod) {
  if (!mod.b.is_matrix() || !mod.a.is_matrix() ||
      mod.b.cols() != mod.a.rows()) {
    throw ShapeMismatch("lora factors for '" + mod.target_name +
                        "' do not chain: b is " +
                        std::to_string(mod.b.shape().size() == 2 ? mod.b.rows()
                                                                 : -1) +
                        "x" + std::to_string(mod.b.is_matrix() ? mod.b.cols()
                                                               : -1) +
                        ", a is " +
                        std::to_string(mod.a.is_matrix() ? mod.a.rows() : -1) +
                        "x" +
                        std::to_string(mod.a.is_matrix() ? mod.a.cols() : -1));
  }
  const std::int64_t r = mod.rank > 0 ? mod.rank : mod.b.cols();
  if (r != mod.b.cols()) {
    throw ShapeMismatch("declared rank " + std::to_string(mod.rank) +
                        " does not match factor shapes for '" +
                        mod.target_name + "'");
  }
  const double scaling = mod.alpha / static_cast<double>(r);
  return scaling * (to_matrix(mod.b) * to_matrix(mod.a));
}

}  // namespace

NamedTensor densify_lora(const LoraModule& mod) {
  return from_matrix(mod.target_name, scaled_update(mod));
}

NamedTensor densify_dora(const DoraModule& mod,
                         const NamedTensor& base_tensor) {
  const LoraModule& lora = mod.lora;
  if (!base_tensor.is_matrix()) {
    throw ShapeMismatch("dora target '" + lora.target_name +
                        "' must be a matrix");
  }
  const Eigen::MatrixXd w = to_matrix(base_tensor);
  const Eigen::MatrixXd update = scaled_update(lora);
  if (update.rows() != w.rows() || update.cols() != w.cols()) {
    throw ShapeMismatch("lora update shape does not match base tensor '" +
                        base_tensor.name() + "'");
  }
  if (mod.magnitude.shape().size() != 1) {
    throw ShapeMismatch("dora magnitude for '" + lora.target_name +
                        "' must be 1-D");
  }
  const std::vector<float> mag = mod.magnitude.to_floats();
  const auto len = static_cast<std::int64_t>(mag.size());

  // The sliced axis is whichever one matches the magnitude length. Square
  // targets default to rows, the layout adapter libraries use for (out, in)
  // weight storage.
  bool per_row;
  if (len == w.rows()) {
    per_row = true;
  } else if (len == w.cols()) {
    per_row = false;
  } else {
    throw ShapeMismatch("dora magnitude length " + std::to_string(len) +
                        " matches neither dimension of '" +
                        base_tensor.name() + "'");
  }

  Eigen::MatrixXd v = w + update;
  const std::int64_t slices = per_row ? w.rows() : w.cols();
  for (std::int64_t i = 0; i < slices; ++i) {
    const double norm = per_row ? v.row(i).norm() : v.col(i).norm();
    if (norm < 1e-12) {
      throw DegenerateColumn("dora merge for '" + lora.target_name +
                             "': slice " + std::to_string(i) +
                             " of W + scaled update has zero norm");
    }
    const double factor = static_cast<double>(mag[static_cast<size_t>(i)]) /
                          norm;
    if (per_row) {
      v.row(i) *= factor;
    } else {
      v.col(i) *= factor;
    }
  }
  return from_matrix(lora.target_name, v - w);
}

PeftAdapter load_peft_dir(const std::filesystem::path& dir) {
  const auto config_path = dir / "adapter_config.json";
  if (!std::filesystem::exists(config_path)) {
    throw FormatError(dir.string() + ": no adapter_config.json found");
  }
  json config;
  try {
    std::ifstream in(config_path);
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(config_path.string() + ": " + e.what());
  }

  PeftAdapter adapter;
  adapter.rank = config.value("r", 0);
  adapter.alpha = config.value("lora_alpha", 0.0);
  adapter.dropout = config.value("lora_dropout", 0.0);
  adapter.use_dora = config.value("use_dora", false);
  if (config.contains("target_modules")) {
    const auto& targets = config["target_modules"];
    if (targets.is_string()) {
      adapter.target_patterns.push_back(targets.get<std::string>());
    } else if (targets.is_array()) {
      for (const auto& t : targets) {
        adapter.target_patterns.push_back(t.get<std::string>());
      }
    }
  }
  if (adapter.rank <= 0) {
    throw FormatError(config_path.string() + ": missing or non-positive r");
  }

  const auto weights_path = dir / "adapter_model.safetensors";
  if (!std::filesystem::exists(weights_path)) {
    throw FormatError(dir.string() + ": no adapter_model.safetensors found");
  }
  const Checkpoint weights = load_checkpoint(weights_path);

  struct Parts {
    std::optional<NamedTensor> a, b, magnitude;
  };
  std::map<std::string, Parts> modules;
  for (const auto& t : weights.tensors()) {
    std::string name = t.name();
    if (starts_with(name, kBasePrefix)) name = name.substr(kBasePrefix.size());

    if (ends_with(name, kAName)) {
      modules[name.substr(0, name.size() - kAName.size())].a = t;
    } else if (ends_with(name, kBName)) {
      modules[name.substr(0, name.size() - kBName.size())].b = t;
    } else if (ends_with(name, kMagName)) {
      modules[name.substr(0, name.size() - kMagName.size())].magnitude = t;
    } else if (ends_with(name, std::string(kMagName) + ".weight")) {
      const std::string stem =
          name.substr(0, name.size() - kMagName.size() - 7);
      modules[stem].magnitude = t;
    } else {
      throw FormatError(weights_path.string() + ": unrecognized tensor '" +
                        t.name() + "'");
    }
  }
  if (modules.empty()) {
    throw FormatError(weights_path.string() + ": adapter contains no modules");
  }

  for (auto& [path, parts] : modules) {
    if (!parts.a || !parts.b) {
      throw FormatError(weights_path.string() + ": module '" + path +
                        "' is missing its lora_A or lora_B factor");
    }
    if (adapter.use_dora && !parts.magnitude) {
      throw FormatError(weights_path.string() + ": use_dora is set but '" +
                        path + "' has no magnitude vector");
    }
    if (!adapter.use_dora && parts.magnitude) {
      throw FormatError(weights_path.string() + ": '" + path +
                        "' carries a magnitude vector but use_dora is false");
    }
    LoraModule mod;
    mod.target_name = path + ".weight";
    mod.a = *parts.a;
    mod.b = *parts.b;
    mod.rank = parts.b->cols();
    mod.alpha = adapter.alpha;
    mod.dropout = adapter.dropout;
    if (adapter.use_dora) {
      DoraModule dmod;
      dmod.lora = std::move(mod);
      dmod.magnitude = *parts.magnitude;
      adapter.dora.push_back(std::move(dmod));
    } else {
      adapter.lora.push_back(std::move(mod));
    }
  }

  // Every configured pattern must have matched something, otherwise the
  // adapter directory and its config disagree.
  for (const auto& pattern : adapter.target_patterns) {
    if (pattern == "all-linear") continue;
    bool hit = false;
    for (const auto& [path, parts] : modules) {
      if (path == pattern || ends_with(path, "." + pattern)) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      throw UnresolvedTarget("target pattern '" + pattern +
                             "' matches no module in " +
                             weights_path.string());
    }
  }
  return adapter;
}

DeltaAdapter densify_adapter(const PeftAdapter& adapter, const Checkpoint& base,
                             unsigned threads) {
  const std::size_t count = adapter.module_count();
  auto target_of = [&](std::size_t i) -> const std::string& {
    return adapter.use_dora ? adapter.dora[i].lora.target_name
                            : adapter.lora[i].target_name;
  };
  for (std::size_t i = 0; i < count; ++i) {
    if (!base.has(target_of(i))) {
      throw UnresolvedTarget("adapter targets '" + target_of(i) +
                             "', which is absent from the base checkpoint");
    }
  }

  std::vector<NamedTensor> dense(count);
  parallel_for(count, threads, [&](std::size_t i) {
    if (adapter.use_dora) {
      dense[i] =
          densify_dora(adapter.dora[i], base.get(target_of(i)));
    } else {
      dense[i] = densify_lora(adapter.lora[i]);
    }
  });

  DeltaAdapter out;
  for (auto& t : dense) out.tensors.add(std::move(t));
  out.base_digest = base.digest();
  out.metadata["source"] = "peft-densified";
  out.metadata["use_dora"] = adapter.use_dora ? "true" : "false";
  out.metadata["r"] = std::to_string(adapter.rank);
  return out;
}

}  // namespace readapt
