// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/merge.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "readapt/checkpoint_io.hpp"
#include "readapt/errors.hpp"
#include "readapt/parallel.hpp"

namespace readapt {
namespace {

using nlohmann::json;

void check_scales(const MergeRecipe& recipe) {
  if (recipe.allow_out_of_range) return;
  for (const auto& term : recipe.terms) {
    if (term.scale < 0.0 || term.scale > 1.0) {
      throw UsageError("scale " + std::to_string(term.scale) + " for '" +
                       term.path.string() +
                       "' is outside [0,1]; set allow_out_of_range to "
                       "extrapolate anyway");
    }
  }
}

std::string format_scale(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

MergeRecipe parse_recipe_file(const std::filesystem::path& path) {
  json doc;
  try {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open recipe " + path.string());
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed recipe: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("base") || !doc.contains("terms") ||
      !doc["terms"].is_array()) {
    throw FormatError(path.string() + ": recipe needs 'base' and 'terms'");
  }

  const std::filesystem::path dir = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : dir / fp;
  };

  MergeRecipe recipe;
  recipe.base = resolve(doc["base"].get<std::string>());
  for (const auto& term : doc["terms"]) {
    if (!term.is_object() || !term.contains("path")) {
      throw FormatError(path.string() + ": every term needs a 'path'");
    }
    MergeTerm t;
    t.path = resolve(term["path"].get<std::string>());
    t.scale = term.value("scale", 0.5);
    const std::string kind = term.value("kind", std::string("dense-delta"));
    if (kind == "dense-delta") {
      t.kind = TermKind::dense_delta;
    } else if (kind == "lore") {
      t.kind = TermKind::lore;
    } else {
      throw FormatError(path.string() + ": unknown term kind '" + kind + "'");
    }
    recipe.terms.push_back(std::move(t));
  }
  if (doc.contains("dtype")) {
    const std::string dtype_str = doc["dtype"].get<std::string>();
    recipe.out_dtype = dtype_from_name(dtype_str);
    if (!recipe.out_dtype) {
      throw FormatError(path.string() + ": unsupported dtype \"" + dtype_str +
                        "\"");
    }
  }
  recipe.verify_digests = doc.value("verify_digests", false);
  recipe.allow_out_of_range = doc.value("allow_out_of_range", false);
  return recipe;
}

Checkpoint compose(
    const Checkpoint& base,
    const std::vector<std::pair<const DeltaAdapter*, double>>& terms,
    std::optional<DType> out_dtype, bool verify_digests, unsigned threads) {
  if (verify_digests) {
    const std::string actual = base.digest();
    for (const auto& [adapter, scale] : terms) {
      if (adapter->base_digest != actual) {
        throw DigestMismatch(
            "adapter base digest " +
            (adapter->base_digest.empty() ? "(unset)" : adapter->base_digest) +
            " does not match checkpoint digest " + actual);
      }
    }
  }
  for (const auto& [adapter, scale] : terms) {
    for (const auto& d : adapter->tensors.tensors()) {
      if (!base.has(d.name())) {
        throw ShapeMismatch("adapter tensor '" + d.name() +
                            "' has no counterpart in the base checkpoint");
      }
    }
  }

  std::vector<NamedTensor> out(base.size());
  parallel_for(base.size(), threads, [&](std::size_t i) {
    const NamedTensor& t = base.tensors()[i];
    std::vector<std::pair<const NamedTensor*, float>> active;
    for (const auto& [adapter, scale] : terms) {
      if (scale != 0.0 && adapter->tensors.has(t.name())) {
        active.emplace_back(&adapter->tensors.get(t.name()),
                            static_cast<float>(scale));
      }
    }
    if (active.empty()) {
      out[i] = out_dtype && *out_dtype != t.dtype() ? cast(t, *out_dtype) : t;
      return;
    }
    std::vector<float> acc = t.to_floats();
    for (const auto& [d, scale] : active) {
      if (d->shape() != t.shape()) {
        throw ShapeMismatch("adapter tensor '" + d->name() +
                            "' shape differs from the base tensor");
      }
      const std::vector<float> dv = d->to_floats();
      for (std::size_t j = 0; j < acc.size(); ++j) {
        acc[j] += scale * dv[j];
      }
    }
    out[i] = NamedTensor::from_floats(t.name(), t.shape(),
                                      out_dtype.value_or(t.dtype()), acc);
  });

  Checkpoint result;
  for (auto& t : out) result.add(std::move(t));
  result.metadata() = base.metadata();
  return result;
}

Checkpoint compose(const MergeRecipe& recipe, unsigned threads) {
  check_scales(recipe);
  const Checkpoint base = load_checkpoint(recipe.base);

  std::vector<DeltaAdapter> storage;
  storage.reserve(recipe.terms.size());
  for (const auto& term : recipe.terms) {
    if (term.kind == TermKind::lore) {
      storage.push_back(materialize(load_lore(term.path), threads));
    } else {
      storage.push_back(load_delta(term.path));
    }
  }
  std::vector<std::pair<const DeltaAdapter*, double>> terms;
  terms.reserve(storage.size());
  for (std::size_t i = 0; i < storage.size(); ++i) {
    terms.emplace_back(&storage[i], recipe.terms[i].scale);
  }
  return compose(base, terms, recipe.out_dtype, recipe.verify_digests,
                 threads);
}

std::vector<SweepRow> sweep(const Checkpoint& base,
                            const DeltaAdapter* knowledge,
                            const DeltaAdapter* re_adapter,
                            std::vector<double> alpha_grid,
                            std::vector<double> beta_grid,
                            const std::filesystem::path& out_dir,
                            unsigned threads) {
  if (knowledge == nullptr) alpha_grid = {0.0};
  if (re_adapter == nullptr) beta_grid = {0.0};
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  std::vector<SweepRow> rows;
  for (double alpha : alpha_grid) {
    for (double beta : beta_grid) {
      std::vector<std::pair<const DeltaAdapter*, double>> terms;
      if (knowledge != nullptr) terms.emplace_back(knowledge, alpha);
      if (re_adapter != nullptr) terms.emplace_back(re_adapter, beta);
      const Checkpoint merged = compose(base, terms, {}, false, threads);

      SweepRow row;
      row.alpha = alpha;
      row.beta = beta;
      row.path = out_dir / ("merged-a" + format_scale(alpha) + "-b" +
                            format_scale(beta) + ".safetensors");
      row.tensor_count = merged.size();
      row.digest = merged.digest();
      save_checkpoint(merged, row.path);
      rows.push_back(std::move(row));
    }
  }

  std::ofstream manifest(out_dir / "manifest.csv");
  if (!manifest) {
    throw IoError("cannot write manifest in " + out_dir.string());
  }
  write_sweep_manifest(manifest, rows);
  return rows;
}

void write_sweep_manifest(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "alpha,beta,path,tensor_count,digest\n";
  for (const auto& row : rows) {
    os << row.alpha << ',' << row.beta << ',' << row.path.string() << ','
       << row.tensor_count << ',' << row.digest << '\n';
  }
}

}  // namespace readapt
