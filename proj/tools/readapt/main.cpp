// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
//
// readapt: checkpoint arithmetic for instruction adapters.
//
// One binary, one pipeline per invocation. Exit codes: 0 success,
// 2 alignment failure, 3 numeric failure, 64 usage, 65 data format,
// 1 anything else. Machine-readable output always goes to files; stdout
// carries the human summary.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "readapt/checkpoint_io.hpp"
#include "readapt/delta.hpp"
#include "readapt/errors.hpp"
#include "readapt/evalkit.hpp"
#include "readapt/jsonl.hpp"
#include "readapt/merge.hpp"
#include "readapt/peft.hpp"
#include "readapt/retrieval.hpp"
#include "readapt/spectra.hpp"
#include "readapt/svd.hpp"
#include "readapt/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitNotDiffable = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct Global {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string log_level = "info";
};

int log_rank(const std::string& level) {
  if (level == "error") return 2;
  if (level == "warn") return 1;
  return 0;
}

void log_line(const Global& g, const std::string& level,
              const std::string& msg) {
  if (log_rank(level) >= log_rank(g.log_level)) {
    std::cerr << "[" << level << "] " << msg << "\n";
  }
}

// Peeks at a container's __metadata__.kind without loading tensor data.
std::string sniff_kind(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::uint8_t len_le[8];
  if (!in.read(reinterpret_cast<char*>(len_le), 8)) return "";
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | len_le[i];
  if (n > (1ULL << 31)) return "";
  std::string header(n, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(n))) return "";
  try {
    const json h = json::parse(header);
    if (h.contains("__metadata__") && h["__metadata__"].contains("kind")) {
      return h["__metadata__"]["kind"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return "";
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) {
      throw readapt::UsageError("bad grid value '" + item + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw readapt::UsageError("empty grid");
  return grid;
}

std::string sanitize_filename(std::string name) {
  for (char& c : name) {
    if (c == '/' || c == '\\') c = '_';
  }
  return name;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_diff(const Global& g, const fs::path& base_path,
             const fs::path& instruct_path, const fs::path& out,
             bool skip_unmatched, std::optional<std::uint64_t> max_shard) {
  const readapt::Checkpoint base = readapt::load_checkpoint(base_path);
  const readapt::Checkpoint instruct = readapt::load_checkpoint(instruct_path);
  const readapt::AlignmentReport report =
      readapt::validate_pair(base, instruct);
  std::cout << "alignment: " << report.summary() << "\n";
  if (!report.diffable() && skip_unmatched) {
    log_line(g, "warn", "diffing the matched intersection only");
  }
  readapt::DeltaAdapter delta =
      readapt::extract_delta(base, instruct, skip_unmatched, g.threads);
  if (max_shard) {
    // Sharded adapters reuse the checkpoint writer via a plain checkpoint.
    readapt::Checkpoint ckpt = delta.tensors;
    ckpt.metadata() = delta.metadata;
    ckpt.metadata()["kind"] = "re-adapter";
    ckpt.metadata()["base_digest"] = delta.base_digest;
    ckpt.metadata()["instruct_digest"] = delta.instruct_digest;
    ckpt.metadata()["version"] = std::string(readapt::kVersion);
    readapt::save_checkpoint(ckpt, out, max_shard);
  } else {
    readapt::save_delta(delta, out);
  }
  std::cout << "wrote " << delta.tensors.size() << " delta tensors to "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_compress(const Global& g, const fs::path& delta_path, double tau,
                 const fs::path& out, std::int64_t min_dim, bool no_guard,
                 std::int64_t dense_max_dim, const std::string& report_path) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw readapt::UsageError("tau must be in (0,1], got " +
                              std::to_string(tau));
  }
  const readapt::DeltaAdapter delta = readapt::load_delta(delta_path);
  readapt::CompressOptions opts;
  opts.tau = tau;
  opts.min_dim = min_dim;
  opts.storage_guard = !no_guard;
  opts.dense_max_dim = dense_max_dim;
  opts.seed = g.seed;
  opts.threads = g.threads;
  const readapt::LoreAdapter lore = readapt::compress(delta, opts);
  readapt::save_lore(lore, out);

  const readapt::ParamReport report =
      readapt::param_report(lore, delta.tensors);
  std::cout << "compressed " << lore.factors.size() << " tensors, kept "
            << lore.dense.size() << " dense\n";
  std::cout << "lore parameters: " << report.lore_params << " ("
            << std::fixed << std::setprecision(2) << report.percent_of_base
            << "% of the source delta)\n";
  if (!report_path.empty()) {
    std::ofstream rep(report_path, std::ios::trunc);
    if (!rep) throw readapt::IoError("cannot write " + report_path);
    rep << "name,rank,params,retained_variance\n";
    for (const auto& row : report.rows) {
      rep << row.name << ',' << row.rank << ',' << row.params << ','
          << std::setprecision(17) << row.retained_variance << '\n';
    }
  }
  return kExitOk;
}

int cmd_spectrum(const Global& g, const fs::path& delta_path,
                 const std::vector<std::string>& layers, const fs::path& out) {
  const readapt::DeltaAdapter delta = readapt::load_delta(delta_path);
  std::error_code ec;
  fs::create_directories(out, ec);

  std::vector<const readapt::NamedTensor*> selected;
  if (layers.empty()) {
    for (const auto& t : delta.tensors.tensors()) {
      if (t.is_matrix()) selected.push_back(&t);
    }
  } else {
    for (const auto& name : layers) {
      selected.push_back(&delta.tensors.get(name));  // throws on bad name
    }
  }

  std::size_t written = 0;
  for (const auto* t : selected) {
    try {
      const readapt::Spectrum sp = readapt::spectrum_of(*t);
      const fs::path file = out / (sanitize_filename(t->name()) + ".csv");
      std::ofstream os(file, std::ios::trunc);
      if (!os) throw readapt::IoError("cannot write " + file.string());
      readapt::write_spectrum_csv(os, sp);
      ++written;
    } catch (const readapt::AllZero&) {
      // A layer the fine-tune never touched has no spectrum to plot. Only
      // fatal when the user named it explicitly.
      if (!layers.empty()) throw;
      log_line(g, "warn", "skipping all-zero layer " + t->name());
    }
  }
  std::cout << "wrote " << written << " spectrum curve(s) to " << out.string()
            << "\n";
  return kExitOk;
}

int cmd_densify(const Global& g, const fs::path& adapter_dir,
                const fs::path& base_path, const fs::path& out) {
  const readapt::PeftAdapter adapter = readapt::load_peft_dir(adapter_dir);
  const readapt::Checkpoint base = readapt::load_checkpoint(base_path);
  readapt::DeltaAdapter delta =
      readapt::densify_adapter(adapter, base, g.threads);
  readapt::save_delta(delta, out);
  std::cout << "densified " << adapter.module_count() << " "
            << (adapter.use_dora ? "dora" : "lora") << " module(s) into "
            << out.string() << "\n";
  return kExitOk;
}

readapt::MergeRecipe recipe_from_flags(const fs::path& base,
                                       const std::string& knowledge,
                                       double alpha,
                                       const std::string& re_adapter,
                                       double beta, const std::string& dtype,
                                       bool verify, bool allow_oor) {
  readapt::MergeRecipe recipe;
  recipe.base = base;
  auto add_term = [&](const std::string& p, double scale) {
    readapt::MergeTerm term;
    term.path = p;
    term.scale = scale;
    term.kind = sniff_kind(p) == "lore-adapter" ? readapt::TermKind::lore
                                                : readapt::TermKind::dense_delta;
    recipe.terms.push_back(std::move(term));
  };
  if (!knowledge.empty()) add_term(knowledge, alpha);
  if (!re_adapter.empty()) add_term(re_adapter, beta);
  if (!dtype.empty()) {
    const auto d = readapt::dtype_from_name(dtype);
    if (!d) throw readapt::UsageError("unknown dtype '" + dtype + "'");
    recipe.out_dtype = d;
  }
  recipe.verify_digests = verify;
  recipe.allow_out_of_range = allow_oor;
  return recipe;
}

int cmd_merge(const Global& g, const readapt::MergeRecipe& recipe,
              const fs::path& out,
              std::optional<std::uint64_t> max_shard_bytes) {
  const readapt::Checkpoint merged = readapt::compose(recipe, g.threads);
  readapt::save_checkpoint(merged, out, max_shard_bytes);
  std::cout << "merged " << recipe.terms.size() << " adapter(s) over "
            << merged.size() << " tensors into " << out.string() << "\n";
  std::cout << "digest: " << merged.digest() << "\n";
  return kExitOk;
}

int cmd_sweep(const Global& g, const fs::path& base_path,
              const std::string& knowledge, const std::string& re_adapter,
              const std::string& alphas, const std::string& betas,
              const fs::path& out_dir) {
  if (knowledge.empty() && re_adapter.empty()) {
    throw readapt::UsageError(
        "sweep needs at least one of --knowledge / --re-adapter");
  }
  const readapt::Checkpoint base = readapt::load_checkpoint(base_path);
  std::optional<readapt::DeltaAdapter> psi, delta;
  auto load_term = [&](const std::string& p) {
    return sniff_kind(p) == "lore-adapter"
               ? readapt::materialize(readapt::load_lore(p), g.threads)
               : readapt::load_delta(p);
  };
  if (!knowledge.empty()) psi = load_term(knowledge);
  if (!re_adapter.empty()) delta = load_term(re_adapter);

  auto check_grid = [](const std::vector<double>& grid, const char* name) {
    for (double v : grid) {
      if (v < 0.0 || v > 1.0) {
        throw readapt::UsageError(std::string(name) + " grid value " +
                                  std::to_string(v) + " is outside [0,1]");
      }
    }
  };
  const std::vector<double> alpha_grid = parse_grid(alphas);
  const std::vector<double> beta_grid = parse_grid(betas);
  check_grid(alpha_grid, "alpha");
  check_grid(beta_grid, "beta");

  const auto rows = readapt::sweep(base, psi ? &*psi : nullptr,
                                   delta ? &*delta : nullptr, alpha_grid,
                                   beta_grid, out_dir, g.threads);
  std::cout << "wrote " << rows.size() << " merged checkpoint(s) and "
            << (out_dir / "manifest.csv").string() << "\n";
  return kExitOk;
}

int cmd_score(const Global&, const fs::path& preds, const fs::path& refs,
              const std::string& out_json, const std::string& out_csv) {
  const readapt::EvalReport report = readapt::score_file(preds, refs);
  std::cout << "n " << report.n << "\n";
  if (report.missing_predictions > 0) {
    std::cerr << "[warn] " << report.missing_predictions
              << " example(s) had no prediction and scored 0\n";
  }
  // The headline numbers are conventionally reported x100.
  std::cout << std::fixed << std::setprecision(1);
  std::cout << "rouge_l_recall " << 100.0 * report.rouge_l_recall_mean << "\n";
  std::cout << "exact_match " << 100.0 * report.exact_match_mean << "\n";
  if (!out_json.empty()) readapt::write_report_json(report, out_json);
  if (!out_csv.empty()) readapt::write_report_csv(report, out_csv);
  return kExitOk;
}

int cmd_index(const Global&, const fs::path& corpus_path, const fs::path& out,
              double k1, double b) {
  const std::vector<readapt::Passage> corpus =
      readapt::load_passages(corpus_path);
  const readapt::Bm25Index index = readapt::Bm25Index::build(corpus, k1, b);
  index.save(out);
  std::cout << "indexed " << index.doc_count() << " passage(s), avgdl "
            << index.avgdl() << ", into " << out.string() << "\n";
  return kExitOk;
}

int cmd_retrieve(const Global&, const fs::path& index_path,
                 const fs::path& questions_path, std::size_t k,
                 const fs::path& out, const std::string& gold_path) {
  if (k < 1) throw readapt::UsageError("k must be >= 1");
  const readapt::Bm25Index index = readapt::Bm25Index::load(index_path);

  std::vector<json> out_rows;
  std::map<std::string, std::vector<std::string>> results;
  for (const auto& row : readapt::read_jsonl(questions_path)) {
    if (!row.is_object() || !row.contains("id") || !row.contains("question")) {
      throw readapt::FormatError(questions_path.string() +
                                 ": every row needs id and question");
    }
    const std::string id = row["id"].get<std::string>();
    const auto ranked = index.query(row["question"].get<std::string>(), k);
    json ids = json::array();
    json scores = json::array();
    std::vector<std::string> retrieved;
    for (const auto& [pid, score] : ranked) {
      ids.push_back(pid);
      scores.push_back(score);
      retrieved.push_back(pid);
    }
    results[id] = std::move(retrieved);
    out_rows.push_back({{"id", id}, {"retrieved", ids}, {"scores", scores}});
  }
  readapt::write_jsonl(out, out_rows);
  std::cout << "retrieved top-" << k << " for " << out_rows.size()
            << " question(s) into " << out.string() << "\n";

  if (!gold_path.empty()) {
    std::map<std::string, std::string> gold;
    for (const auto& ex : readapt::load_examples(gold_path)) {
      if (ex.gold_passage_id) gold[ex.id] = *ex.gold_passage_id;
    }
    const double acc = readapt::retrieval_accuracy(results, gold, k);
    std::cout << std::fixed << std::setprecision(4) << "accuracy@" << k << " "
              << acc << "\n";
  }
  return kExitOk;
}

int cmd_prompt(const Global&, const std::string& template_name,
               const std::string& question, const std::string& context,
               const std::string& questions_path, const std::string& out) {
  const readapt::TemplateId id = readapt::template_from_name(template_name);
  auto render_json = [&](const std::string& q,
                         const std::optional<std::string>& ctx) {
    const auto messages = readapt::render_prompt(
        id, q,
        ctx ? std::optional<std::string_view>(*ctx) : std::nullopt);
    json arr = json::array();
    for (const auto& m : messages) {
      arr.push_back({{"role", m.role}, {"content", m.content}});
    }
    return arr;
  };

  if (!questions_path.empty()) {
    std::vector<json> rows;
    for (const auto& row : readapt::read_jsonl(questions_path)) {
      if (!row.is_object() || !row.contains("id") ||
          !row.contains("question")) {
        throw readapt::FormatError(questions_path +
                                   ": every row needs id and question");
      }
      std::optional<std::string> ctx;
      if (row.contains("context") && !row["context"].is_null()) {
        ctx = row["context"].get<std::string>();
      }
      rows.push_back(
          {{"id", row["id"].get<std::string>()},
           {"messages", render_json(row["question"].get<std::string>(), ctx)}});
    }
    if (out.empty()) {
      throw readapt::UsageError("--out is required with --questions");
    }
    readapt::write_jsonl(out, rows);
    std::cout << "rendered " << rows.size() << " prompt(s) into " << out
              << "\n";
    return kExitOk;
  }

  if (question.empty()) {
    throw readapt::UsageError("pass --question or --questions");
  }
  std::optional<std::string> ctx;
  if (!context.empty()) ctx = context;
  const json arr = render_json(question, ctx);
  if (!out.empty()) {
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw readapt::IoError("cannot write " + out);
    os << arr.dump(2) << "\n";
  }
  std::cout << arr.dump(2) << "\n";
  return kExitOk;
}

// Pre-pass: a JSON config file may set defaults for the global options.
void apply_config_defaults(int argc, char** argv, Global& g) {
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) throw readapt::IoError("cannot open config " + config_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw readapt::FormatError(config_path + ": " + e.what());
  }
  g.seed = doc.value("seed", g.seed);
  g.threads = doc.value("threads", g.threads);
  g.log_level = doc.value("log_level", g.log_level);
}

}  // namespace

int main(int argc, char** argv) {
  Global g;
  std::string config_path;

  CLI::App app{"readapt: checkpoint arithmetic for instruction adapters"};
  app.set_version_flag("--version", std::string(readapt::kVersion));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", g.seed, "Seed for randomized computations");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--log-level", g.log_level, "info, warn or error")
      ->check(CLI::IsMember({"info", "warn", "error"}));
  app.add_option("--config", config_path,
                 "JSON file with defaults for the global options");

  // diff
  auto* diff = app.add_subcommand(
      "diff", "Extract the instruction adapter: instruct - base");
  std::string d_base, d_instruct, d_out;
  bool d_skip = false;
  std::uint64_t d_shard = 0;
  diff->add_option("--base", d_base, "Pretrained checkpoint")->required();
  diff->add_option("--instruct", d_instruct, "Instruction-tuned checkpoint")
      ->required();
  diff->add_option("--out", d_out, "Output adapter file")->required();
  diff->add_flag("--skip-unmatched", d_skip,
                 "Diff the matched intersection instead of failing");
  diff->add_option("--max-shard-bytes", d_shard,
                   "Shard the output at this size");

  // compress
  auto* compress =
      app.add_subcommand("compress", "Truncated-SVD compress a dense adapter");
  std::string c_delta, c_out, c_report;
  double c_tau = 0.5;
  std::int64_t c_min_dim = 2, c_dense_max = 512;
  bool c_no_guard = false;
  compress->add_option("--delta", c_delta, "Dense adapter file")->required();
  compress->add_option("--tau", c_tau, "Explained-variance threshold (0,1]");
  compress->add_option("--out", c_out, "Output lore adapter file")->required();
  compress->add_option("--min-dim", c_min_dim,
                       "Keep matrices with min(m,n) below this dense");
  compress->add_flag("--no-storage-guard", c_no_guard,
                     "Factor even when k(m+n) >= mn");
  compress->add_option("--dense-max-dim", c_dense_max,
                       "Exact SVD cutoff; larger matrices go randomized");
  compress->add_option("--report", c_report, "Per-tensor CSV report path");

  // spectrum
  auto* spectrum = app.add_subcommand(
      "spectrum", "Write explained-variance curves for delta layers");
  std::string s_delta, s_out;
  std::vector<std::string> s_layers;
  spectrum->add_option("--delta", s_delta, "Dense adapter file")->required();
  spectrum->add_option("--layers", s_layers,
                       "Tensor names (default: every 2-D tensor)");
  spectrum->add_option("--out", s_out, "Output directory for CSV files")
      ->required();

  // densify
  auto* densify = app.add_subcommand(
      "densify", "Densify a LoRA/DoRA adapter dir into a dense adapter");
  std::string y_adapter, y_base, y_out;
  densify->add_option("--adapter", y_adapter, "Adapter directory")->required();
  densify->add_option("--base", y_base, "Base checkpoint the adapter targets")
      ->required();
  densify->add_option("--out", y_out, "Output dense adapter file")->required();

  // merge
  auto* merge = app.add_subcommand(
      "merge", "Compose base + scaled adapters into a checkpoint");
  std::string m_recipe, m_base, m_knowledge, m_re_adapter, m_dtype, m_out;
  double m_alpha = 0.5, m_beta = 0.5;
  bool m_verify = false, m_allow_oor = false;
  std::uint64_t m_shard = 0;
  merge->add_option("--recipe", m_recipe, "JSON recipe file");
  merge->add_option("--base", m_base, "Base checkpoint");
  merge->add_option("--knowledge", m_knowledge, "Knowledge adapter file");
  merge->add_option("--alpha", m_alpha, "Knowledge adapter scale");
  merge->add_option("--re-adapter", m_re_adapter, "Instruction adapter file");
  merge->add_option("--beta", m_beta, "Instruction adapter scale");
  merge->add_option("--dtype", m_dtype, "Output dtype (F32, F16, BF16)");
  merge->add_flag("--verify-digests", m_verify,
                  "Require adapter base digests to match the base");
  merge->add_flag("--allow-out-of-range", m_allow_oor,
                  "Permit scales outside [0,1]");
  merge->add_option("--out", m_out, "Output checkpoint")->required();
  merge->add_option("--max-shard-bytes", m_shard,
                    "Shard the output at this size");

  // sweep
  auto* sweep =
      app.add_subcommand("sweep", "Merge over an (alpha, beta) grid");
  std::string w_base, w_knowledge, w_re_adapter, w_out;
  std::string w_alphas = "0.5", w_betas = "0.5";
  sweep->add_option("--base", w_base, "Base checkpoint")->required();
  sweep->add_option("--knowledge", w_knowledge, "Knowledge adapter file");
  sweep->add_option("--re-adapter", w_re_adapter, "Instruction adapter file");
  sweep->add_option("--alphas", w_alphas, "Comma-separated alpha grid");
  sweep->add_option("--betas", w_betas, "Comma-separated beta grid");
  sweep->add_option("--out", w_out, "Output directory")->required();

  // score
  auto* score =
      app.add_subcommand("score", "Score predictions against references");
  std::string e_preds, e_refs, e_json, e_csv;
  score->add_option("--predictions", e_preds, "Predictions JSONL")->required();
  score->add_option("--references", e_refs, "References JSONL")->required();
  score->add_option("--out-json", e_json, "Full report JSON path");
  score->add_option("--out-csv", e_csv, "Per-example CSV path");

  // index
  auto* index = app.add_subcommand("index", "Build a BM25 passage index");
  std::string i_corpus, i_out;
  double i_k1 = 1.5, i_b = 0.75;
  index->add_option("--corpus", i_corpus, "Corpus JSONL")->required();
  index->add_option("--out", i_out, "Index output path")->required();
  index->add_option("--k1", i_k1, "BM25 k1");
  index->add_option("--b", i_b, "BM25 b");

  // retrieve
  auto* retrieve =
      app.add_subcommand("retrieve", "Rank passages for each question");
  std::string r_index, r_questions, r_out, r_gold;
  std::size_t r_k = 1;
  retrieve->add_option("--index", r_index, "BM25 index file")->required();
  retrieve->add_option("--questions", r_questions, "Questions JSONL")
      ->required();
  retrieve->add_option("--k", r_k, "Passages per question");
  retrieve->add_option("--out", r_out, "Retrieval output JSONL")->required();
  retrieve->add_option("--gold", r_gold,
                       "References JSONL with passage_id, for accuracy@k");

  // prompt
  auto* prompt =
      app.add_subcommand("prompt", "Render QA prompts from the templates");
  std::string p_template, p_question, p_context, p_questions, p_out;
  prompt->add_option("--template", p_template,
                     "llama_cb, llama_rag, gm_cb or gm_rag")
      ->required();
  prompt->add_option("--question", p_question, "Single question");
  prompt->add_option("--context", p_context, "Context passage (rag)");
  prompt->add_option("--questions", p_questions,
                     "Batch JSONL with id/question/context");
  prompt->add_option("--out", p_out, "Output path");

  try {
    apply_config_defaults(argc, argv, g);
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const readapt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*diff) {
      return cmd_diff(g, d_base, d_instruct, d_out, d_skip,
                      d_shard > 0 ? std::optional<std::uint64_t>(d_shard)
                                  : std::nullopt);
    }
    if (*compress) {
      return cmd_compress(g, c_delta, c_tau, c_out, c_min_dim, c_no_guard,
                          c_dense_max, c_report);
    }
    if (*spectrum) return cmd_spectrum(g, s_delta, s_layers, s_out);
    if (*densify) return cmd_densify(g, y_adapter, y_base, y_out);
    if (*merge) {
      readapt::MergeRecipe recipe;
      if (!m_recipe.empty()) {
        recipe = readapt::parse_recipe_file(m_recipe);
      } else {
        if (m_base.empty()) {
          throw readapt::UsageError("merge needs --recipe or --base");
        }
        recipe = recipe_from_flags(m_base, m_knowledge, m_alpha, m_re_adapter,
                                   m_beta, m_dtype, m_verify, m_allow_oor);
      }
      return cmd_merge(g, recipe, m_out,
                       m_shard > 0 ? std::optional<std::uint64_t>(m_shard)
                                   : std::nullopt);
    }
    if (*sweep) {
      return cmd_sweep(g, w_base, w_knowledge, w_re_adapter, w_alphas,
                       w_betas, w_out);
    }
    if (*score) return cmd_score(g, e_preds, e_refs, e_json, e_csv);
    if (*index) return cmd_index(g, i_corpus, i_out, i_k1, i_b);
    if (*retrieve) {
      return cmd_retrieve(g, r_index, r_questions, r_k, r_out, r_gold);
    }
    if (*prompt) {
      return cmd_prompt(g, p_template, p_question, p_context, p_questions,
                        p_out);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const readapt::NotDiffable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotDiffable;
  } catch (const readapt::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const readapt::ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const readapt::AllZero& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const readapt::DegenerateColumn& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const readapt::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const readapt::UnknownId& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const readapt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
