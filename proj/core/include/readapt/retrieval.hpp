// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "readapt/evalkit.hpp"

namespace readapt {

struct Passage {
  std::string id;
  std::string text;
};

// Corpus JSONL: {"id": str, "text": str}.
std::vector<Passage> load_passages(const std::filesystem::path& path);

// Lexical BM25 index over normalize_text tokens. Documents are held in id
// order so that build and query results are independent of corpus order;
// ties in score break by passage id ascending.
class Bm25Index {
 public:
  static Bm25Index build(const std::vector<Passage>& corpus, double k1 = 1.5,
                         double b = 0.75);

  // IDF(t) = ln(1 + (N - df + 0.5)/(df + 0.5)), always positive; documents
  // containing no query term are omitted. Empty queries return nothing.
  std::vector<std::pair<std::string, double>> query(std::string_view q,
                                                    std::size_t top_k) const;

  std::size_t doc_count() const { return docs_.size(); }
  double avgdl() const { return avgdl_; }
  std::size_t df(std::string_view term) const;
  double k1() const { return k1_; }
  double b() const { return b_; }

  void save(const std::filesystem::path& path) const;
  static Bm25Index load(const std::filesystem::path& path);

 private:
  struct Doc {
    std::string id;
    std::size_t length = 0;
    std::map<std::string, int> tf;
  };
  std::vector<Doc> docs_;  // id-ascending
  std::unordered_map<std::string, std::size_t> df_;
  double avgdl_ = 0.0;
  double k1_ = 1.5;
  double b_ = 0.75;
};

// Returns the example's gold passage; MissingGold when the example has no
// gold id or the corpus lacks it.
Passage oracle_retrieve(const QAExample& example,
                        const std::vector<Passage>& corpus);

// Fraction of examples whose gold id appears among the first at_k retrieved
// ids. Result and gold key sets must be equal (KeyMismatch).
double retrieval_accuracy(
    const std::map<std::string, std::vector<std::string>>& results,
    const std::map<std::string, std::string>& gold, std::size_t at_k);

struct PromptMessage {
  std::string role;
  std::string content;
};

enum class TemplateId { llama_cb, llama_rag, gm_cb, gm_rag };

TemplateId template_from_name(std::string_view name);
std::string template_name(TemplateId id);

// Renders the fixed QA prompt templates. The llama variants emit a system
// turn plus a user turn; the gm (Gemma/Mistral) variants emit a single user
// turn. RAG variants require a context passage (MissingContext).
std::vector<PromptMessage> render_prompt(
    TemplateId id, std::string_view question,
    std::optional<std::string_view> context = std::nullopt);

}  // namespace readapt
