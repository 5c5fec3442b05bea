// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "readapt/errors.hpp"
#include "readapt/jsonl.hpp"

namespace readapt {
namespace {

using nlohmann::json;

std::string ensure_suffix(std::string_view s, char c) {
  std::string out(s);
  if (out.empty() || out.back() != c) out.push_back(c);
  return out;
}

}  // namespace

std::vector<Passage> load_passages(const std::filesystem::path& path) {
  std::vector<Passage> corpus;
  std::set<std::string> seen;
  for (const auto& row : read_jsonl(path)) {
    if (!row.is_object() || !row.contains("id") || !row.contains("text")) {
      throw FormatError(path.string() + ": every passage needs id and text");
    }
    Passage p{row["id"].get<std::string>(), row["text"].get<std::string>()};
    if (!seen.insert(p.id).second) {
      throw FormatError(path.string() + ": duplicate passage id '" + p.id +
                        "'");
    }
    corpus.push_back(std::move(p));
  }
  return corpus;
}

Bm25Index Bm25Index::build(const std::vector<Passage>& corpus, double k1,
                           double b) {
  if (corpus.empty()) {
    throw EmptyCorpus("cannot build a BM25 index over an empty corpus");
  }
  Bm25Index index;
  index.k1_ = k1;
  index.b_ = b;

  std::set<std::string> seen;
  std::size_t total_len = 0;
  for (const auto& p : corpus) {
    if (!seen.insert(p.id).second) {
      throw FormatError("duplicate passage id '" + p.id + "' in corpus");
    }
    Doc doc;
    doc.id = p.id;
    for (auto& token : normalize_text(p.text)) {
      ++doc.tf[std::move(token)];
      ++doc.length;
    }
    total_len += doc.length;
    index.docs_.push_back(std::move(doc));
  }
  // id order makes everything downstream independent of corpus order.
  std::sort(index.docs_.begin(), index.docs_.end(),
            [](const Doc& a, const Doc& b) { return a.id < b.id; });
  for (const auto& doc : index.docs_) {
    for (const auto& [term, tf] : doc.tf) ++index.df_[term];
  }
  index.avgdl_ =
      static_cast<double>(total_len) / static_cast<double>(corpus.size());
  return index;
}

std::size_t Bm25Index::df(std::string_view term) const {
  const auto it = df_.find(std::string(term));
  return it == df_.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, double>> Bm25Index::query(
    std::string_view q, std::size_t top_k) const {
  const std::vector<std::string> terms = normalize_text(q);
  if (terms.empty()) return {};

  const auto n = static_cast<double>(docs_.size());
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& doc : docs_) {
    double score = 0.0;
    for (const auto& term : terms) {
      const auto tf_it = doc.tf.find(term);
      if (tf_it == doc.tf.end()) continue;
      const auto df_it = df_.find(term);
      const auto df = static_cast<double>(df_it->second);
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const auto tf = static_cast<double>(tf_it->second);
      const double denom =
          tf + k1_ * (1.0 - b_ + b_ * static_cast<double>(doc.length) /
                                     avgdl_);
      score += idf * tf * (k1_ + 1.0) / denom;
    }
    if (score > 0.0) scored.emplace_back(doc.id, score);
  }
  // Descending score; docs_ is already id-ascending, so a stable sort
  // leaves equal scores in id order.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (scored.size() > top_k) scored.resize(top_k);
  return scored;
}

void Bm25Index::save(const std::filesystem::path& path) const {
  json docs = json::array();
  for (const auto& doc : docs_) {
    docs.push_back(
        {{"id", doc.id}, {"length", doc.length}, {"tf", doc.tf}});
  }
  const json doc = {{"kind", "bm25-index"},
                    {"k1", k1_},
                    {"b", b_},
                    {"docs", docs}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
  json doc;
  try {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed index: " + e.what());
  }
  if (!doc.is_object() || doc.value("kind", "") != "bm25-index" ||
      !doc.contains("docs")) {
    throw FormatError(path.string() + ": not a bm25 index file");
  }
  Bm25Index index;
  index.k1_ = doc.value("k1", 1.5);
  index.b_ = doc.value("b", 0.75);
  std::size_t total_len = 0;
  for (const auto& d : doc["docs"]) {
    Doc parsed;
    parsed.id = d["id"].get<std::string>();
    parsed.length = d["length"].get<std::size_t>();
    for (const auto& [term, tf] : d["tf"].items()) {
      parsed.tf[term] = tf.get<int>();
    }
    total_len += parsed.length;
    index.docs_.push_back(std::move(parsed));
  }
  if (index.docs_.empty()) {
    throw EmptyCorpus(path.string() + ": index holds no documents");
  }
  std::sort(index.docs_.begin(), index.docs_.end(),
            [](const Doc& a, const Doc& b) { return a.id < b.id; });
  for (const auto& d : index.docs_) {
    for (const auto& [term, tf] : d.tf) ++index.df_[term];
  }
  index.avgdl_ = static_cast<double>(total_len) /
                 static_cast<double>(index.docs_.size());
  return index;
}

Passage oracle_retrieve(const QAExample& example,
                        const std::vector<Passage>& corpus) {
  if (!example.gold_passage_id) {
    throw MissingGold("example '" + example.id + "' has no gold passage id");
  }
  for (const auto& p : corpus) {
    if (p.id == *example.gold_passage_id) return p;
  }
  throw MissingGold("gold passage '" + *example.gold_passage_id +
                    "' for example '" + example.id +
                    "' is not in the corpus");
}

double retrieval_accuracy(
    const std::map<std::string, std::vector<std::string>>& results,
    const std::map<std::string, std::string>& gold, std::size_t at_k) {
  if (results.size() != gold.size()) {
    throw KeyMismatch("results and gold cover different example sets (" +
                      std::to_string(results.size()) + " vs " +
                      std::to_string(gold.size()) + " entries)");
  }
  std::size_t hits = 0;
  for (const auto& [id, retrieved] : results) {
    const auto it = gold.find(id);
    if (it == gold.end()) {
      throw KeyMismatch("example '" + id + "' has no gold label");
    }
    const std::size_t limit = std::min(at_k, retrieved.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (retrieved[i] == it->second) {
        ++hits;
        break;
      }
    }
  }
  return gold.empty() ? 0.0
                      : static_cast<double>(hits) /
                            static_cast<double>(gold.size());
}

TemplateId template_from_name(std::string_view name) {
  if (name == "llama_cb") return TemplateId::llama_cb;
  if (name == "llama_rag") return TemplateId::llama_rag;
  if (name == "gm_cb") return TemplateId::gm_cb;
  if (name == "gm_rag") return TemplateId::gm_rag;
  throw UsageError("unknown prompt template '" + std::string(name) +
                   "' (expected llama_cb, llama_rag, gm_cb or gm_rag)");
}

std::string template_name(TemplateId id) {
  switch (id) {
    case TemplateId::llama_cb:
      return "llama_cb";
    case TemplateId::llama_rag:
      return "llama_rag";
    case TemplateId::gm_cb:
      return "gm_cb";
    case TemplateId::gm_rag:
      return "gm_rag";
  }
  return "unknown";
}

std::vector<PromptMessage> render_prompt(
    TemplateId id, std::string_view question,
    std::optional<std::string_view> context) {
  const bool rag = id == TemplateId::llama_rag || id == TemplateId::gm_rag;
  if (rag && !context) {
    throw MissingContext("template '" + template_name(id) +
                         "' requires a context passage");
  }
  // A trailing '?' (or '.' after the context) is added only when the text
  // does not already end with it, so questions that arrive with their own
  // punctuation do not get doubled.
  const std::string q = ensure_suffix(question, '?');
  switch (id) {
    case TemplateId::llama_cb:
      return {{"system", "Answer the following question."}, {"user", q}};
    case TemplateId::llama_rag:
      return {{"system",
               "Answer the following question given this context: " +
                   ensure_suffix(*context, '.')},
              {"user", q}};
    case TemplateId::gm_cb:
      return {{"user", q}};
    case TemplateId::gm_rag:
      return {{"user", "Answer the following question given this context: " +
                           std::string(*context) + "\nQuestion: " + q}};
  }
  throw UsageError("unhandled template id");
}

}  // namespace readapt
