// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace readapt {

// Shared normalization for scoring and retrieval: lowercase, delete
// punctuation, split on whitespace. "a,b" becomes the single token "ab".
std::vector<std::string> normalize_text(std::string_view s);

// Length of the longest common subsequence of the normalized token
// sequences divided by the normalized reference length; 0 when the
// reference normalizes to nothing. Multi-reference variants take the max.
double rouge_l_recall(std::string_view reference, std::string_view response);
double rouge_l_recall(const std::vector<std::string>& references,
                      std::string_view response);

// 1 iff the normalized reference tokens occur contiguously anywhere in the
// normalized response tokens; max over multiple references.
int exact_match_anywhere(std::string_view reference, std::string_view response);
int exact_match_anywhere(const std::vector<std::string>& references,
                         std::string_view response);

struct QAExample {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<std::string> gold_passage_id;
};

// Reference JSONL: {"id", "question", "answers": [...], "passage_id"?}.
std::vector<QAExample> load_examples(const std::filesystem::path& path);

struct EvalReport {
  struct PerExample {
    std::string id;
    double rouge = 0.0;
    double em = 0.0;
  };
  std::size_t n = 0;
  std::size_t missing_predictions = 0;
  double rouge_l_recall_mean = 0.0;  // in [0,1]
  double exact_match_mean = 0.0;     // in [0,1]
  std::vector<PerExample> per_example;
};

// Scores a prediction file ({"id","response"} per line) against a reference
// file. Every prediction id must name a reference example (UnknownId);
// references without a prediction score 0 and are counted as missing.
EvalReport score_file(const std::filesystem::path& predictions,
                      const std::filesystem::path& references);

void write_report_json(const EvalReport& report,
                       const std::filesystem::path& path);
// CSV columns: id,rouge_l_recall,exact_match.
void write_report_csv(const EvalReport& report,
                      const std::filesystem::path& path);

}  // namespace readapt
