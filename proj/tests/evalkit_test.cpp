// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0

#include "readapt/evalkit.hpp"

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "readapt/errors.hpp"
#include "testutil.hpp"

namespace readapt {
namespace {

using testutil::TempDir;

// Independent full-table LCS, kept deliberately different from the library's
// rolling-row implementation.
std::size_t lcs_oracle(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  return dp[a.size()][b.size()];
}

const char* kEpisodeCountResponse =
    "There are a total of 291 episodes in the original Japanese version of "
    "Dragon Ball Z. However, the episode count can vary depending on the "
    "version and the country.";

TEST(NormalizeText, HandExamples) {
  EXPECT_EQ(normalize_text("Dragon Ball Z!"),
            (std::vector<std::string>{"dragon", "ball", "z"}));
  EXPECT_EQ(normalize_text(""), std::vector<std::string>{});
  EXPECT_EQ(normalize_text("  a,b  c "),
            (std::vector<std::string>{"ab", "c"}));
  EXPECT_EQ(normalize_text("Who? What!? (Why)"),
            (std::vector<std::string>{"who", "what", "why"}));
}

TEST(NormalizeText, KeepsDigitsAndMathSymbols) {
  EXPECT_EQ(normalize_text("291 episodes"),
            (std::vector<std::string>{"291", "episodes"}));
  // $ < = > + are symbols, not punctuation; they survive normalization.
  EXPECT_EQ(normalize_text("$5 > $4"),
            (std::vector<std::string>{"$5", ">", "$4"}));
}

TEST(NormalizeText, UnicodeWhitespaceAndPunctuation) {
  // U+00A0 no-break space splits; en-dash U+2013 is punctuation and is
  // dropped; text stays intact otherwise.
  EXPECT_EQ(normalize_text("one\xC2\xA0two"),
            (std::vector<std::string>{"one", "two"}));
  EXPECT_EQ(normalize_text("re\xE2\x80\x93read"),
            (std::vector<std::string>{"reread"}));
}

TEST(RougeLRecall, IdentityAndContainment) {
  EXPECT_DOUBLE_EQ(rouge_l_recall("new york", "new york"), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall("new york", "i visited New York city"),
                   1.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall("alpha beta gamma", "alpha gamma"),
                   2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall("answer", ""), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall("", "anything"), 0.0);
}

TEST(RougeLRecall, SubsequenceWithoutContainment) {
  // "new ... york" appears in order but not contiguously: full recall,
  // no exact match.
  EXPECT_DOUBLE_EQ(rouge_l_recall("new york", "new haven and york"), 1.0);
  EXPECT_EQ(exact_match_anywhere("new york", "new haven and york"), 0);
}

TEST(RougeLRecall, EpisodeCountFixture) {
  EXPECT_DOUBLE_EQ(rouge_l_recall("291", kEpisodeCountResponse), 1.0);
  EXPECT_EQ(exact_match_anywhere("291", kEpisodeCountResponse), 1);
}

TEST(RougeLRecall, CaseAndPunctuationInvariant) {
  EXPECT_DOUBLE_EQ(rouge_l_recall("New York!", "new york"), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall("new york", "NEW, YORK."), 1.0);
}

TEST(RougeLRecall, MultiReferenceTakesMax) {
  std::vector<std::string> refs = {"alpha beta gamma", "delta"};
  EXPECT_DOUBLE_EQ(rouge_l_recall(refs, "delta"), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l_recall(refs, "alpha gamma"), 2.0 / 3.0);
  // Multi-reference score is never below any single-reference score.
  for (const auto& r : refs) {
    EXPECT_GE(rouge_l_recall(refs, "alpha gamma"),
              rouge_l_recall(r, "alpha gamma"));
  }
}

TEST(RougeLRecall, MatchesOracleOnRandomSequences) {
  std::mt19937_64 rng(509);
  std::uniform_int_distribution<int> len(0, 30);
  std::uniform_int_distribution<int> word(0, 9);
  const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee",
                                          "ff", "gg", "hh", "ii", "jj"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ref_tokens(static_cast<std::size_t>(len(rng)));
    std::vector<std::string> resp_tokens(static_cast<std::size_t>(len(rng)));
    for (auto& t : ref_tokens) t = vocab[static_cast<std::size_t>(word(rng))];
    for (auto& t : resp_tokens) t = vocab[static_cast<std::size_t>(word(rng))];
    std::string ref, resp;
    for (const auto& t : ref_tokens) ref += t + " ";
    for (const auto& t : resp_tokens) resp += t + " ";

    double got = rouge_l_recall(ref, resp);
    double want = ref_tokens.empty()
                      ? 0.0
                      : static_cast<double>(lcs_oracle(ref_tokens, resp_tokens)) /
                            static_cast<double>(ref_tokens.size());
    EXPECT_DOUBLE_EQ(got, want);
  }
}

TEST(ExactMatchAnywhere, WindowScan) {
  EXPECT_EQ(exact_match_anywhere("new york", "i visited new york city"), 1);
  EXPECT_EQ(exact_match_anywhere("new york", "york new"), 0);
  EXPECT_EQ(exact_match_anywhere("a b a", "x a b a y"), 1);
  // Empty reference normalizes to nothing -> no match.
  EXPECT_EQ(exact_match_anywhere("", "whatever"), 0);
}

TEST(ExactMatchAnywhere, ImpliesFullRecall) {
  std::mt19937_64 rng(521);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_int_distribution<int> word(0, 4);
  const std::vector<std::string> vocab = {"red", "green", "blue", "cyan",
                                          "teal"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string ref, resp;
    int rl = len(rng), sl = len(rng);
    for (int i = 0; i < rl; ++i)
      ref += vocab[static_cast<std::size_t>(word(rng))] + " ";
    for (int i = 0; i < sl; ++i)
      resp += vocab[static_cast<std::size_t>(word(rng))] + " ";
    if (exact_match_anywhere(ref, resp) == 1) {
      EXPECT_DOUBLE_EQ(rouge_l_recall(ref, resp), 1.0);
    }
  }
}

// --- prediction-file scoring -----------------------------------------------

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream os(path);
  for (const auto& l : lines) os << l << "\n";
}

std::vector<std::string> reference_lines() {
  return {
      R"({"id": "ex1", "question": "how many episodes", "answers": ["291"]})",
      R"({"id": "ex2", "question": "where", "answers": ["new york"]})",
      R"({"id": "ex3", "question": "letters", "answers": ["alpha beta gamma"]})",
      R"({"id": "ex4", "question": "quiet", "answers": ["answer"]})",
  };
}

TEST(ScoreFile, HandComputedMeans) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(
      tmp / "preds.jsonl",
      {
          std::string(R"({"id": "ex1", "response": ")") + kEpisodeCountResponse +
              R"("})",
          R"({"id": "ex2", "response": "new haven and york"})",
          R"({"id": "ex3", "response": "alpha gamma"})",
          R"({"id": "ex4", "response": ""})",
      });
  auto report = score_file(tmp / "preds.jsonl", tmp / "refs.jsonl");
  EXPECT_EQ(report.n, 4u);
  EXPECT_EQ(report.missing_predictions, 0u);
  // Per example: (1, 1), (1, 0), (2/3, 0), (0, 0).
  EXPECT_DOUBLE_EQ(report.rouge_l_recall_mean, (1.0 + 1.0 + 2.0 / 3.0) / 4.0);
  EXPECT_DOUBLE_EQ(report.exact_match_mean, 0.25);
  ASSERT_EQ(report.per_example.size(), 4u);

  // Means equal the per-example average exactly.
  double rouge_sum = 0.0, em_sum = 0.0;
  for (const auto& pe : report.per_example) {
    rouge_sum += pe.rouge;
    em_sum += pe.em;
  }
  EXPECT_NEAR(report.rouge_l_recall_mean, rouge_sum / 4.0, 1e-12);
  EXPECT_NEAR(report.exact_match_mean, em_sum / 4.0, 1e-12);
}

TEST(ScoreFile, MissingPredictionsScoreZero) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(tmp / "preds.jsonl",
              {R"({"id": "ex2", "response": "new york"})"});
  auto report = score_file(tmp / "preds.jsonl", tmp / "refs.jsonl");
  EXPECT_EQ(report.n, 4u);
  EXPECT_EQ(report.missing_predictions, 3u);
  EXPECT_DOUBLE_EQ(report.rouge_l_recall_mean, 0.25);
  EXPECT_DOUBLE_EQ(report.exact_match_mean, 0.25);
}

TEST(ScoreFile, UnknownPredictionIdThrows) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(tmp / "preds.jsonl",
              {R"({"id": "mystery", "response": "hm"})"});
  EXPECT_THROW(score_file(tmp / "preds.jsonl", tmp / "refs.jsonl"), UnknownId);
}

TEST(ScoreFile, DuplicatePredictionThrows) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(tmp / "preds.jsonl", {R"({"id": "ex1", "response": "a"})",
                                    R"({"id": "ex1", "response": "b"})"});
  EXPECT_THROW(score_file(tmp / "preds.jsonl", tmp / "refs.jsonl"),
               FormatError);
}

TEST(ScoreFile, MalformedLineReportsLineNumber) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(tmp / "preds.jsonl", {R"({"id": "ex1", "response": "ok"})",
                                    "not json at all"});
  try {
    score_file(tmp / "preds.jsonl", tmp / "refs.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos)
        << e.what();
  }
}

TEST(LoadExamples, ValidatesFields) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl",
              {R"({"id": "a", "answers": ["x"], "passage_id": "p1"})",
               R"({"id": "b", "question": "q", "answers": ["y", "z"]})"});
  auto examples = load_examples(tmp / "refs.jsonl");
  ASSERT_EQ(examples.size(), 2u);
  EXPECT_EQ(examples[0].gold_passage_id.value(), "p1");
  EXPECT_EQ(examples[0].question, "");
  EXPECT_FALSE(examples[1].gold_passage_id.has_value());
  EXPECT_EQ(examples[1].answers.size(), 2u);

  write_lines(tmp / "bad1.jsonl", {R"({"id": "a", "answers": []})"});
  EXPECT_THROW(load_examples(tmp / "bad1.jsonl"), FormatError);
  write_lines(tmp / "bad2.jsonl", {R"({"answers": ["x"]})"});
  EXPECT_THROW(load_examples(tmp / "bad2.jsonl"), FormatError);
  write_lines(tmp / "bad3.jsonl", {R"({"id": "a", "answers": ["x"]})",
                                   R"({"id": "a", "answers": ["y"]})"});
  EXPECT_THROW(load_examples(tmp / "bad3.jsonl"), FormatError);
}

TEST(ReportWriters, JsonAndCsv) {
  TempDir tmp;
  write_lines(tmp / "refs.jsonl", reference_lines());
  write_lines(tmp / "preds.jsonl",
              {R"({"id": "ex1", "response": "291"})",
               R"({"id": "ex2", "response": "boston"})",
               R"({"id": "ex3", "response": "alpha beta gamma"})",
               R"({"id": "ex4", "response": "answer"})"});
  auto report = score_file(tmp / "preds.jsonl", tmp / "refs.jsonl");

  write_report_json(report, tmp / "report.json");
  std::ifstream is(tmp / "report.json");
  auto doc = nlohmann::json::parse(is);
  EXPECT_EQ(doc["n"].get<std::size_t>(), 4u);
  EXPECT_DOUBLE_EQ(doc["rouge_l_recall_mean"].get<double>(),
                   report.rouge_l_recall_mean);
  EXPECT_EQ(doc["per_example"].size(), 4u);

  write_report_csv(report, tmp / "report.csv");
  std::ifstream cs(tmp / "report.csv");
  std::string header;
  std::getline(cs, header);
  EXPECT_EQ(header, "id,rouge_l_recall,exact_match");
  int rows = 0;
  std::string line;
  while (std::getline(cs, line)) {
    if (!line.empty()) ++rows;
  }
  EXPECT_EQ(rows, 4);
}

}  // namespace
}  // namespace readapt
