// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/evalkit.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "readapt/errors.hpp"
#include "readapt/jsonl.hpp"

namespace readapt {
namespace {

// Whitespace codepoints treated as token separators.
bool is_space_cp(std::uint32_t cp) {
  switch (cp) {
    case ' ':
    case '\t':
    case '\n':
    case '\r':
    case '\v':
    case '\f':
      return true;
    default:
      break;
  }
  return cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

// Unicode general-category-P punctuation, Basic Multilingual Plane subset.
// Symbols ($ + < = > ^ ` | ~ and friends) are deliberately NOT stripped.
bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    switch (cp) {
      case '!':
      case '"':
      case '#':
      case '%':
      case '&':
      case '\'':
      case '(':
      case ')':
      case '*':
      case ',':
      case '-':
      case '.':
      case '/':
      case ':':
      case ';':
      case '?':
      case '@':
      case '[':
      case '\\':
      case ']':
      case '_':
      case '{':
      case '}':
        return true;
      default:
        return false;
    }
  }
  struct Range {
    std::uint32_t lo, hi;
  };
  static constexpr Range kRanges[] = {
      {0x00A1, 0x00A1}, {0x00A7, 0x00A7}, {0x00AB, 0x00AB}, {0x00B6, 0x00B7},
      {0x00BB, 0x00BB}, {0x00BF, 0x00BF}, {0x055A, 0x055F}, {0x0589, 0x058A},
      {0x05BE, 0x05BE}, {0x05C0, 0x05C0}, {0x05C3, 0x05C3}, {0x05C6, 0x05C6},
      {0x05F3, 0x05F4}, {0x0609, 0x060A}, {0x060C, 0x060D}, {0x061B, 0x061B},
      {0x061E, 0x061F}, {0x066A, 0x066D}, {0x06D4, 0x06D4}, {0x0700, 0x070D},
      {0x0964, 0x0965}, {0x0970, 0x0970}, {0x0DF4, 0x0DF4}, {0x0E4F, 0x0E4F},
      {0x0E5A, 0x0E5B}, {0x0F04, 0x0F12}, {0x104A, 0x104F}, {0x10FB, 0x10FB},
      {0x1360, 0x1368}, {0x166D, 0x166E}, {0x169B, 0x169C}, {0x16EB, 0x16ED},
      {0x1735, 0x1736}, {0x17D4, 0x17D6}, {0x17D8, 0x17DA}, {0x1800, 0x180A},
      {0x1944, 0x1945}, {0x19DE, 0x19DF}, {0x1A1E, 0x1A1F}, {0x1B5A, 0x1B60},
      {0x2010, 0x2027}, {0x2030, 0x2043}, {0x2045, 0x2051}, {0x2053, 0x205E},
      {0x207D, 0x207E}, {0x208D, 0x208E}, {0x2329, 0x232A}, {0x2768, 0x2775},
      {0x27C5, 0x27C6}, {0x27E6, 0x27EF}, {0x2983, 0x2998}, {0x29D8, 0x29DB},
      {0x29FC, 0x29FD}, {0x2CF9, 0x2CFC}, {0x2CFE, 0x2CFF}, {0x2E00, 0x2E4F},
      {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301F}, {0x3030, 0x3030},
      {0x303D, 0x303D}, {0x30A0, 0x30A0}, {0x30FB, 0x30FB}, {0xFD3E, 0xFD3F},
      {0xFE10, 0xFE19}, {0xFE30, 0xFE52}, {0xFE54, 0xFE61}, {0xFE63, 0xFE63},
      {0xFE68, 0xFE68}, {0xFE6A, 0xFE6B}, {0xFF01, 0xFF03}, {0xFF05, 0xFF0A},
      {0xFF0C, 0xFF0F}, {0xFF1A, 0xFF1B}, {0xFF1F, 0xFF20}, {0xFF3B, 0xFF3D},
      {0xFF3F, 0xFF3F}, {0xFF5B, 0xFF5B}, {0xFF5D, 0xFF5D}, {0xFF5F, 0xFF65},
  };
  for (const auto& r : kRanges) {
    if (cp < r.lo) return false;  // ranges are sorted
    if (cp <= r.hi) return true;
  }
  return false;
}

// Decodes the codepoint starting at byte i, advancing i past it. Malformed
// sequences fall back to the single byte value so no input ever fails.
std::uint32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  std::uint32_t cp = b0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  }
  if (len == 1 || i + len > s.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

// Longest common subsequence length, O(|a|*|b|) with two rolling rows.
int lcs_length(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<int> prev(b.size() + 1, 0);
  std::vector<int> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<std::string> normalize_text(std::string_view s) {
  std::vector<std::string> tokens;
  std::string token;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    const std::uint32_t cp = next_codepoint(s, i);
    if (is_space_cp(cp)) {
      if (!token.empty()) {
        tokens.push_back(std::move(token));
        token.clear();
      }
      continue;
    }
    if (is_punct_cp(cp)) continue;  // deleted, not a separator
    if (cp >= 'A' && cp <= 'Z') {
      token.push_back(static_cast<char>(cp - 'A' + 'a'));
    } else {
      token.append(s.substr(start, i - start));
    }
  }
  if (!token.empty()) tokens.push_back(std::move(token));
  return tokens;
}

double rouge_l_recall(std::string_view reference, std::string_view response) {
  const std::vector<std::string> ref = normalize_text(reference);
  if (ref.empty()) return 0.0;
  const std::vector<std::string> res = normalize_text(response);
  return static_cast<double>(lcs_length(ref, res)) /
         static_cast<double>(ref.size());
}

double rouge_l_recall(const std::vector<std::string>& references,
                      std::string_view response) {
  double best = 0.0;
  for (const auto& ref : references) {
    best = std::max(best, rouge_l_recall(ref, response));
  }
  return best;
}

int exact_match_anywhere(std::string_view reference,
                         std::string_view response) {
  const std::vector<std::string> ref = normalize_text(reference);
  if (ref.empty()) return 0;
  const std::vector<std::string> res = normalize_text(response);
  if (ref.size() > res.size()) return 0;
  return std::search(res.begin(), res.end(), ref.begin(), ref.end()) !=
                 res.end()
             ? 1
             : 0;
}

int exact_match_anywhere(const std::vector<std::string>& references,
                         std::string_view response) {
  for (const auto& ref : references) {
    if (exact_match_anywhere(ref, response) == 1) return 1;
  }
  return 0;
}

std::vector<QAExample> load_examples(const std::filesystem::path& path) {
  std::vector<QAExample> examples;
  std::set<std::string> seen;
  for (const auto& row : read_jsonl(path)) {
    if (!row.is_object() || !row.contains("id") || !row.contains("answers") ||
        !row["answers"].is_array() || row["answers"].empty()) {
      throw FormatError(path.string() +
                        ": every example needs an id and non-empty answers");
    }
    QAExample ex;
    ex.id = row["id"].get<std::string>();
    ex.question = row.value("question", std::string());
    for (const auto& a : row["answers"]) {
      ex.answers.push_back(a.get<std::string>());
    }
    if (row.contains("passage_id") && !row["passage_id"].is_null()) {
      ex.gold_passage_id = row["passage_id"].get<std::string>();
    }
    if (!seen.insert(ex.id).second) {
      throw FormatError(path.string() + ": duplicate example id '" + ex.id +
                        "'");
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

EvalReport score_file(const std::filesystem::path& predictions,
                      const std::filesystem::path& references) {
  const std::vector<QAExample> refs = load_examples(references);
  std::set<std::string> ref_ids;
  for (const auto& ex : refs) ref_ids.insert(ex.id);

  std::map<std::string, std::string> responses;
  for (const auto& row : read_jsonl(predictions)) {
    if (!row.is_object() || !row.contains("id") || !row.contains("response")) {
      throw FormatError(predictions.string() +
                        ": every prediction needs id and response");
    }
    const std::string id = row["id"].get<std::string>();
    if (ref_ids.count(id) == 0) {
      throw UnknownId(predictions.string() + ": prediction id '" + id +
                      "' has no reference example");
    }
    if (!responses.emplace(id, row["response"].get<std::string>()).second) {
      throw FormatError(predictions.string() + ": duplicate prediction id '" +
                        id + "'");
    }
  }

  EvalReport report;
  report.n = refs.size();
  double rouge_sum = 0.0;
  double em_sum = 0.0;
  for (const auto& ex : refs) {
    EvalReport::PerExample pe;
    pe.id = ex.id;
    const auto it = responses.find(ex.id);
    if (it == responses.end()) {
      ++report.missing_predictions;  // scored as zero
    } else {
      pe.rouge = rouge_l_recall(ex.answers, it->second);
      pe.em = exact_match_anywhere(ex.answers, it->second);
    }
    rouge_sum += pe.rouge;
    em_sum += pe.em;
    report.per_example.push_back(std::move(pe));
  }
  if (report.n > 0) {
    report.rouge_l_recall_mean = rouge_sum / static_cast<double>(report.n);
    report.exact_match_mean = em_sum / static_cast<double>(report.n);
  }
  return report;
}

void write_report_json(const EvalReport& report,
                       const std::filesystem::path& path) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& pe : report.per_example) {
    per.push_back({{"id", pe.id},
                   {"rouge_l_recall", pe.rouge},
                   {"exact_match", pe.em}});
  }
  const nlohmann::json doc = {
      {"n", report.n},
      {"missing_predictions", report.missing_predictions},
      {"rouge_l_recall_mean", report.rouge_l_recall_mean},
      {"exact_match_mean", report.exact_match_mean},
      {"per_example", per}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

void write_report_csv(const EvalReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "id,rouge_l_recall,exact_match\n";
  for (const auto& pe : report.per_example) {
    out << pe.id << ',' << std::setprecision(17) << pe.rouge << ',' << pe.em
        << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace readapt
