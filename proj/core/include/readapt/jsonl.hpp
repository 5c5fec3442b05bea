// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

namespace readapt {

// Reads line-delimited JSON. Blank lines are skipped; a malformed line
// raises FormatError naming the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& rows);

}  // namespace readapt
