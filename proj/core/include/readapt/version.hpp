// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace readapt {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace readapt
