// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "bioner/cli/config.hpp"

namespace bioner::cli {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kLockFile = ".lock";
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";
inline constexpr const char* kEffectiveConfig = "effective.cfg";

/// Runs `command` writing only under `out_dir`. While running, the
/// directory holds `.lock` (a second run on it fails) and an `INCOMPLETE`
/// marker, which is removed on success and keeps the error text on
/// failure. Any error propagates as an exception after that bookkeeping.
/// `console` gets a short human summary.
void run(std::string_view command, const RunConfig& config, const std::filesystem::path& out_dir,
         std::ostream& console);

}  // namespace bioner::cli
