// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Step-indexed training log: one "step<TAB>metric<TAB>value" line per record.

#pragma once

#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>

namespace bioner::optim {

struct LogRecord {
  std::size_t step = 0;
  std::string metric;
  double value = 0.0;

  bool operator==(const LogRecord&) const = default;
};

/// Values use %.9g, which round-trips float exactly.
inline std::string format_log_line(const LogRecord& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", r.value);
  return std::to_string(r.step) + "\t" + r.metric + "\t" + buf + "\n";
}

using LogSink = std::function<void(const LogRecord&)>;

}  // namespace bioner::optim
