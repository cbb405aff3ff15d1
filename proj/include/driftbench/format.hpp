#pragma once

#include <cstdint>
#include <string>

namespace driftbench {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// "YYYY-MM-DD HH:MM:SS" (UTC).
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace driftbench
