#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace viewclean {

// ASCII-only case handling; bytes >= 0x80 pass through untouched so UTF-8
// sequences are never altered.
std::string ascii_lower(std::string_view s);
bool ascii_iequals(std::string_view a, std::string_view b) noexcept;

/// UTC, millisecond precision: 2024-05-01T12:00:00.000Z
std::string format_iso8601(std::chrono::system_clock::time_point tp);

}  // namespace viewclean
