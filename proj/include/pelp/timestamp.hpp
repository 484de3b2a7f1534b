#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pelp {

/// Microseconds since the Unix epoch (UTC). Integer-format logs store their
/// raw value unchanged.
using Ticks = std::int64_t;

/// Format names accepted by parse_timestamp besides strptime-style patterns.
inline constexpr std::string_view kIsoFormat = "iso8601";
inline constexpr std::string_view kIntegerFormat = "integer";

/// Parses `text` according to `format`:
///   "iso8601"  YYYY-MM-DD[(T| )HH:MM[:SS[.ffffff]]][Z|(+|-)HH[:]MM]
///   "integer"  a signed decimal integer taken as raw ticks
///   otherwise  a std::get_time pattern (e.g. "%d/%m/%Y %H:%M:%S"), optionally
///              followed in the input by ".fraction" seconds
/// Throws ParseError on any malformed or trailing input.
Ticks parse_timestamp(std::string_view text, std::string_view format = kIsoFormat);

}  // namespace pelp
