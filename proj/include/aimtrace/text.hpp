// SPDX-License-Identifier: Apache-2.0
//
// Small string and byte helpers shared by the parsers.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aimtrace {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}
inline std::string_view as_chars(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool iends_with(std::string_view s, std::string_view suffix);
std::string_view trim(std::string_view s);

/// Replaces invalid UTF-8 sequences with U+FFFD. Second member is true when
/// any replacement happened.
std::pair<std::string, bool> sanitize_utf8(std::string_view s);

void append_utf8(std::string& out, char32_t cp);

/// Decodes UTF-16LE to UTF-8. Unpaired surrogates become U+FFFD; a trailing
/// odd byte is ignored. Decoding stops at the first NUL when stop_at_nul.
std::string utf16le_to_utf8(ByteView data, bool stop_at_nul = false);
Bytes utf8_to_utf16le(std::string_view s);

std::string percent_decode(std::string_view s);
/// Encodes everything except RFC 3986 unreserved characters.
std::string percent_encode(std::string_view s);

std::optional<std::uint32_t> parse_ipv4(std::string_view s);
std::string format_ipv4(std::uint32_t addr);

std::string hex_string(ByteView b);

}  // namespace aimtrace
