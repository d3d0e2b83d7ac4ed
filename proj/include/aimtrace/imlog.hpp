// SPDX-License-Identifier: Apache-2.0
//
// AIM 7 HTML IM logs. The parser scans table rows rather than building a DOM,
// so carved fragments that stop mid-document still yield their complete rows.
//
//   <tr><td class='time'>Sunday, January 18, 2015</td></tr>
//   <tr><td class='LOCAL'>Suspect (11:03:39 PM)</td><td class='msg' width='100'>
//       <FONT face='Arial' size='2' color='#000000'>hello</FONT></td></tr>
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aimtrace/evidence.hpp"

namespace aimtrace::imlog {

enum class Direction { FromOwner, FromCorrespondent, Unknown };

struct Font {
  std::string face;
  std::string size;
  std::string color;
  friend bool operator==(const Font&, const Font&) = default;
};

struct ChatMessage {
  std::string sender_screen_name;
  Direction direction = Direction::Unknown;
  std::string raw_class;             // verbatim class attribute of the sender cell
  std::optional<LocalTime> sent_at;  // needs both a preceding date row and a time token
  std::string body_text;
  std::optional<Font> font;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class Origin { File, Carved };

struct Conversation {
  std::optional<std::string> owner_screen_name;
  std::optional<std::string> correspondent_screen_name;
  std::vector<ChatMessage> messages;
  Origin origin = Origin::File;

  std::size_t date_rows = 0;
  std::size_t skipped_rows = 0;  // <tr> elements that matched neither row form
  bool lossy = false;
};

/// Never throws on content; unrecognized rows are counted in skipped_rows.
Conversation parse_im_log(std::string_view html, std::optional<std::string> owner = std::nullopt,
                          std::optional<std::string> correspondent = std::nullopt, Origin origin = Origin::File);

/// AIM screen names compare without spaces and case.
std::string normalize_screen_name(std::string_view name);

/// A name match is authoritative; the LOCAL/REMOTE class never decides.
Direction infer_direction(std::string_view sender, const std::optional<std::string>& owner,
                          const std::optional<std::string>& correspondent);

struct Participants {
  std::optional<std::string> owner;
  std::optional<std::string> correspondent;
  friend bool operator==(const Participants&, const Participants&) = default;
};

/// Recognizes ".../AIMLogger/<owner>/IM Logs/<correspondent>.html" with either
/// separator and any case.
Participants derive_participants_from_path(std::string_view path);

/// "(H:MM:SS AM|PM)" clock text to seconds after midnight. Without AM/PM the
/// value is read as 24-hour.
std::optional<int> parse_clock_token(std::string_view text);

/// "Sunday, January 18, 2015" (weekday optional, month full or abbreviated).
std::optional<std::chrono::year_month_day> parse_date_row(std::string_view text);

std::string decode_entities(std::string_view s);

std::string_view to_string(Direction d);

}  // namespace aimtrace::imlog
