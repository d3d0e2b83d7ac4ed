// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/imlog.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>

#include "aimtrace/text.hpp"

namespace aimtrace::imlog {

namespace {

using Attrs = std::map<std::string, std::string>;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Position of the '>' closing the tag that starts at `open`, honoring quoted
// attribute values. npos when the document ends first.
std::size_t tag_end(std::string_view doc, std::size_t open) {
  char quote = 0;
  for (std::size_t i = open + 1; i < doc.size(); ++i) {
    char c = doc[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '>') {
      return i;
    }
  }
  return std::string_view::npos;
}

// Attributes of a tag body such as "td class='msg' width=100" (names lowercased).
Attrs parse_attrs(std::string_view tag) {
  Attrs attrs;
  std::size_t i = 0;
  while (i < tag.size() && !is_space(tag[i])) ++i;  // element name
  while (i < tag.size()) {
    while (i < tag.size() && (is_space(tag[i]) || tag[i] == '/')) ++i;
    std::size_t n = i;
    while (n < tag.size() && !is_space(tag[n]) && tag[n] != '=' && tag[n] != '/') ++n;
    if (n == i) break;
    std::string name = to_lower(tag.substr(i, n - i));
    i = n;
    while (i < tag.size() && is_space(tag[i])) ++i;
    std::string value;
    if (i < tag.size() && tag[i] == '=') {
      ++i;
      while (i < tag.size() && is_space(tag[i])) ++i;
      if (i < tag.size() && (tag[i] == '\'' || tag[i] == '"')) {
        char q = tag[i++];
        std::size_t e = tag.find(q, i);
        if (e == std::string_view::npos) e = tag.size();
        value = tag.substr(i, e - i);
        i = e + 1;
      } else {
        std::size_t e = i;
        while (e < tag.size() && !is_space(tag[e])) ++e;
        value = tag.substr(i, e - i);
        i = e;
      }
    }
    attrs.emplace(std::move(name), decode_entities(value));
  }
  return attrs;
}

// Finds "<name" followed by whitespace, '>' or '/' in the lowercased document.
std::size_t find_open(std::string_view lower, std::string_view name, std::size_t from, std::size_t limit) {
  std::string pat = "<" + std::string(name);
  while (true) {
    std::size_t p = lower.find(pat, from);
    if (p == std::string_view::npos || p >= limit) return std::string_view::npos;
    std::size_t after = p + pat.size();
    if (after >= lower.size() || is_space(lower[after]) || lower[after] == '>' || lower[after] == '/') return p;
    from = p + 1;
  }
}

std::string strip_tags(std::string_view html) {
  std::string out;
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] == '<') {
      std::size_t e = tag_end(html, i);
      if (e == std::string_view::npos) break;  // truncated tag
      std::size_t n = i + 1;
      while (n < e && is_alpha(html[n])) ++n;
      if (iequals(html.substr(i + 1, n - i - 1), "br")) out.push_back('\n');
      i = e + 1;
    } else {
      std::size_t e = html.find('<', i);
      if (e == std::string_view::npos) e = html.size();
      out.append(html.substr(i, e - i));
      i = e;
    }
  }
  return decode_entities(out);
}

struct Cell {
  Attrs attrs;
  std::string_view inner;
};

std::vector<Cell> cells_of(std::string_view doc, std::string_view lower, std::size_t begin, std::size_t end) {
  std::vector<Cell> cells;
  std::size_t pos = begin;
  while (true) {
    std::size_t open = find_open(lower, "td", pos, end);
    if (open == std::string_view::npos) break;
    std::size_t close = tag_end(doc, open);
    if (close == std::string_view::npos || close >= end) break;
    std::size_t next_td = find_open(lower, "td", close, end);
    std::size_t end_td = lower.find("</td", close);
    std::size_t stop = std::min({end, next_td == std::string_view::npos ? end : next_td,
                                 end_td == std::string_view::npos ? end : end_td});
    cells.push_back({parse_attrs(doc.substr(open + 1, close - open - 1)), doc.substr(close + 1, stop - close - 1)});
    pos = stop;
  }
  return cells;
}

std::string attr(const Attrs& a, const char* name) {
  auto it = a.find(name);
  return it == a.end() ? std::string() : it->second;
}

constexpr std::array<std::string_view, 12> kMonths = {"january", "february", "march",     "april",
                                                      "may",     "june",     "july",      "august",
                                                      "september", "october", "november", "december"};

std::optional<unsigned> month_from(std::string_view word) {
  std::string w = to_lower(word);
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (w == kMonths[i]) return static_cast<unsigned>(i + 1);
    if (w.size() >= 3 && kMonths[i].rfind(w, 0) == 0 && (w.size() == 3 || (w.size() == 4 && w == "sept")))
      return static_cast<unsigned>(i + 1);
  }
  return std::nullopt;
}

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    static const std::map<std::string_view, std::string_view> named = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", "\xC2\xA0"}};
    if (auto it = named.find(name); it != named.end()) {
      out.append(it->second);
      i = semi + 1;
      continue;
    }
    if (name.size() >= 2 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
        append_utf8(out, cp == 0 ? 0xFFFD : static_cast<char32_t>(cp));
        i = semi + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::optional<int> parse_clock_token(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '(') text.remove_prefix(1);
  if (!text.empty() && text.back() == ')') text.remove_suffix(1);
  int parts[3] = {0, 0, 0};
  std::size_t i = 0;
  for (int k = 0; k < 3; ++k) {
    if (k > 0) {
      if (i >= text.size() || text[i] != ':') return std::nullopt;
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() && j - i < 2 && is_digit(text[j])) ++j;
    if (j == i) return std::nullopt;
    std::from_chars(text.data() + i, text.data() + j, parts[k]);
    i = j;
  }
  std::string_view rest = text.substr(i);
  while (!rest.empty() && (is_space(rest.front()) || rest.front() == ';')) rest.remove_prefix(1);
  rest = trim(rest);
  int h = parts[0];
  if (parts[1] > 59 || parts[2] > 59) return std::nullopt;
  if (rest.empty()) {
    if (h > 23) return std::nullopt;
  } else if (iequals(rest, "AM") || iequals(rest, "PM")) {
    if (h < 1 || h > 12) return std::nullopt;
    h %= 12;
    if (iequals(rest, "PM")) h += 12;
  } else {
    return std::nullopt;
  }
  return h * 3600 + parts[1] * 60 + parts[2];
}

std::optional<std::chrono::year_month_day> parse_date_row(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alpha(text[i]) && !is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (is_alpha(text[j]) || is_digit(text[j]))) ++j;
    words.push_back(text.substr(i, j - i));
    i = j;
  }
  for (std::size_t k = 0; k + 2 < words.size(); ++k) {
    auto m = month_from(words[k]);
    if (!m) continue;
    auto d = words[k + 1], y = words[k + 2];
    if (d.size() > 2 || y.size() != 4 || !std::all_of(d.begin(), d.end(), is_digit) ||
        !std::all_of(y.begin(), y.end(), is_digit))
      return std::nullopt;
    unsigned dd = 0;
    int yy = 0;
    std::from_chars(d.data(), d.data() + d.size(), dd);
    std::from_chars(y.data(), y.data() + y.size(), yy);
    std::chrono::year_month_day ymd{std::chrono::year{yy}, std::chrono::month{*m}, std::chrono::day{dd}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
  }
  return std::nullopt;
}

std::string normalize_screen_name(std::string_view name) {
  std::string out;
  for (char c : name)
    if (!is_space(c)) out.push_back(c);
  return to_lower(out);
}

Direction infer_direction(std::string_view sender, const std::optional<std::string>& owner,
                          const std::optional<std::string>& correspondent) {
  const std::string s = normalize_screen_name(sender);
  if (owner && normalize_screen_name(*owner) == s) return Direction::FromOwner;
  if (correspondent && normalize_screen_name(*correspondent) == s) return Direction::FromCorrespondent;
  return Direction::Unknown;
}

Participants derive_participants_from_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    std::size_t j = path.find_first_of("/\\", i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  const std::size_t n = parts.size();
  if (n < 4 || !iequals(parts[n - 4], "AIMLogger") || !iequals(parts[n - 2], "IM Logs") ||
      !iends_with(parts[n - 1], ".html") || parts[n - 1].size() <= 5)
    return {};
  return {std::string(parts[n - 3]), std::string(parts[n - 1].substr(0, parts[n - 1].size() - 5))};
}

Conversation parse_im_log(std::string_view raw, std::optional<std::string> owner,
                          std::optional<std::string> correspondent, Origin origin) {
  Conversation conv;
  conv.owner_screen_name = std::move(owner);
  conv.correspondent_screen_name = std::move(correspondent);
  conv.origin = origin;
  auto [doc_s, lossy] = sanitize_utf8(raw);
  conv.lossy = lossy;
  const std::string_view doc = doc_s;
  const std::string lower_s = to_lower(doc);
  const std::string_view lower = lower_s;

  std::optional<std::chrono::year_month_day> current_date;
  std::size_t pos = 0;
  while (true) {
    std::size_t row = find_open(lower, "tr", pos, lower.size());
    if (row == std::string_view::npos) break;
    std::size_t next_row = find_open(lower, "tr", row + 3, lower.size());
    std::size_t close_row = lower.find("</tr", row);
    std::size_t end = std::min(next_row == std::string_view::npos ? doc.size() : next_row,
                               close_row == std::string_view::npos ? doc.size() : close_row);
    pos = end == doc.size() ? doc.size() : end + 1;

    auto cells = cells_of(doc, lower, row, end);
    if (cells.empty()) {
      ++conv.skipped_rows;
      continue;
    }
    if (iequals(attr(cells[0].attrs, "class"), "time")) {
      if (auto d = parse_date_row(strip_tags(cells[0].inner))) {
        current_date = d;
        ++conv.date_rows;
      } else {
        ++conv.skipped_rows;
      }
      continue;
    }
    const Cell* msg = nullptr;
    for (std::size_t k = 1; k < cells.size(); ++k)
      if (iequals(attr(cells[k].attrs, "class"), "msg")) {
        msg = &cells[k];
        break;
      }
    if (msg == nullptr) {
      ++conv.skipped_rows;
      continue;
    }

    ChatMessage m;
    m.raw_class = attr(cells[0].attrs, "class");
    std::string head = strip_tags(cells[0].inner);
    std::string_view head_v = trim(head);
    std::optional<int> clock;
    if (auto paren = head_v.rfind('('); paren != std::string_view::npos && head_v.back() == ')') {
      clock = parse_clock_token(head_v.substr(paren));
      if (clock) head_v = head_v.substr(0, paren);
    }
    head_v = trim(head_v);
    while (!head_v.empty() && (head_v.back() == ';' || head_v.back() == ':')) head_v.remove_suffix(1);
    m.sender_screen_name = std::string(trim(head_v));
    if (clock && current_date)
      m.sent_at = LocalTime{std::chrono::local_days{*current_date}.time_since_epoch() + std::chrono::seconds{*clock}};

    std::string_view body = msg->inner;
    std::string lower_body = to_lower(body);
    if (std::size_t f = find_open(lower_body, "font", 0, lower_body.size()); f != std::string_view::npos) {
      if (std::size_t fe = tag_end(body, f); fe != std::string_view::npos) {
        auto fa = parse_attrs(body.substr(f + 1, fe - f - 1));
        m.font = Font{attr(fa, "face"), attr(fa, "size"), attr(fa, "color")};
      }
    }
    m.body_text = strip_tags(body);
    m.direction = infer_direction(m.sender_screen_name, conv.owner_screen_name, conv.correspondent_screen_name);
    conv.messages.push_back(std::move(m));
  }
  return conv;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::FromOwner: return "from-owner";
    case Direction::FromCorrespondent: return "from-correspondent";
    default: return "unknown";
  }
}

}  // namespace aimtrace::imlog
