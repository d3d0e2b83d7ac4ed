// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/registry.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "aimtrace/error.hpp"

namespace aimtrace::reg {

namespace {

constexpr std::string_view kV5Header = "Windows Registry Editor Version 5.00";
constexpr std::string_view kV4Header = "REGEDIT4";

std::string latin1_to_utf8(ByteView b) {
  std::string out;
  out.reserve(b.size());
  for (auto c : b) append_utf8(out, c);
  return out;
}

Bytes utf8_to_latin1(std::string_view s) {
  Bytes out;
  auto [clean, lossy] = sanitize_utf8(s);
  (void)lossy;
  for (std::size_t i = 0; i < clean.size();) {
    auto c = static_cast<unsigned char>(clean[i]);
    char32_t cp;
    std::size_t n;
    if (c < 0x80) cp = c, n = 1;
    else if ((c & 0xE0) == 0xC0) cp = c & 0x1F, n = 2;
    else if ((c & 0xF0) == 0xE0) cp = c & 0x0F, n = 3;
    else cp = c & 0x07, n = 4;
    for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(clean[i + k]) & 0x3F);
    out.push_back(cp < 0x100 ? static_cast<std::uint8_t>(cp) : '?');
    i += n;
  }
  return out;
}

std::string strip_trailing_nuls(std::string s) {
  while (!s.empty() && s.back() == '\0') s.pop_back();
  return s;
}

std::string decode_string_data(ByteView data, RegVersion v) {
  return v == RegVersion::V5 ? utf16le_to_utf8(data) : latin1_to_utf8(data);
}

Bytes encode_string_data(std::string_view text, RegVersion v) {
  Bytes b = v == RegVersion::V5 ? utf8_to_utf16le(text) : utf8_to_latin1(text);
  b.push_back(0);
  if (v == RegVersion::V5) b.push_back(0);
  return b;
}

// Reads a quoted string starting at s[pos] == '"'; returns the unescaped text
// and leaves pos after the closing quote.
std::optional<std::string> read_quoted(std::string_view s, std::size_t& pos) {
  if (pos >= s.size() || s[pos] != '"') return std::nullopt;
  std::string out;
  for (++pos; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '\\' && pos + 1 < s.size()) {
      out += s[++pos];
    } else if (c == '"') {
      ++pos;
      return out;
    } else {
      out += c;
    }
  }
  return std::nullopt;
}

std::optional<Bytes> parse_hex_list(std::string_view s) {
  Bytes out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  };
  skip_ws();
  if (i == s.size()) return out;
  while (true) {
    skip_ws();
    if (i + 2 > s.size() || !std::isxdigit(static_cast<unsigned char>(s[i])) ||
        !std::isxdigit(static_cast<unsigned char>(s[i + 1])))
      return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(std::stoul(std::string(s.substr(i, 2)), nullptr, 16)));
    i += 2;
    skip_ws();
    if (i == s.size()) return out;
    if (s[i] != ',') return std::nullopt;
    ++i;
    skip_ws();
    if (i == s.size()) return out;  // trailing comma
  }
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\' || c == '"') out += '\\';
    out += c;
  }
  return out;
}

std::string lower_path(std::string_view p) { return to_lower(p); }

}  // namespace

std::optional<std::uint64_t> RegValue::number() const {
  if (type == ValueType::Dword && data.size() == 4) {
    return static_cast<std::uint64_t>(data[0]) | (static_cast<std::uint64_t>(data[1]) << 8) |
           (static_cast<std::uint64_t>(data[2]) << 16) | (static_cast<std::uint64_t>(data[3]) << 24);
  }
  if (type == ValueType::Qword && data.size() == 8) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | data[static_cast<std::size_t>(i)];
    return v;
  }
  return std::nullopt;
}

const RegValue* RegKey::find(std::string_view name) const {
  for (const auto& v : values)
    if (iequals(v.name, name)) return &v;
  return nullptr;
}

const RegKey* RegExport::find_key(std::string_view path) const {
  for (const auto& k : keys)
    if (iequals(k.path, path)) return &k;
  return nullptr;
}

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Sz: return "sz";
    case ValueType::ExpandSz: return "expand_sz";
    case ValueType::MultiSz: return "multi_sz";
    case ValueType::Dword: return "dword";
    case ValueType::Qword: return "qword";
    case ValueType::Binary: return "binary";
    case ValueType::Unknown: return "unknown";
  }
  return "unknown";
}

RegExport parse_reg_export(ByteView bytes) {
  std::string text;
  if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xFE) {
    text = utf16le_to_utf8(bytes.subspan(2));
  } else if (bytes.size() >= 3 && bytes[0] == 0xEF && bytes[1] == 0xBB && bytes[2] == 0xBF) {
    text = sanitize_utf8(as_chars(bytes.subspan(3))).first;
  } else {
    text = latin1_to_utf8(bytes);
  }

  std::vector<std::string_view> lines;
  {
    std::string_view all = text;
    while (!all.empty()) {
      auto nl = all.find('\n');
      auto line = all.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      all.remove_prefix(nl + 1);
    }
  }

  RegExport reg;
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw UnsupportedFormat("reg export without header");
  const auto header = trim(lines[i]);
  if (header == kV5Header) reg.version = RegVersion::V5;
  else if (header == kV4Header) reg.version = RegVersion::Regedit4;
  else throw UnsupportedFormat("reg export without header");
  ++i;

  RegKey* current = nullptr;
  auto diag = [&reg](std::size_t line_no, const std::string& what) {
    reg.diagnostics.push_back("line " + std::to_string(line_no) + ": " + what);
  };

  for (; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        diag(line_no, "malformed key line");
        current = nullptr;
        continue;
      }
      auto path = line.substr(1, line.size() - 2);
      if (path.front() == '-') {
        diag(line_no, "key deletion entry ignored");
        current = nullptr;
        continue;
      }
      auto it = std::find_if(reg.keys.begin(), reg.keys.end(), [&](const RegKey& k) { return iequals(k.path, path); });
      if (it == reg.keys.end()) {
        reg.keys.push_back(RegKey{std::string(path), {}});
        current = &reg.keys.back();
      } else {
        current = &*it;
      }
      continue;
    }

    RegValue v;
    std::size_t pos = 0;
    if (line.front() == '@') {
      pos = 1;
    } else if (auto name = read_quoted(line, pos)) {
      v.name = std::move(*name);
    } else {
      diag(line_no, "malformed value line");
      continue;
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size() || line[pos] != '=') {
      diag(line_no, "missing '=' in value line");
      continue;
    }
    ++pos;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::string_view data = line.substr(pos);

    // Hex data may continue over following lines ending in a backslash.
    std::string joined;
    if (data.starts_with("hex")) {
      joined = std::string(data);
      while (!joined.empty() && joined.back() == '\\' && i + 1 < lines.size()) {
        joined.pop_back();
        joined += trim(lines[++i]);
      }
      if (!joined.empty() && joined.back() == '\\') joined.pop_back();
      data = joined;
    }

    bool ok = true;
    if (data.starts_with('"')) {
      std::size_t p = 0;
      auto s = read_quoted(data, p);
      if (!s || !trim(data.substr(p)).empty()) {
        ok = false;
      } else {
        v.type = ValueType::Sz;
        v.data = encode_string_data(*s, reg.version);
        v.text = std::move(*s);
      }
    } else if (data == "-") {
      diag(line_no, "value deletion entry ignored");
      continue;
    } else if (data.starts_with("dword:")) {
      auto hex = data.substr(6);
      if (hex.size() != 8 || !std::all_of(hex.begin(), hex.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); })) {
        ok = false;
      } else {
        const auto n = static_cast<std::uint32_t>(std::stoul(std::string(hex), nullptr, 16));
        v.type = ValueType::Dword;
        v.data = {static_cast<std::uint8_t>(n), static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n >> 16),
                  static_cast<std::uint8_t>(n >> 24)};
      }
    } else if (data.starts_with("hex")) {
      std::string_view rest = data.substr(3);
      std::optional<std::uint32_t> tag;
      if (rest.starts_with("(")) {
        auto close = rest.find(')');
        auto t = close == std::string_view::npos ? std::string_view{} : rest.substr(1, close - 1);
        if (!t.empty() && t.size() <= 8 &&
            std::all_of(t.begin(), t.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); })) {
          tag = static_cast<std::uint32_t>(std::stoul(std::string(t), nullptr, 16));
          rest = rest.substr(close + 1);
        } else {
          ok = false;
        }
      }
      std::optional<Bytes> raw;
      if (ok && rest.starts_with(":")) raw = parse_hex_list(rest.substr(1));
      if (!raw) {
        ok = false;
      } else {
        v.data = std::move(*raw);
        if (!tag) {
          v.type = ValueType::Binary;
        } else if (*tag == 2) {
          v.type = ValueType::ExpandSz;
          v.text = strip_trailing_nuls(decode_string_data(v.data, reg.version));
        } else if (*tag == 7) {
          v.type = ValueType::MultiSz;
          std::string t = strip_trailing_nuls(decode_string_data(v.data, reg.version));
          std::replace(t.begin(), t.end(), '\0', '\n');
          v.text = std::move(t);
        } else if (*tag == 0xb) {
          v.type = ValueType::Qword;
        } else {
          v.type = ValueType::Unknown;
          v.unknown_tag = *tag;
        }
      }
    } else {
      ok = false;
    }
    if (!ok) {
      diag(line_no, "malformed value data");
      continue;
    }
    if (!current) {
      diag(line_no, "value outside any key");
      continue;
    }
    auto existing = std::find_if(current->values.begin(), current->values.end(),
                                 [&](const RegValue& x) { return iequals(x.name, v.name); });
    if (existing != current->values.end()) *existing = std::move(v);
    else current->values.push_back(std::move(v));
  }
  return reg;
}

std::string serialize_reg_export(const RegExport& reg) {
  std::string out(reg.version == RegVersion::V5 ? kV5Header : kV4Header);
  out += "\r\n\r\n";
  for (const auto& key : reg.keys) {
    out += "[" + key.path + "]\r\n";
    for (const auto& v : key.values) {
      std::string line = v.name.empty() ? "@=" : "\"" + escape(v.name) + "\"=";
      if (v.type == ValueType::Sz && v.text) {
        line += "\"" + escape(*v.text) + "\"";
      } else if (v.type == ValueType::Dword && v.data.size() == 4) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "dword:%08llx", static_cast<unsigned long long>(*v.number()));
        line += buf;
      } else {
        switch (v.type) {
          case ValueType::ExpandSz: line += "hex(2):"; break;
          case ValueType::MultiSz: line += "hex(7):"; break;
          case ValueType::Qword: line += "hex(b):"; break;
          case ValueType::Unknown: {
            char buf[24];
            std::snprintf(buf, sizeof buf, "hex(%x):", v.unknown_tag);
            line += buf;
            break;
          }
          case ValueType::Sz: line += "hex(1):"; break;
          case ValueType::Dword: line += "hex(4):"; break;
          case ValueType::Binary: line += "hex:"; break;
        }
        std::size_t width = line.size();
        for (std::size_t b = 0; b < v.data.size(); ++b) {
          char buf[4];
          std::snprintf(buf, sizeof buf, "%02x", v.data[b]);
          line += buf;
          width += 2;
          if (b + 1 < v.data.size()) {
            line += ',';
            ++width;
            if (width > 76) {
              line += "\\\r\n  ";
              width = 2;
            }
          }
        }
      }
      out += line + "\r\n";
    }
    out += "\r\n";
  }
  return out;
}

Bytes encode_reg_export(const RegExport& reg) {
  const std::string text = serialize_reg_export(reg);
  if (reg.version == RegVersion::Regedit4) return utf8_to_latin1(text);
  Bytes out{0xFF, 0xFE};
  Bytes body = utf8_to_utf16le(text);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::string rot13(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + 13) % 26);
    else if (c >= 'A' && c <= 'Z') c = static_cast<char>('A' + (c - 'A' + 13) % 26);
  }
  return out;
}

namespace {

constexpr std::string_view kInstallHives[] = {
    "HKEY_LOCAL_MACHINE\\SOFTWARE\\Wow6432Node\\America Online",
    "HKEY_LOCAL_MACHINE\\SOFTWARE\\Wow6432Node\\AOL",
    "HKEY_CURRENT_USER\\Software\\America Online",
};
constexpr std::string_view kComDlgLists[] = {"CIDSizeMRU", "LastVisitedPidlMRU", "OpenSavePidlMRU"};

bool path_is_or_under(std::string_view path, std::string_view base) {
  return iequals(path, base) || (path.size() > base.size() && path[base.size()] == '\\' &&
                                 iequals(path.substr(0, base.size()), base));
}

// True when `component` ("A\B\C") appears in `path` as whole backslash-separated segments.
bool has_component(std::string_view path, std::string_view component, bool at_end) {
  const std::string p = "\\" + lower_path(path) + "\\";
  const std::string c = "\\" + lower_path(component) + "\\";
  if (at_end) return p.size() >= c.size() && p.compare(p.size() - c.size(), c.size(), c) == 0;
  return p.find(c) != std::string::npos;
}

std::string value_locator(const RegKey& key, const RegValue& v) {
  return key.path + "\\" + (v.name.empty() ? std::string("(Default)") : v.name);
}

std::string decoded_data(const RegValue& v) {
  if (v.text) return *v.text;
  return utf16le_to_utf8(v.data);
}

// The printable run of `s` around the first case-insensitive occurrence of `needle`.
std::string printable_run(const std::string& s, std::string_view needle) {
  const std::string low = to_lower(s);
  auto at = low.find(to_lower(needle));
  if (at == std::string::npos) return {};
  auto printable = [](unsigned char c) { return c >= 0x20 && c != 0x7F; };
  std::size_t b = at, e = at + needle.size();
  while (b > 0 && printable(static_cast<unsigned char>(s[b - 1]))) --b;
  while (e < s.size() && printable(static_cast<unsigned char>(s[e]))) ++e;
  return sanitize_utf8(std::string_view(s).substr(b, e - b)).first;
}

Finding registry_finding(ArtifactType t, const std::string& source_id, std::string path, Confidence c) {
  Finding f;
  f.artifact_type = t;
  f.locator = Locator{source_id, RegistryPath{std::move(path)}};
  f.confidence = c;
  return f;
}

}  // namespace

std::vector<Finding> extract_aim_registry_artifacts(const RegExport& reg, const std::string& source_id) {
  std::vector<Finding> out;

  for (auto hive : kInstallHives) {
    std::size_t subkeys = 0, values = 0;
    const RegKey* exact = nullptr;
    for (const auto& k : reg.keys) {
      if (!path_is_or_under(k.path, hive)) continue;
      values += k.values.size();
      if (iequals(k.path, hive)) exact = &k;
      else ++subkeys;
    }
    if (!exact && subkeys == 0) continue;
    Finding f = registry_finding(ArtifactType::InstallTrace, source_id, exact ? exact->path : std::string(hive),
                                 Confidence::Probable);
    f.attributes["hive"] = std::string(hive);
    f.attributes["subkeys"] = std::to_string(subkeys);
    f.attributes["values"] = std::to_string(values);
    f.attributes["emptied"] = values == 0 && subkeys == 0 ? "true" : "false";
    out.push_back(std::move(f));
  }

  for (const auto& key : reg.keys) {
    if (has_component(key.path, "CurrentVersion\\Run", true)) {
      for (const auto& v : key.values) {
        const std::string data = decoded_data(v);
        if (!icontains(data, "aim")) continue;
        Finding f = registry_finding(ArtifactType::Autostart, source_id, value_locator(key, v),
                                     icontains(data, "aim.exe") ? Confidence::Definite : Confidence::Probable);
        f.attributes["value_name"] = v.name;
        f.attributes["command"] = sanitize_utf8(data).first;
        out.push_back(std::move(f));
      }
    }

    for (auto list : kComDlgLists) {
      if (!has_component(key.path, std::string("Explorer\\ComDlg32\\") + std::string(list), false)) continue;
      for (const auto& v : key.values) {
        const std::string data = decoded_data(v);
        if (!icontains(data, "aim.exe")) continue;
        Finding f = registry_finding(ArtifactType::MruTrace, source_id, value_locator(key, v), Confidence::Definite);
        f.attributes["mru"] = std::string(list);
        f.attributes["value_name"] = v.name;
        f.attributes["entry"] = printable_run(data, "aim.exe");
        out.push_back(std::move(f));
      }
    }

    if (has_component(key.path, "Explorer\\RecentDocs", false)) {
      for (const auto& v : key.values) {
        if (iequals(v.name, "MRUListEx")) continue;
        const std::string data = decoded_data(v);
        const char* needle = icontains(data, ".blt") ? ".blt" : (icontains(data, "aim") ? "aim" : nullptr);
        if (!needle) continue;
        Finding f = registry_finding(ArtifactType::MruTrace, source_id, value_locator(key, v), Confidence::Probable);
        f.attributes["mru"] = "RecentDocs";
        f.attributes["value_name"] = v.name;
        f.attributes["entry"] = printable_run(data, needle);
        out.push_back(std::move(f));
      }
    }

    if (has_component(key.path, "CurrentVersion\\Explorer\\UserAssist", false) &&
        has_component(key.path, "Count", true)) {
      for (const auto& v : key.values) {
        const std::string decoded = rot13(v.name);
        if (!icontains(decoded, "aim")) continue;
        Finding f = registry_finding(ArtifactType::InstallTrace, source_id, value_locator(key, v), Confidence::Probable);
        f.attributes["usage"] = "userassist";
        f.attributes["value_name"] = v.name;
        f.attributes["decoded_name"] = decoded;
        out.push_back(std::move(f));
      }
    }
  }
  return merge_findings(std::move(out));
}

}  // namespace aimtrace::reg
